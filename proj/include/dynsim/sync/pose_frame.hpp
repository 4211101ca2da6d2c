// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynsim/world/geometry.hpp"

namespace dynsim {

struct PoseEntry {
  std::uint32_t object_id = 0;
  Pose pose;

  bool operator==(const PoseEntry&) const = default;
};

struct PoseFrame {
  std::uint32_t seq = 0;
  std::uint64_t timestamp_us = 0;
  std::uint8_t flags = 0;
  std::vector<PoseEntry> entries;

  bool operator==(const PoseFrame&) const = default;
};

// Wire layout, all little-endian:
//   0  u32 magic      4  u8 version   5  u8 flags
//   6  u32 seq       10  u64 timestamp_us
//  18  u16 count     20  entries
// Entry (60 bytes): u32 object_id, f64 px py pz, f64 qw qx qy qz.
inline constexpr std::uint32_t kPoseFrameMagic = 0x44565350;
inline constexpr std::uint8_t kPoseFrameVersion = 1;
inline constexpr std::size_t kPoseFrameHeaderSize = 20;
inline constexpr std::size_t kPoseEntrySize = 60;

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, UnsupportedVersion, Truncated, DuplicateObjectId, TrailingBytes };

  DecodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Throws std::invalid_argument on duplicate object ids or more than 65535
/// entries. Doubles are written bit-for-bit.
std::vector<std::uint8_t> encode_pose_frame(const PoseFrame& frame);

/// Exact inverse of encode_pose_frame. The buffer must hold one frame and
/// nothing else.
PoseFrame decode_pose_frame(std::span<const std::uint8_t> bytes);

}  // namespace dynsim
