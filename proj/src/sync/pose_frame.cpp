// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/sync/pose_frame.hpp"

#include <bit>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>

namespace dynsim {
namespace {

class Writer {
 public:
  explicit Writer(std::size_t size) { out_.reserve(size); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::uint64_t get(std::size_t n) {
    if (remaining() < n) {
      throw DecodeError(DecodeError::Kind::Truncated,
                        "truncated pose frame at byte " + std::to_string(pos_));
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_pose_frame(const PoseFrame& frame) {
  if (frame.entries.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("pose frame has more than 65535 entries");
  }
  std::unordered_set<std::uint32_t> seen;
  for (const PoseEntry& e : frame.entries) {
    if (!seen.insert(e.object_id).second) {
      throw std::invalid_argument("duplicate object id " + std::to_string(e.object_id));
    }
  }
  Writer w(kPoseFrameHeaderSize + kPoseEntrySize * frame.entries.size());
  w.u32(kPoseFrameMagic);
  w.u8(kPoseFrameVersion);
  w.u8(frame.flags);
  w.u32(frame.seq);
  w.u64(frame.timestamp_us);
  w.u16(static_cast<std::uint16_t>(frame.entries.size()));
  for (const PoseEntry& e : frame.entries) {
    w.u32(e.object_id);
    w.f64(e.pose.position.x);
    w.f64(e.pose.position.y);
    w.f64(e.pose.position.z);
    w.f64(e.pose.orientation.w);
    w.f64(e.pose.orientation.x);
    w.f64(e.pose.orientation.y);
    w.f64(e.pose.orientation.z);
  }
  return w.take();
}

PoseFrame decode_pose_frame(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.u32() != kPoseFrameMagic) {
    throw DecodeError(DecodeError::Kind::BadMagic, "bad pose frame magic");
  }
  const std::uint8_t version = r.u8();
  if (version != kPoseFrameVersion) {
    throw DecodeError(DecodeError::Kind::UnsupportedVersion,
                      "unsupported pose frame version " + std::to_string(version));
  }
  PoseFrame f;
  f.flags = r.u8();
  f.seq = r.u32();
  f.timestamp_us = r.u64();
  const std::uint16_t count = r.u16();
  if (r.remaining() < kPoseEntrySize * count) {
    throw DecodeError(DecodeError::Kind::Truncated,
                      "pose frame declares " + std::to_string(count) + " entries but holds " +
                          std::to_string(r.remaining()) + " bytes");
  }
  f.entries.resize(count);
  std::unordered_set<std::uint32_t> seen;
  for (PoseEntry& e : f.entries) {
    e.object_id = r.u32();
    e.pose.position.x = r.f64();
    e.pose.position.y = r.f64();
    e.pose.position.z = r.f64();
    e.pose.orientation.w = r.f64();
    e.pose.orientation.x = r.f64();
    e.pose.orientation.y = r.f64();
    e.pose.orientation.z = r.f64();
    if (!seen.insert(e.object_id).second) {
      throw DecodeError(DecodeError::Kind::DuplicateObjectId,
                        "duplicate object id " + std::to_string(e.object_id));
    }
  }
  if (r.remaining() != 0) {
    throw DecodeError(DecodeError::Kind::TrailingBytes,
                      std::to_string(r.remaining()) + " trailing bytes after pose frame");
  }
  return f;
}

}  // namespace dynsim
