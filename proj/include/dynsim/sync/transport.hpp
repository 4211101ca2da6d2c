// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynsim/sync/pose_frame.hpp"

namespace dynsim {

/// Messages above this size are treated as a corrupt stream.
inline constexpr std::uint32_t kMaxMessageSize = 16u << 20;

/// Prefixes `payload` with its u32 little-endian length.
std::vector<std::uint8_t> frame_message(std::span<const std::uint8_t> payload);

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental splitter for a length-prefixed byte stream.
class MessageReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete message, if any. Throws TransportError on an oversize
  /// length prefix.
  std::optional<std::vector<std::uint8_t>> next();
  /// Bytes held back waiting for the rest of a message.
  std::size_t pending() const { return buf_.size() - pos_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

/// Replay file: concatenated length-prefixed encoded frames.
void write_replay_file(const std::filesystem::path& path, std::span<const PoseFrame> frames);
/// Throws TransportError on I/O failure or a truncated tail, DecodeError on a
/// bad frame.
std::vector<PoseFrame> read_replay_file(const std::filesystem::path& path);

/// Producer of pose frames. next() returns nullopt once the stream has ended
/// or the peer disconnected.
class PoseSource {
 public:
  virtual ~PoseSource() = default;
  virtual std::optional<PoseFrame> next() = 0;
};

/// Scripted objects on circles in the xy plane, one frame per period.
class SyntheticSource : public PoseSource {
 public:
  SyntheticSource(std::size_t object_count, std::size_t frame_count,
                  std::uint64_t period_us = 10000);
  std::optional<PoseFrame> next() override;

  /// Pose of `object` at time t (seconds).
  static Pose pose_at(std::uint32_t object, double t);

 private:
  std::size_t objects_;
  std::size_t frames_;
  std::uint64_t period_us_;
  std::size_t emitted_ = 0;
};

/// Plays back a fixed list of frames.
class ReplaySource : public PoseSource {
 public:
  explicit ReplaySource(std::vector<PoseFrame> frames) : frames_(frames.begin(), frames.end()) {}
  static ReplaySource from_file(const std::filesystem::path& path);
  std::optional<PoseFrame> next() override;

 private:
  std::deque<PoseFrame> frames_;
};

/// Reads length-prefixed frames from a connected socket it owns.
class SocketSource : public PoseSource {
 public:
  explicit SocketSource(int fd) : fd_(fd) {}
  ~SocketSource() override;
  SocketSource(const SocketSource&) = delete;
  SocketSource& operator=(const SocketSource&) = delete;

  std::optional<PoseFrame> next() override;
  /// Unblocks a reader waiting in next().
  void shutdown();

 private:
  int fd_;
  MessageReader reader_;
};

// Thin POSIX socket helpers. All throw TransportError on failure.

/// Listening TCP socket on 127.0.0.1 (or any address when `any` is set).
/// Port 0 picks a free port; see bound_port().
int tcp_listen(std::uint16_t port, bool any = false);
std::uint16_t bound_port(int fd);
int tcp_connect(const std::string& host, std::uint16_t port);
/// Writes everything or returns false when the peer is gone.
bool write_all(int fd, std::span<const std::uint8_t> bytes);
void close_fd(int fd);

}  // namespace dynsim
