// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "dynsim/sync/calibration.hpp"
#include "dynsim/sync/pose_frame.hpp"
#include "dynsim/sync/transport.hpp"

namespace dynsim {

enum class BridgeDirection { RealToVirtual, VirtualToReal };

enum class BridgeStatus { Idle, Running, Disconnected, Failed, Stopped };

const char* to_string(BridgeStatus s);

/// One transformed object pose handed to the sink.
struct PoseUpdate {
  std::uint32_t object_id = 0;
  std::uint32_t seq = 0;
  std::uint64_t timestamp_us = 0;
  /// timestamp_us mapped onto the receiver clock with the offset known at
  /// ingest time.
  std::int64_t local_time_us = 0;
  Pose pose;

  bool operator==(const PoseUpdate&) const = default;
};

struct BridgeStats {
  std::uint64_t frames_received = 0;
  std::uint64_t frames_dropped = 0;  // seq regressions
  std::uint64_t updates_superseded = 0;
  std::uint64_t updates_stale = 0;  // older than what the sink already has
  std::uint64_t updates_delivered = 0;

  bool operator==(const BridgeStats&) const = default;
};

using PoseSink = std::function<void(const PoseUpdate&)>;

/// Moves pose frames from a source stream into a sink through a calibration.
///
/// Frames whose seq does not exceed the last accepted seq are dropped and
/// counted. Accepted entries wait in a per-object slot where a newer
/// timestamp replaces an undelivered older one. The sink never sees an
/// object's timestamp go backwards.
///
/// Clock model: offset = running min of (receive_time - timestamp), seeded by
/// the first frame.
///
/// Drive it synchronously with ingest()/flush(), or hand it a source with
/// start(), which runs one reader and one writer thread.
class StreamBridge {
 public:
  StreamBridge(RigidTransform calibration, BridgeDirection direction, PoseSink sink);
  ~StreamBridge();
  StreamBridge(const StreamBridge&) = delete;
  StreamBridge& operator=(const StreamBridge&) = delete;

  /// Returns false if the frame was dropped as out of order.
  bool ingest(const PoseFrame& frame, std::int64_t receive_time_us);
  /// Delivers pending updates in object-id order. Returns how many.
  std::size_t flush();

  void start(std::unique_ptr<PoseSource> source);
  /// Blocks until the source is exhausted and everything is delivered.
  void wait();
  void stop();

  BridgeStatus status() const;
  BridgeStats stats() const;
  std::optional<std::int64_t> clock_offset_us() const;
  std::string last_error() const;

 private:
  void reader_loop();
  void writer_loop();

  RigidTransform effective_;
  PoseSink sink_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint32_t, PoseUpdate> pending_;
  std::map<std::uint32_t, std::uint64_t> delivered_ts_;
  std::optional<std::uint32_t> last_seq_;
  std::optional<std::int64_t> offset_;
  BridgeStats stats_;
  BridgeStatus status_ = BridgeStatus::Idle;
  std::string error_;
  bool source_done_ = false;
  bool stopping_ = false;

  std::mutex flush_mu_;
  std::unique_ptr<PoseSource> source_;
  std::thread reader_;
  std::thread writer_;
};

/// Microseconds on a monotonic clock.
std::int64_t monotonic_us();

}  // namespace dynsim
