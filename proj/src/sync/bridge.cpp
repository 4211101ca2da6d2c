// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/sync/bridge.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <utility>
#include <vector>

namespace dynsim {

const char* to_string(BridgeStatus s) {
  switch (s) {
    case BridgeStatus::Idle:
      return "idle";
    case BridgeStatus::Running:
      return "running";
    case BridgeStatus::Disconnected:
      return "disconnected";
    case BridgeStatus::Failed:
      return "failed";
    case BridgeStatus::Stopped:
      return "stopped";
  }
  return "unknown";
}

std::int64_t monotonic_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

StreamBridge::StreamBridge(RigidTransform calibration, BridgeDirection direction, PoseSink sink)
    : effective_(direction == BridgeDirection::RealToVirtual ? calibration
                                                             : inverse(calibration)),
      sink_(std::move(sink)) {
  validate_transform(calibration);
}

StreamBridge::~StreamBridge() { stop(); }

bool StreamBridge::ingest(const PoseFrame& frame, std::int64_t receive_time_us) {
  std::lock_guard lock(mu_);
  ++stats_.frames_received;
  if (last_seq_ && frame.seq <= *last_seq_) {
    ++stats_.frames_dropped;
    return false;
  }
  last_seq_ = frame.seq;
  const std::int64_t sample = receive_time_us - static_cast<std::int64_t>(frame.timestamp_us);
  offset_ = offset_ ? std::min(*offset_, sample) : sample;

  for (const PoseEntry& e : frame.entries) {
    PoseUpdate u{e.object_id, frame.seq, frame.timestamp_us,
                 static_cast<std::int64_t>(frame.timestamp_us) + *offset_,
                 apply_transform(effective_, e.pose)};
    auto it = pending_.find(e.object_id);
    if (it != pending_.end()) {
      if (u.timestamp_us < it->second.timestamp_us) {
        ++stats_.updates_stale;
        continue;
      }
      ++stats_.updates_superseded;
      it->second = u;
    } else {
      pending_.emplace(e.object_id, u);
    }
  }
  cv_.notify_all();
  return true;
}

std::size_t StreamBridge::flush() {
  // Serializes sink calls; the sink runs without the state lock held.
  std::lock_guard flush_lock(flush_mu_);
  std::vector<PoseUpdate> batch;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, u] : pending_) {
      auto seen = delivered_ts_.find(id);
      if (seen != delivered_ts_.end() && u.timestamp_us < seen->second) {
        ++stats_.updates_stale;
        continue;
      }
      delivered_ts_[id] = u.timestamp_us;
      batch.push_back(u);
    }
    pending_.clear();
    stats_.updates_delivered += batch.size();
  }
  for (const PoseUpdate& u : batch) {
    sink_(u);
  }
  return batch.size();
}

void StreamBridge::start(std::unique_ptr<PoseSource> source) {
  std::lock_guard lock(mu_);
  if (reader_.joinable() || writer_.joinable()) {
    throw std::logic_error("bridge already started");
  }
  source_ = std::move(source);
  status_ = BridgeStatus::Running;
  source_done_ = false;
  stopping_ = false;
  reader_ = std::thread(&StreamBridge::reader_loop, this);
  writer_ = std::thread(&StreamBridge::writer_loop, this);
}

void StreamBridge::reader_loop() {
  BridgeStatus end = BridgeStatus::Disconnected;
  std::string err;
  try {
    while (true) {
      {
        std::lock_guard lock(mu_);
        if (stopping_) {
          end = BridgeStatus::Stopped;
          break;
        }
      }
      std::optional<PoseFrame> f = source_->next();
      if (!f) {
        break;
      }
      ingest(*f, monotonic_us());
    }
  } catch (const std::exception& e) {
    end = BridgeStatus::Failed;
    err = e.what();
  }
  std::lock_guard lock(mu_);
  source_done_ = true;
  if (status_ == BridgeStatus::Running) {
    status_ = end;
  }
  if (!err.empty()) {
    error_ = err;
  }
  cv_.notify_all();
}

void StreamBridge::writer_loop() {
  while (true) {
    bool finished = false;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return !pending_.empty() || source_done_ || stopping_; });
      finished = (source_done_ || stopping_) && pending_.empty();
    }
    if (finished) {
      return;
    }
    flush();
  }
}

void StreamBridge::wait() {
  if (reader_.joinable()) {
    reader_.join();
  }
  if (writer_.joinable()) {
    writer_.join();
  }
}

void StreamBridge::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    if (status_ == BridgeStatus::Running) {
      status_ = BridgeStatus::Stopped;
    }
    cv_.notify_all();
  }
  if (auto* sock = dynamic_cast<SocketSource*>(source_.get())) {
    sock->shutdown();
  }
  wait();
}

BridgeStatus StreamBridge::status() const {
  std::lock_guard lock(mu_);
  return status_;
}

BridgeStats StreamBridge::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::optional<std::int64_t> StreamBridge::clock_offset_us() const {
  std::lock_guard lock(mu_);
  return offset_;
}

std::string StreamBridge::last_error() const {
  std::lock_guard lock(mu_);
  return error_;
}

}  // namespace dynsim
