// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "dynsim/service/session.hpp"

namespace dynsim {

struct ServerOptions {
  std::uint16_t port = 0;
  /// Listen on all interfaces instead of loopback.
  bool bind_any = false;
  double snapshot_hz = 20.0;
  /// Simulated seconds per wall-clock second.
  double realtime_factor = 1.0;
  /// Snapshots queued for one client before newer ones are dropped.
  std::size_t max_pending_snapshots = 8;
  /// Longest accepted control line in bytes.
  std::size_t max_line = 1 << 20;
};

void validate_server_options(const ServerOptions& opts);

/// TCP front end for a Session. One loop thread steps the session on the
/// wall clock and fans snapshots out; each client has a reader feeding the
/// session queue and a writer draining its outbox.
class Server {
 public:
  /// Binds immediately; throws TransportError if the port is taken.
  Server(Session& session, ServerOptions opts);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }

  /// Blocks until stop().
  void run();
  /// run() on a background thread.
  void start();
  /// Safe from any thread, including signal-watching ones.
  void stop();
  /// Waits for a start()ed loop to finish.
  void join();

  std::uint64_t snapshots_dropped() const { return dropped_.load(); }
  std::size_t client_count() const;

 private:
  struct Client;

  void accept_loop();
  void reader_loop(Client& c);
  void writer_loop(Client& c);
  void route(const std::vector<Outgoing>& out);
  void broadcast_snapshot();
  void reap(bool all);

  Session& session_;
  ServerOptions opts_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;

  std::atomic<bool> stop_{false};
  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  std::thread loop_thread_;
  std::thread accept_thread_;

  mutable std::mutex clients_mutex_;
  std::list<std::unique_ptr<Client>> clients_;
  ClientId next_client_ = 1;
  std::atomic<std::uint64_t> dropped_{0};
};

}  // namespace dynsim
