// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/service/server.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>

#include "dynsim/sync/transport.hpp"

namespace dynsim {

using Clock = std::chrono::steady_clock;

struct Server::Client {
  ClientId id = 0;
  int fd = -1;
  std::mutex m;
  std::condition_variable cv;
  // (line, is_snapshot)
  std::deque<std::pair<std::string, bool>> out;
  std::size_t pending_snapshots = 0;
  // Flush the outbox, then hang up.
  bool closing = false;
  std::atomic<bool> dead{false};
  std::thread reader;
  std::thread writer;
};

void validate_server_options(const ServerOptions& opts) {
  if (!(opts.snapshot_hz > 0.0) || !std::isfinite(opts.snapshot_hz)) {
    throw std::invalid_argument("snapshot_hz must be positive");
  }
  if (!(opts.realtime_factor > 0.0) || !std::isfinite(opts.realtime_factor)) {
    throw std::invalid_argument("realtime_factor must be positive");
  }
  if (opts.max_pending_snapshots == 0 || opts.max_line == 0) {
    throw std::invalid_argument("server queue limits must be positive");
  }
}

Server::Server(Session& session, ServerOptions opts) : session_(session), opts_(opts) {
  validate_server_options(opts_);
  listen_fd_ = tcp_listen(opts_.port, opts_.bind_any);
  port_ = bound_port(listen_fd_);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

Server::~Server() {
  stop();
  if (loop_thread_.joinable()) {
    loop_thread_.join();
  }
  if (accept_thread_.joinable()) {
    accept_thread_.join();
  }
  reap(true);
  close_fd(listen_fd_);
}

void Server::start() {
  loop_thread_ = std::thread([this] { run(); });
}

void Server::stop() {
  stop_ = true;
  stop_cv_.notify_all();
}

void Server::join() {
  if (loop_thread_.joinable()) {
    loop_thread_.join();
  }
}

std::size_t Server::client_count() const {
  std::lock_guard lock(clients_mutex_);
  std::size_t n = 0;
  for (const auto& c : clients_) {
    n += c->dead ? 0 : 1;
  }
  return n;
}

void Server::run() {
  using std::chrono::duration;
  using std::chrono::duration_cast;
  const auto tick_period = duration_cast<Clock::duration>(
      duration<double>(session_.config().dt / opts_.realtime_factor));
  const auto snapshot_period =
      duration_cast<Clock::duration>(duration<double>(1.0 / opts_.snapshot_hz));

  Clock::time_point next_tick = Clock::now() + tick_period;
  Clock::time_point next_snapshot = Clock::now();
  while (!stop_) {
    const Clock::time_point now = Clock::now();
    if (now >= next_tick) {
      route(session_.step());
      next_tick += tick_period;
      // After a stall, resume the schedule instead of bursting.
      if (next_tick < now - std::chrono::seconds(1)) {
        next_tick = now + tick_period;
      }
    }
    if (now >= next_snapshot) {
      broadcast_snapshot();
      next_snapshot += snapshot_period;
      if (next_snapshot < now - std::chrono::seconds(1)) {
        next_snapshot = now + snapshot_period;
      }
    }
    reap(false);
    std::unique_lock lock(stop_mutex_);
    stop_cv_.wait_until(lock, std::min(next_tick, next_snapshot), [this] { return stop_.load(); });
  }
}

void Server::accept_loop() {
  while (!stop_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, 50);
    if (r <= 0) {
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      continue;
    }
    auto c = std::make_unique<Client>();
    c->fd = fd;
    Client& ref = *c;
    {
      std::lock_guard lock(clients_mutex_);
      c->id = next_client_++;
    }
    // Threads exist before the client is visible to reap().
    ref.reader = std::thread([this, &ref] { reader_loop(ref); });
    ref.writer = std::thread([this, &ref] { writer_loop(ref); });
    std::lock_guard lock(clients_mutex_);
    clients_.push_back(std::move(c));
  }
}

void Server::reader_loop(Client& c) {
  std::string buffer;
  char chunk[4096];
  while (!c.dead) {
    const ssize_t n = ::recv(c.fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      break;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string line = buffer.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (line.empty()) {
        continue;
      }
      try {
        session_.submit(parse_command(line), c.id);
      } catch (const ProtocolError& e) {
        const nlohmann::json err{{"type", "error"},
                                 {"kind", nullptr},
                                 {"client_tag", nullptr},
                                 {"message", e.what()}};
        std::lock_guard lock(c.m);
        c.out.emplace_back(err.dump(), false);
        c.closing = true;
        c.cv.notify_all();
        return;
      }
    }
    buffer.erase(0, start);
    if (buffer.size() > opts_.max_line) {
      std::lock_guard lock(c.m);
      c.out.emplace_back(R"({"type":"error","kind":null,"client_tag":null,"message":"line too long"})",
                         false);
      c.closing = true;
      c.cv.notify_all();
      return;
    }
  }
  std::lock_guard lock(c.m);
  c.dead = true;
  c.cv.notify_all();
}

void Server::writer_loop(Client& c) {
  while (true) {
    std::pair<std::string, bool> item;
    {
      std::unique_lock lock(c.m);
      c.cv.wait(lock, [&] { return c.dead || !c.out.empty() || c.closing; });
      if (c.dead) {
        break;
      }
      if (c.out.empty()) {
        // closing with nothing left to send
        c.dead = true;
        break;
      }
      item = std::move(c.out.front());
      c.out.pop_front();
      if (item.second) {
        --c.pending_snapshots;
      }
    }
    item.first.push_back('\n');
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(item.first.data());
    if (!write_all(c.fd, {bytes, item.first.size()})) {
      c.dead = true;
      break;
    }
  }
  // Wakes a reader blocked in recv.
  ::shutdown(c.fd, SHUT_RDWR);
}

void Server::route(const std::vector<Outgoing>& out) {
  if (out.empty()) {
    return;
  }
  std::lock_guard lock(clients_mutex_);
  for (const Outgoing& o : out) {
    for (auto& c : clients_) {
      if (c->id != o.client) {
        continue;
      }
      std::lock_guard cl(c->m);
      if (!c->dead) {
        c->out.emplace_back(to_json(o.response).dump(), false);
        c->cv.notify_all();
      }
    }
  }
}

void Server::broadcast_snapshot() {
  Snapshot s = session_.snapshot();
  s.stats.snapshots_dropped = dropped_.load();
  const std::string line = to_json(s).dump();
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_) {
    std::lock_guard cl(c->m);
    if (c->dead || c->closing) {
      continue;
    }
    if (c->pending_snapshots >= opts_.max_pending_snapshots) {
      ++dropped_;
      continue;
    }
    c->out.emplace_back(line, true);
    ++c->pending_snapshots;
    c->cv.notify_all();
  }
}

void Server::reap(bool all) {
  std::list<std::unique_ptr<Client>> done;
  {
    std::lock_guard lock(clients_mutex_);
    for (auto it = clients_.begin(); it != clients_.end();) {
      if (all || (*it)->dead) {
        done.push_back(std::move(*it));
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : done) {
    {
      std::lock_guard cl(c->m);
      c->dead = true;
      c->cv.notify_all();
    }
    ::shutdown(c->fd, SHUT_RDWR);
    if (c->reader.joinable()) {
      c->reader.join();
    }
    if (c->writer.joinable()) {
      c->writer.join();
    }
    close_fd(c->fd);
  }
}

}  // namespace dynsim
