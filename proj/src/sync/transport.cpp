// Copyright 2026 The dynsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "dynsim/sync/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dynsim {
namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> frame_message(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxMessageSize) {
    throw TransportError("message too large");
  }
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::vector<std::uint8_t> out(4 + payload.size());
  for (int i = 0; i < 4; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n >> (8 * i));
  }
  std::copy(payload.begin(), payload.end(), out.begin() + 4);
  return out;
}

void MessageReader::feed(std::span<const std::uint8_t> bytes) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> MessageReader::next() {
  if (pending() < 4) {
    return std::nullopt;
  }
  const std::uint32_t n = read_u32_le(buf_.data() + pos_);
  if (n > kMaxMessageSize) {
    throw TransportError("length prefix " + std::to_string(n) + " exceeds limit");
  }
  if (pending() < 4 + static_cast<std::size_t>(n)) {
    return std::nullopt;
  }
  const auto begin = buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + 4);
  std::vector<std::uint8_t> msg(begin, begin + n);
  pos_ += 4 + n;
  if (pos_ > 65536 && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  return msg;
}

void write_replay_file(const std::filesystem::path& path, std::span<const PoseFrame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw TransportError("cannot open " + path.string() + " for writing");
  }
  for (const PoseFrame& f : frames) {
    const std::vector<std::uint8_t> msg = frame_message(encode_pose_frame(f));
    out.write(reinterpret_cast<const char*>(msg.data()), static_cast<std::streamsize>(msg.size()));
  }
  if (!out) {
    throw TransportError("write failed for " + path.string());
  }
}

std::vector<PoseFrame> read_replay_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TransportError("cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  MessageReader reader;
  reader.feed(bytes);
  std::vector<PoseFrame> frames;
  while (auto msg = reader.next()) {
    frames.push_back(decode_pose_frame(*msg));
  }
  if (reader.pending() != 0) {
    throw TransportError("replay file " + path.string() + " ends mid-message");
  }
  return frames;
}

SyntheticSource::SyntheticSource(std::size_t object_count, std::size_t frame_count,
                                 std::uint64_t period_us)
    : objects_(object_count), frames_(frame_count), period_us_(period_us) {}

Pose SyntheticSource::pose_at(std::uint32_t object, double t) {
  const double radius = 1.0 + 0.5 * object;
  const double rate = 0.5 + 0.1 * object;
  const double a = rate * t + 0.7 * object;
  Pose p;
  p.position = {radius * std::cos(a), radius * std::sin(a), 0.1 * object};
  p.orientation = axis_angle({0.0, 0.0, 1.0}, a + 1.5707963267948966);
  return p;
}

std::optional<PoseFrame> SyntheticSource::next() {
  if (emitted_ >= frames_) {
    return std::nullopt;
  }
  PoseFrame f;
  f.seq = static_cast<std::uint32_t>(emitted_ + 1);
  f.timestamp_us = emitted_ * period_us_;
  const double t = static_cast<double>(f.timestamp_us) * 1e-6;
  for (std::size_t i = 0; i < objects_; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    f.entries.push_back({id, pose_at(id, t)});
  }
  ++emitted_;
  return f;
}

ReplaySource ReplaySource::from_file(const std::filesystem::path& path) {
  return ReplaySource(read_replay_file(path));
}

std::optional<PoseFrame> ReplaySource::next() {
  if (frames_.empty()) {
    return std::nullopt;
  }
  PoseFrame f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

SocketSource::~SocketSource() { close_fd(fd_); }

void SocketSource::shutdown() { ::shutdown(fd_, SHUT_RDWR); }

std::optional<PoseFrame> SocketSource::next() {
  std::uint8_t buf[4096];
  while (true) {
    if (auto msg = reader_.next()) {
      return decode_pose_frame(*msg);
    }
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      return std::nullopt;
    }
    reader_.feed({buf, static_cast<std::size_t>(n)});
  }
}

int tcp_listen(std::uint16_t port, bool any) {
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) {
    throw TransportError(errno_text("socket"));
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(any ? INADDR_ANY : INADDR_LOOPBACK);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text("bind to port " + std::to_string(port));
    ::close(fd);
    throw TransportError(msg);
  }
  if (::listen(fd, 16) != 0) {
    const std::string msg = errno_text("listen");
    ::close(fd);
    throw TransportError(msg);
  }
  return fd;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw TransportError(errno_text("getsockname"));
  }
  return ntohs(addr.sin_port);
}

int tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) {
    throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
    if (fd < 0) {
      continue;
    }
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
      break;
    }
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw TransportError(errno_text("connect to " + host + ":" + std::to_string(port)));
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

bool write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      return false;
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

void close_fd(int fd) {
  if (fd >= 0) {
    ::close(fd);
  }
}

}  // namespace dynsim
