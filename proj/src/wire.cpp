// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/wire.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prednbv/error.hpp"

namespace prednbv::wire {

namespace {

[[noreturn]] void unavailable(const std::string& what) {
  fail(ErrorCode::kPredictorUnavailable, what);
}

int remaining_ms(std::chrono::steady_clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - std::chrono::steady_clock::now());
  return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

// Blocks SIGPIPE for the calling thread while writing to a pipe whose reader
// may have exited, then discards a pending SIGPIPE.
class ScopedSigpipeBlock {
 public:
  ScopedSigpipeBlock() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &set, &old_);
  }
  ~ScopedSigpipeBlock() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGPIPE);
    const timespec zero{0, 0};
    while (sigtimedwait(&set, nullptr, &zero) > 0) {
    }
    pthread_sigmask(SIG_SETMASK, &old_, nullptr);
  }

 private:
  sigset_t old_;
};

std::string read_fd(int fd, std::chrono::steady_clock::time_point deadline) {
  pollfd p{fd, POLLIN, 0};
  while (true) {
    const int r = ::poll(&p, 1, remaining_ms(deadline));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) unavailable(fmt::format("poll failed: {}", std::strerror(errno)));
    if (r == 0) unavailable("predictor timed out");
    char buf[65536];
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
    if (n < 0) unavailable(fmt::format("read failed: {}", std::strerror(errno)));
    if (n == 0) unavailable("predictor closed the connection");
    return std::string(buf, static_cast<std::size_t>(n));
  }
}

void write_fd(int fd, std::string_view bytes, bool socket) {
  ScopedSigpipeBlock guard;
  while (!bytes.empty()) {
    const ssize_t n = socket ? ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL)
                             : ::write(fd, bytes.data(), bytes.size());
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) unavailable(fmt::format("write failed: {}", std::strerror(errno)));
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

class SocketConnection final : public Connection {
 public:
  explicit SocketConnection(int fd) : fd_(fd) {}
  ~SocketConnection() override { ::close(fd_); }
  void write_all(std::string_view bytes) override { write_fd(fd_, bytes, true); }
  std::string read_some(std::chrono::steady_clock::time_point deadline) override {
    return read_fd(fd_, deadline);
  }

 private:
  int fd_;
};

class ProcessConnection final : public Connection {
 public:
  ProcessConnection(pid_t pid, int to_child, int from_child)
      : pid_(pid), to_child_(to_child), from_child_(from_child) {}
  ~ProcessConnection() override {
    ::close(to_child_);
    ::close(from_child_);
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
    }
  }
  void write_all(std::string_view bytes) override { write_fd(to_child_, bytes, false); }
  std::string read_some(std::chrono::steady_clock::time_point deadline) override {
    return read_fd(from_child_, deadline);
  }

 private:
  pid_t pid_;
  int to_child_;
  int from_child_;
};

std::unique_ptr<Connection> connect_tcp(const std::string& hostport,
                                        std::chrono::milliseconds timeout) {
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos) unavailable("tcp endpoint must be host:port");
  const std::string host = hostport.substr(0, colon);
  const std::string port = hostport.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    unavailable(fmt::format("cannot resolve '{}'", hostport));
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr && fd < 0; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      int err = 0;
      socklen_t len = sizeof err;
      if (::poll(&p, 1, remaining_ms(deadline)) == 1 &&
          ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) == 0 && err == 0) {
        rc = 0;
      }
    }
    if (rc != 0) {
      ::close(fd);
      fd = -1;
      continue;
    }
    ::fcntl(fd, F_SETFL, flags);
  }
  ::freeaddrinfo(res);
  if (fd < 0) unavailable(fmt::format("cannot connect to '{}'", hostport));
  return std::make_unique<SocketConnection>(fd);
}

std::unique_ptr<Connection> spawn(const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) unavailable("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    unavailable("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) unavailable("fork failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  return std::make_unique<ProcessConnection>(pid, in_pipe[1], out_pipe[0]);
}

}  // namespace

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) unavailable("frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xFFu));
  out.append(payload);
  return out;
}

std::optional<std::string> take_frame(std::string& buffer) {
  if (buffer.size() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) {
    n |= static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[i])) << (8 * i);
  }
  if (n > kMaxFrameBytes) unavailable(fmt::format("frame length {} exceeds limit", n));
  if (buffer.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string payload = buffer.substr(4, n);
  buffer.erase(0, 4 + static_cast<std::size_t>(n));
  return payload;
}

std::string predict_request(const PointCloud& cloud) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : cloud) pts.push_back({p.x(), p.y(), p.z()});
  return nlohmann::json{{"op", "predict"}, {"points", pts}}.dump();
}

PointCloud parse_predict_response(std::string_view payload) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    unavailable(fmt::format("malformed response: {}", e.what()));
  }
  if (!j.is_object()) unavailable("response is not a JSON object");
  if (j.contains("error")) {
    const auto& e = j["error"];
    unavailable("predictor error: " + (e.is_string() ? e.get<std::string>() : e.dump()));
  }
  if (!j.contains("points") || !j["points"].is_array()) unavailable("response lacks 'points'");
  std::vector<Point3> pts;
  pts.reserve(j["points"].size());
  for (const auto& p : j["points"]) {
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
        !p[2].is_number()) {
      unavailable("response point is not [x, y, z]");
    }
    const Point3 q(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    if (!q.allFinite()) unavailable("response contains a non-finite point");
    pts.push_back(q);
  }
  if (pts.empty()) unavailable("predictor returned an empty cloud");
  return PointCloud(std::move(pts));
}

std::unique_ptr<Connection> connect(const std::string& endpoint,
                                    std::chrono::milliseconds timeout) {
  if (endpoint.rfind("tcp://", 0) == 0) return connect_tcp(endpoint.substr(6), timeout);
  if (endpoint.rfind("exec:", 0) == 0) return spawn(endpoint.substr(5));
  unavailable(fmt::format("unsupported predictor endpoint '{}'", endpoint));
}

std::string round_trip(Connection& conn, std::string_view payload,
                       std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  conn.write_all(encode_frame(payload));
  std::string buffer;
  while (true) {
    if (auto frame = take_frame(buffer)) {
      if (!buffer.empty()) unavailable("predictor sent more than one frame");
      return *frame;
    }
    buffer += conn.read_some(deadline);
  }
}

}  // namespace prednbv::wire
