#include "solartb/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>

namespace solartb::scpi {

namespace {

constexpr int kPollMs = 100;

bool send_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

Server::Server(Instrument& instrument, ServerOptions options) : inst_(instrument), opts_(std::move(options)) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  if (running_) return port_;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorKind::Io, std::string("socket: ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(opts_.port);
  if (::inet_pton(AF_INET, opts_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorKind::Io, "bad bind address: " + opts_.bind_address);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 8) != 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorKind::Io, "bind " + opts_.bind_address + ":" + std::to_string(opts_.port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);

  running_ = true;
  executor_ = std::thread([this] { executor_loop(); });
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void Server::stop() {
  {
    std::lock_guard lk(mu_);
    if (!running_ && listen_fd_ < 0) return;
    running_ = false;
  }
  cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lk(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : readers_) {
    if (t.joinable()) t.join();
  }
  readers_.clear();
  if (executor_.joinable()) executor_.join();
  {
    std::lock_guard lk(conn_mu_);
    for (int fd : conn_fds_) ::close(fd);
    conn_fds_.clear();
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void Server::wait() {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [this] { return !running_.load(); });
}

void Server::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, kPollMs);
    if (r <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    std::lock_guard lk(conn_mu_);
    conn_fds_.push_back(fd);
    readers_.emplace_back([this, fd] { connection_loop(fd); });
  }
}

void Server::connection_loop(int fd) {
  std::string buf;
  bool discarding = false;
  char chunk[4096];
  while (running_) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, kPollMs);
    if (r == 0) continue;
    if (r < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));

    std::size_t nl;
    while ((nl = buf.find('\n')) != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      const bool overlong = discarding || line.size() > kMaxLineBytes + 1;
      discarding = false;
      auto reply = submit(overlong ? std::string() : std::move(line), overlong);
      if (reply && !send_all(fd, *reply + "\n")) return;
    }
    if (buf.size() > kMaxLineBytes + 1) {
      // Drop the rest of this line; it is reported once its LF arrives.
      discarding = true;
      buf.clear();
    }
  }
}

std::optional<std::string> Server::submit(std::string line, bool overlong) {
  std::future<std::optional<std::string>> fut;
  {
    std::lock_guard lk(mu_);
    if (!running_) return std::nullopt;
    jobs_.push_back(Job{std::move(line), overlong, {}});
    fut = jobs_.back().reply.get_future();
  }
  cv_.notify_all();
  return fut.get();
}

void Server::executor_loop() {
  using clock = std::chrono::steady_clock;
  auto last = clock::now();
  std::unique_lock lk(mu_);
  while (true) {
    if (opts_.free_run) {
      cv_.wait_for(lk, std::chrono::duration<double>(opts_.tick_s),
                   [this] { return !jobs_.empty() || !running_; });
    } else {
      cv_.wait(lk, [this] { return !jobs_.empty() || !running_; });
    }
    if (!running_) {
      for (auto& j : jobs_) j.reply.set_value(std::nullopt);
      jobs_.clear();
      return;
    }
    if (opts_.free_run) {
      const auto t = clock::now();
      const double dt = std::chrono::duration<double>(t - last).count();
      last = t;
      try {
        inst_.free_run(dt);
      } catch (const std::exception& e) {
        inst_.errors().push(code::kSystemError, std::string(error_text(code::kSystemError)) + "; " + e.what());
      }
    }
    while (!jobs_.empty()) {
      Job job = std::move(jobs_.front());
      jobs_.pop_front();
      lk.unlock();
      std::optional<std::string> reply;
      if (job.overlong) {
        inst_.errors().push(code::kTooMuchData, error_text(code::kTooMuchData));
      } else {
        try {
          reply = inst_.execute(job.line);
        } catch (const std::exception& e) {
          inst_.errors().push(code::kSystemError, std::string(error_text(code::kSystemError)) + "; " + e.what());
        }
      }
      job.reply.set_value(std::move(reply));
      lk.lock();
    }
  }
}

void serve_stream(Instrument& instrument, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    std::optional<std::string> reply;
    try {
      reply = instrument.execute(line);
    } catch (const std::exception& e) {
      instrument.errors().push(code::kSystemError, std::string(error_text(code::kSystemError)) + "; " + e.what());
    }
    if (reply) out << *reply << '\n' << std::flush;
  }
}

}  // namespace solartb::scpi
