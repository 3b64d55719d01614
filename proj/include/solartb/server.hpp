#pragma once

// Line-oriented SCPI transports: a TCP server (raw socket, LF-terminated
// lines, one reply line per answered query), a stdio loop, and a client-side
// TestbedPort that drives a remote server.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <iosfwd>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "solartb/error.hpp"
#include "solartb/instrument.hpp"

namespace solartb::scpi {

inline constexpr std::uint16_t kDefaultPort = 5025;

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  /// 0 picks an ephemeral port.
  std::uint16_t port = kDefaultPort;
  /// Advance virtual time with wall time (times the clock scale).
  bool free_run = false;
  double tick_s = 0.05;
};

/// All commands from all connections run on one executor thread, so the
/// instrument sees a single writer. Each connection has its own reader.
class Server {
 public:
  Server(Instrument& instrument, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving; returns the bound port. Throws Error(Io).
  std::uint16_t start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();
  std::uint16_t port() const { return port_; }

 private:
  struct Job {
    std::string line;
    bool overlong = false;
    std::promise<std::optional<std::string>> reply;
  };

  void accept_loop();
  void connection_loop(int fd);
  void executor_loop();
  std::optional<std::string> submit(std::string line, bool overlong);

  Instrument& inst_;
  ServerOptions opts_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Job> jobs_;

  std::thread acceptor_;
  std::thread executor_;
  std::mutex conn_mu_;
  std::vector<std::thread> readers_;
  std::vector<int> conn_fds_;
};

/// Reads lines from `in` until EOF, writing one reply line per answered query.
void serve_stream(Instrument& instrument, std::istream& in, std::ostream& out);

/// TestbedPort over a TCP connection. Every setter is followed by SYSTem:ERRor?
/// in the same line; a non-zero code is raised as an Error.
class RemoteTestbed final : public TestbedPort {
 public:
  RemoteTestbed(const std::string& host, std::uint16_t port);
  ~RemoteTestbed() override;
  RemoteTestbed(const RemoteTestbed&) = delete;
  RemoteTestbed& operator=(const RemoteTestbed&) = delete;

  /// Sends one line and returns the reply line.
  std::string query(const std::string& line);
  /// Sends a command and checks the error queue.
  void command(const std::string& line);
  std::string identity() { return query("*IDN?"); }

  void reset() override;
  void set_seed(std::uint64_t seed) override;
  void set_channel_percent(int n, double percent) override;
  double channel_percent(int n) override;
  void set_target(SpectralTarget target) override;
  void set_irradiance(double w_m2) override;
  void set_feedback(bool on) override;
  void advance(double dt_s) override;
  double now() override;
  SpectrometerValues read_spectrum() override;
  iec::BinFractions read_bins() override;
  LuxReading read_illuminance(LuxRange range) override;
  double read_dut_current() override;
  double read_dut_temperature() override;
  void set_dut_temperature(double c) override;
  void set_door(DoorState state) override;
  std::vector<double> scan(int grid_n) override;

 private:
  void send_line(const std::string& line);
  std::string read_line();
  double query_number(const std::string& line);
  std::vector<double> query_list(const std::string& line);

  int fd_ = -1;
  std::string buf_;
};

/// Maps a SCPI error code to the library error kind raised by RemoteTestbed.
ErrorKind error_kind_for(int scpi_code);

}  // namespace solartb::scpi
