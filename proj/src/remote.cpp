#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "solartb/format.hpp"
#include "solartb/server.hpp"

namespace solartb::scpi {

namespace {

constexpr double kOverrangeThreshold = 9e37;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double to_number(std::string_view s) {
  double v = 0.0;
  if (!parse_double(s, v)) throw Error(ErrorKind::Io, "unexpected reply: " + std::string(s));
  return v;
}

}  // namespace

ErrorKind error_kind_for(int scpi_code) {
  switch (scpi_code) {
    case code::kDataOutOfRange: return ErrorKind::OutOfRange;
    case code::kSettingsConflict: return ErrorKind::Config;
    case code::kSystemError: return ErrorKind::Io;
    default: return ErrorKind::OutOfRange;
  }
}

RemoteTestbed::RemoteTestbed(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorKind::Io, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw Error(ErrorKind::Io, "connect " + host + ":" + service + ": " + std::strerror(errno));
  int yes = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
}

RemoteTestbed::~RemoteTestbed() {
  if (fd_ >= 0) ::close(fd_);
}

void RemoteTestbed::send_line(const std::string& line) {
  const std::string s = line + "\n";
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::send(fd_, s.data() + off, s.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::Io, std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string RemoteTestbed::read_line() {
  char chunk[4096];
  std::size_t nl;
  while ((nl = buf_.find('\n')) == std::string::npos) {
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorKind::Io, "connection closed");
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
  std::string line = buf_.substr(0, nl);
  buf_.erase(0, nl + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string RemoteTestbed::query(const std::string& line) {
  send_line(line);
  return read_line();
}

void RemoteTestbed::command(const std::string& line) {
  const std::string reply = query(line + ";:SYST:ERR?");
  const auto comma = reply.find(',');
  const int c = static_cast<int>(to_number(std::string_view(reply).substr(0, comma)));
  if (c == code::kNoError) return;
  // Drain what else the command queued so the next call starts clean.
  while (query(":SYST:ERR?").rfind("0,", 0) != 0) {
  }
  std::string msg = comma == std::string::npos ? reply : reply.substr(comma + 1);
  if (msg.size() >= 2 && msg.front() == '"') msg = msg.substr(1, msg.size() - 2);
  throw Error(error_kind_for(c), line + ": " + std::to_string(c) + " " + msg);
}

double RemoteTestbed::query_number(const std::string& line) {
  const auto v = query_list(line);
  if (v.size() != 1) throw Error(ErrorKind::Io, line + ": expected one value");
  return v[0];
}

std::vector<double> RemoteTestbed::query_list(const std::string& line) {
  // The values and the error entry come back as `values;code,"msg"`. Values
  // carry no quotes, so the entry starts after the last ';' before `,"`.
  const std::string reply = query(line + ";:SYST:ERR?");
  const auto quote = reply.find(",\"");
  if (quote == std::string::npos) throw Error(ErrorKind::Io, line + ": unexpected reply: " + reply);
  const auto semi = reply.rfind(';', quote);
  const std::size_t err_at = semi == std::string::npos ? 0 : semi + 1;
  const int c = static_cast<int>(to_number(std::string_view(reply).substr(err_at, quote - err_at)));
  if (c != code::kNoError || semi == std::string::npos) {
    while (query(":SYST:ERR?").rfind("0,", 0) != 0) {
    }
    throw Error(c ? error_kind_for(c) : ErrorKind::Io, line + ": " + reply.substr(err_at));
  }
  std::vector<double> out;
  for (auto part : split(std::string_view(reply).substr(0, semi), ',')) out.push_back(to_number(part));
  return out;
}

void RemoteTestbed::reset() { command("*RST"); }

void RemoteTestbed::set_seed(std::uint64_t seed) { command(":SYST:SEED " + std::to_string(seed)); }

void RemoteTestbed::set_channel_percent(int n, double percent) {
  command(":SOUR:CHAN" + std::to_string(n) + ":INT " + format_number(percent));
}

double RemoteTestbed::channel_percent(int n) { return query_number(":SOUR:CHAN" + std::to_string(n) + ":INT?"); }

void RemoteTestbed::set_target(SpectralTarget target) {
  command(std::string(":SOUR:SPEC:TARG ") + (target == SpectralTarget::Am15g ? "AM15G" : "CUST"));
}

void RemoteTestbed::set_irradiance(double w_m2) { command(":SOUR:SPEC:IRR " + format_number(w_m2)); }

void RemoteTestbed::set_feedback(bool on) { command(std::string(":SOUR:CTRL:FEED ") + (on ? "ON" : "OFF")); }

void RemoteTestbed::advance(double dt_s) { command(":SYST:TIME:ADV " + format_number(dt_s)); }

double RemoteTestbed::now() { return query_number(":SYST:TIME?"); }

SpectrometerValues RemoteTestbed::read_spectrum() {
  const auto v = query_list(":MEAS:SPEC?");
  SpectrometerValues out{};
  if (v.size() != out.size()) throw Error(ErrorKind::Io, "MEAS:SPEC?: wrong channel count");
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

iec::BinFractions RemoteTestbed::read_bins() {
  const auto v = query_list(":MEAS:SPEC:BINS?");
  std::array<double, iec::kBinCount> b{};
  if (v.size() != b.size()) throw Error(ErrorKind::Io, "MEAS:SPEC:BINS?: wrong bin count");
  std::copy(v.begin(), v.end(), b.begin());
  return iec::BinFractions::unchecked(b);
}

LuxReading RemoteTestbed::read_illuminance(LuxRange range) {
  const double v = query_number(std::string(":MEAS:ILL? ") + (range == LuxRange::Low ? "LOW" : "HIGH"));
  if (v > kOverrangeThreshold) return {LuxStatus::Saturated, 0.0};
  if (v == 0.0) return {LuxStatus::BelowFloor, 0.0};
  return {LuxStatus::Ok, v};
}

double RemoteTestbed::read_dut_current() { return query_number(":MEAS:DUT:CURR?"); }

double RemoteTestbed::read_dut_temperature() { return query_number(":MEAS:DUT:TEMP?"); }

void RemoteTestbed::set_dut_temperature(double c) { command(":SYST:DUT:TEMP " + format_number(c)); }

void RemoteTestbed::set_door(DoorState state) {
  command(std::string(":SYST:DOOR ") + (state == DoorState::Open ? "OPEN" : "CLOS"));
}

std::vector<double> RemoteTestbed::scan(int grid_n) {
  auto v = query_list(":MEAS:SCAN? " + std::to_string(grid_n));
  if (v.size() != static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n)) {
    throw Error(ErrorKind::Io, "MEAS:SCAN?: wrong grid size");
  }
  return v;
}

}  // namespace solartb::scpi
