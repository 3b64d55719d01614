#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "solartb/error.hpp"
#include "solartb/server.hpp"
#include "solartb/suite.hpp"

using namespace solartb;
using namespace solartb::scpi;

namespace {

// Minimal blocking line client to check exact bytes on the wire.
class RawClient {
 public:
  explicit RawClient(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &a.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0) throw std::runtime_error("connect");
  }
  ~RawClient() { ::close(fd_); }
  void send(const std::string& s) { ASSERT_EQ(::send(fd_, s.data(), s.size(), 0), static_cast<ssize_t>(s.size())); }
  std::string line() {
    std::size_t nl;
    char buf[1024];
    while ((nl = buf_.find('\n')) == std::string::npos) {
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n <= 0) return "<closed>";
      buf_.append(buf, static_cast<std::size_t>(n));
    }
    std::string out = buf_.substr(0, nl + 1);
    buf_.erase(0, nl + 1);
    return out;
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

class ServerTest : public ::testing::Test {
 protected:
  ServerTest() : tb_(SystemConfig{}), inst_(tb_), server_(inst_, options()) { port_ = server_.start(); }

  static ServerOptions options() {
    ServerOptions o;
    o.port = 0;
    return o;
  }

  Testbed tb_;
  Instrument inst_;
  Server server_;
  std::uint16_t port_ = 0;
};

}  // namespace

TEST_F(ServerTest, ExactWireBytes) {
  RawClient c(port_);
  c.send("*IDN?\n");
  EXPECT_EQ(c.line(), "ETHZ-PBL,SOLARTB-SIM,0,1.0.0\n");
  c.send("SYST:ERR?\r\n");
  EXPECT_EQ(c.line(), "0,\"No error\"\n");
  c.send("SOUR:CHAN1:INT 150\nSYST:TIME:ADV 2.5\nSYST:TIME?;:SYST:ERR?\n");
  EXPECT_EQ(c.line(), "2.5;-222,\"Data out of range; intensity must be within 0-100 %\"\n");
}

TEST_F(ServerTest, OverlongLineQueuesError) {
  RawClient c(port_);
  c.send(std::string(10000, 'A') + "\n*OPC?\n");
  EXPECT_EQ(c.line(), "1\n");
  c.send("SYST:ERR?\n");
  EXPECT_EQ(c.line(), "-223,\"Too much data\"\n");
}

TEST_F(ServerTest, ClientsGetTheirOwnAnswersInOrder) {
  auto worker = [this](int id, std::vector<std::string>* got) {
    RawClient c(port_);
    for (int i = 0; i < 50; ++i) {
      // A query whose answer identifies this client.
      c.send("SOUR:CHAN" + std::to_string(id) + ":INT " + std::to_string(i) + ";INT?\n");
      got->push_back(c.line());
    }
  };
  std::vector<std::string> a, b;
  std::thread ta(worker, 1, &a), tb(worker, 2, &b);
  ta.join();
  tb.join();
  ASSERT_EQ(a.size(), 50u);
  ASSERT_EQ(b.size(), 50u);
  for (int i = 0; i < 50; ++i) {
    EXPECT_NEAR(std::stod(a[static_cast<std::size_t>(i)]), i, 1e-2);
    EXPECT_NEAR(std::stod(b[static_cast<std::size_t>(i)]), i, 1e-2);
  }
}

TEST_F(ServerTest, RemoteTestbedMapsErrors) {
  RemoteTestbed r("127.0.0.1", port_);
  EXPECT_EQ(r.identity(), kIdentity);
  r.set_irradiance(500.0);
  EXPECT_EQ(r.read_spectrum().size(), 18u);
  EXPECT_EQ(iec::spectral_match(r.read_bins()).grade, iec::Grade::A);
  try {
    r.set_channel_percent(1, 150.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
  try {
    r.set_target(SpectralTarget::Custom);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  // The queue is clean after a raised error.
  EXPECT_EQ(r.query("SYST:ERR?"), "0,\"No error\"");
  r.set_door(DoorState::Open);
  EXPECT_EQ(r.read_illuminance(LuxRange::Low).status, LuxStatus::BelowFloor);
  r.set_door(DoorState::Closed);
  EXPECT_THROW(r.scan(1), Error);
  EXPECT_EQ(r.query("SYST:ERR?"), "0,\"No error\"");
}

TEST_F(ServerTest, RemoteSuiteMatchesInProcess) {
  SystemConfig cfg;
  cfg.experiments.lti_samples = 10;
  cfg.experiments.sti_duration_s = 20.0;
  RemoteTestbed remote("127.0.0.1", port_);
  Testbed local(SystemConfig{});
  const auto a = run_suite(remote, cfg, 5);
  const auto b = run_suite(local, cfg, 5);
  EXPECT_EQ(report_json(a), report_json(b));
}

TEST(ServerStandalone, StopIsIdempotentAndPortIsReleased) {
  Testbed tb(SystemConfig{});
  Instrument inst(tb);
  ServerOptions o;
  o.port = 0;
  std::uint16_t port = 0;
  {
    Server s(inst, o);
    port = s.start();
    s.stop();
    s.stop();
  }
  o.port = port;
  Server again(inst, o);
  EXPECT_EQ(again.start(), port);
}

TEST(ServerStandalone, FreeRunAdvancesClock) {
  Testbed tb(SystemConfig{});
  Instrument inst(tb);
  ServerOptions o;
  o.port = 0;
  o.free_run = true;
  o.tick_s = 0.01;
  tb.chamber().clock().set_scale(100.0);
  Server s(inst, o);
  RawClient c(s.start());
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  c.send("SYST:TIME?\n");
  EXPECT_GT(std::stod(c.line()), 1.0);
}
