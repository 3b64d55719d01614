// solartb: evaluation runner and SCPI server for the testbed simulator.
//
// Exit codes: 0 success (class AAA / class A), 1 evaluation below target,
// 2 usage, 3 IO or configuration error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "solartb/error.hpp"
#include "solartb/format.hpp"
#include "solartb/server.hpp"
#include "solartb/suite.hpp"

namespace {

using namespace solartb;

constexpr int kExitOk = 0;
constexpr int kExitBelowTarget = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string remote;
};

SystemConfig load(const Globals& g) {
  SystemConfig cfg = g.config_path.empty() ? SystemConfig{} : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::unique_ptr<TestbedPort> open_port(const Globals& g, const SystemConfig& cfg) {
  if (g.remote.empty()) return std::make_unique<Testbed>(cfg);
  const auto colon = g.remote.rfind(':');
  std::string host = g.remote;
  std::uint64_t port = scpi::kDefaultPort;
  if (colon != std::string::npos) {
    host = g.remote.substr(0, colon);
    if (!parse_u64(g.remote.substr(colon + 1), port) || port == 0 || port > 65535) {
      throw CLI::ValidationError("--remote", "expected host:port");
    }
  }
  return std::make_unique<scpi::RemoteTestbed>(host, static_cast<std::uint16_t>(port));
}

void write_text(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(g.out_dir, ec);
  const auto p = std::filesystem::path(g.out_dir) / name;
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorKind::Io, "cannot write " + p.string());
}

std::string letter(iec::Grade gr) { return std::string(1, iec::grade_letter(gr)); }

int cmd_classify(const Globals& g) {
  const SystemConfig cfg = load(g);
  auto port = open_port(g, cfg);
  const SuiteReport r = run_suite(*port, cfg, cfg.seed);
  if (!g.out_dir.empty()) write_report(r, g.out_dir);
  const auto& o = r.overall;
  std::cout << "spectral     " << letter(o.spectral) << "  worst ratio " << format_number(o.worst_ratio) << '\n'
            << "uniformity   " << letter(o.uniformity) << "  " << format_number(o.nonuniformity_pct) << " %\n"
            << "sti          " << letter(o.sti) << "  " << format_number(o.sti_pct) << " % (open loop "
            << format_number(r.sti_open.metric.percent) << " %)\n"
            << "lti          " << letter(o.lti) << "  " << format_number(o.lti_pct) << " %\n"
            << "overall      " << o.verdict() << '\n';
  return o.verdict() == "AAA" ? kExitOk : kExitBelowTarget;
}

int cmd_scan(const Globals& g, int grid_n) {
  const SystemConfig cfg = load(g);
  auto port = open_port(g, cfg);
  port->reset();
  port->set_seed(cfg.seed);
  port->set_target(SpectralTarget::Am15g);
  port->set_irradiance(cfg.experiments.scan_level_w_m2);
  const auto u = evaluate_uniformity(port->scan(grid_n), grid_n);
  std::string csv = "row,col,normalized\n";
  for (int r = 0; r < grid_n; ++r) {
    for (int c = 0; c < grid_n; ++c) {
      csv += std::to_string(r) + "," + std::to_string(c) + "," +
             format_number(u.normalized[static_cast<std::size_t>(r * grid_n + c)]) + "\n";
    }
  }
  write_text(g, "scan.csv", csv);
  std::cout << "grid " << grid_n << "x" << grid_n << ", nonuniformity " << format_number(u.metric.percent)
            << " %, class " << letter(u.metric.grade) << '\n'
            << "front mean " << format_number(u.front_mean) << ", rear mean " << format_number(u.rear_mean) << '\n';
  return u.metric.grade == iec::Grade::A ? kExitOk : kExitBelowTarget;
}

int cmd_fit(const Globals& g, const std::string& target, double level) {
  const SystemConfig cfg = load(g);
  fit::FitProblem p;
  if (target == "AM15G" || target == "am15g") {
    p.target = iec::am15g_reference();
  } else {
    p.target = read_spectrum_csv(std::filesystem::path(target));
  }
  p.total_irradiance_w_m2 = level;
  p.board_temp_c = cfg.chamber.board_temp_c;
  const auto r = fit::fit_duties(p, cfg.board);

  char buf[32];
  nlohmann::ordered_json j{{"schema", 1}, {"target", target}, {"level_w_m2", level}};
  std::cout << "channel  duty %\n";
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    std::snprintf(buf, sizeof buf, "%.4f", r.duties[i] * 100.0);
    std::cout << cfg.board[i].name() << "  " << buf << '\n';
  }
  std::cout << "ratios  ";
  for (std::size_t b = 0; b < iec::kBinCount; ++b) {
    std::snprintf(buf, sizeof buf, "%.4f", r.ratios[b]);
    std::cout << (b ? " " : "") << buf;
  }
  std::cout << "\nclass   " << letter(r.achieved_class) << "  (" << r.iterations << " iterations)\n";

  std::vector<double> pct;
  for (double d : r.duties) pct.push_back(d * 100.0);
  j["duties_percent"] = pct;
  j["powers_w_m2"] = r.powers_w_m2;
  j["ratios"] = r.ratios;
  j["class"] = letter(r.achieved_class);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  write_text(g, "fit.json", j.dump(2) + "\n");
  return r.achieved_class == iec::Grade::A ? kExitOk : kExitBelowTarget;
}

int report_experiment(const Globals& g, const SystemConfig& cfg, const ExperimentResult& r, const char* name) {
  if (!g.out_dir.empty()) {
    std::ostringstream csv;
    write_series_csv(csv, r);
    write_text(g, std::string(name) + ".csv", csv.str());
    write_text(g, std::string(name) + ".json", result_json(r, config_hash(cfg)) + "\n");
  }
  std::cout << name << " " << format_number(r.metric.percent) << " % over " << r.series.size()
            << " samples, feedback " << (r.feedback ? "on" : "off") << ", class " << letter(r.metric.grade) << '\n';
  return r.metric.grade == iec::Grade::A ? kExitOk : kExitBelowTarget;
}

int cmd_sti(const Globals& g, std::optional<bool> feedback, std::optional<double> cadence,
            std::optional<double> duration) {
  const SystemConfig cfg = load(g);
  StiOptions o = sti_options(cfg.experiments, feedback.value_or(false));
  if (cadence) o.cadence_s = *cadence;
  if (duration) o.duration_s = *duration;
  if (!(o.duration_s > 2.0 * o.cadence_s)) throw CLI::ValidationError("--duration", "must exceed 2 * cadence");
  auto port = open_port(g, cfg);
  return report_experiment(g, cfg, run_sti(*port, o, cfg.seed), "sti");
}

int cmd_lti(const Globals& g, std::optional<bool> feedback, std::optional<int> samples,
            std::optional<double> interval) {
  const SystemConfig cfg = load(g);
  LtiOptions o = lti_options(cfg.experiments, feedback.value_or(true));
  if (samples) o.samples = *samples;
  if (interval) o.interval_s = *interval;
  auto port = open_port(g, cfg);
  return report_experiment(g, cfg, run_lti(*port, o, cfg.seed), "lti");
}

int cmd_export_spectrum(const Globals& g, double level, const std::vector<double>& duties_pct) {
  const SystemConfig cfg = load(g);
  std::array<double, kChannelCount> powers{};
  if (!duties_pct.empty()) {
    if (duties_pct.size() != kChannelCount) throw CLI::ValidationError("--duties", "expected 8 values");
    for (std::size_t i = 0; i < kChannelCount; ++i) {
      if (!(duties_pct[i] >= 0.0 && duties_pct[i] <= 100.0)) throw CLI::ValidationError("--duties", "0-100 %");
      powers[i] = channel_irradiance(cfg.board[i], duties_pct[i] / 100.0, cfg.chamber.board_temp_c);
    }
  } else {
    const fit::Am15gPreset preset(cfg.board);
    const auto d = preset.duties(level);
    for (std::size_t i = 0; i < kChannelCount; ++i) {
      powers[i] = channel_irradiance(cfg.board[i], d[i], cfg.chamber.board_temp_c);
    }
  }
  const Spectrum s = board_spectrum(cfg.board, powers);
  std::ostringstream csv;
  write_spectrum_csv(csv, s);
  if (g.out_dir.empty()) {
    std::cout << csv.str();
  } else {
    write_text(g, "spectrum.csv", csv.str());
    std::cout << "wrote " << (std::filesystem::path(g.out_dir) / "spectrum.csv").string() << ", total "
              << format_number(s.total()) << " W/m2\n";
  }
  return kExitOk;
}

int cmd_serve(const Globals& g, const std::string& bind, std::uint16_t port, bool stdio, bool free_run,
              std::optional<double> scale) {
  const SystemConfig cfg = load(g);
  Testbed tb(cfg);
  if (scale) tb.chamber().clock().set_scale(*scale);
  scpi::Instrument inst(tb, [g] { return load(g); });
  if (stdio) {
    scpi::serve_stream(inst, std::cin, std::cout);
    return kExitOk;
  }

  // Handle SIGINT/SIGTERM synchronously; threads inherit the blocked mask.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  scpi::ServerOptions opts;
  opts.bind_address = bind;
  opts.port = port;
  opts.free_run = free_run;
  scpi::Server server(inst, opts);
  const auto bound = server.start();
  std::cout << "listening on " << bind << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::InvalidSpectrum:
    case ErrorKind::DomainTooNarrow:
      return kExitIo;
    case ErrorKind::Unachievable:
      return kExitBelowTarget;
    default:
      return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LED solar simulator testbed: evaluation suite, fitting and SCPI server"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", tool_version());

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--out", g.out_dir, "output directory for reports and CSV files");
  app.add_option("--remote", g.remote, "drive a running server at host:port instead of an in-process twin");

  auto* classify = app.add_subcommand("classify", "run the full IEC 60904-9 evaluation");

  int grid_n = 8;
  auto* scan = app.add_subcommand("scan", "spatial uniformity scan of the test area");
  scan->add_option("--grid", grid_n, "grid size n (n x n)")->check(CLI::Range(2, 64));

  std::string fit_target;
  double fit_level = 0.0;
  auto* fitcmd = app.add_subcommand("fit", "fit channel duties to a target spectrum");
  fitcmd->add_option("target", fit_target, "AM15G or a spectrum CSV file")->required();
  fitcmd->add_option("level", fit_level, "total irradiance, W/m2")->required()->check(CLI::PositiveNumber);

  std::map<std::string, bool> onoff{{"on", true}, {"off", false}};
  std::optional<bool> sti_fb, lti_fb;
  std::optional<double> cadence, duration, interval;
  std::optional<int> samples;
  auto* sti = app.add_subcommand("sti", "short-term instability run");
  sti->add_option("--feedback", sti_fb, "on|off (default off)")->transform(CLI::CheckedTransformer(onoff));
  sti->add_option("--cadence", cadence, "sampling cadence, s")->check(CLI::PositiveNumber);
  sti->add_option("--duration", duration, "window length, s")->check(CLI::PositiveNumber);

  auto* lti = app.add_subcommand("lti", "long-term instability run");
  lti->add_option("--feedback", lti_fb, "on|off (default on)")->transform(CLI::CheckedTransformer(onoff));
  lti->add_option("--samples", samples, "number of samples")->check(CLI::Range(2, 1000000));
  lti->add_option("--interval", interval, "sampling interval, s")->check(CLI::PositiveNumber);

  std::string bind = "127.0.0.1";
  std::uint16_t port = scpi::kDefaultPort;
  bool stdio = false, free_run = false;
  std::optional<double> scale;
  auto* serve = app.add_subcommand("serve", "SCPI server over TCP or stdio");
  serve->add_option("--bind", bind, "bind address");
  serve->add_option("--port", port, "TCP port, 0 for any");
  serve->add_flag("--stdio", stdio, "read commands from stdin instead of TCP");
  serve->add_flag("--free-run", free_run, "advance virtual time with wall time");
  serve->add_option("--time-scale", scale, "virtual seconds per wall second")->check(CLI::PositiveNumber);

  double export_level = 500.0;
  std::vector<double> export_duties;
  auto* exp = app.add_subcommand("export-spectrum", "write the board spectrum as CSV");
  auto* level_opt = exp->add_option("--level", export_level, "AM1.5G preset level, W/m2")->check(CLI::PositiveNumber);
  exp->add_option("--duties", export_duties, "eight channel duties, percent")->delimiter(',')->excludes(level_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*classify) return cmd_classify(g);
    if (*scan) return cmd_scan(g, grid_n);
    if (*fitcmd) return cmd_fit(g, fit_target, fit_level);
    if (*sti) return cmd_sti(g, sti_fb, cadence, duration);
    if (*lti) return cmd_lti(g, lti_fb, samples, interval);
    if (*serve) return cmd_serve(g, bind, port, stdio, free_run, scale);
    if (*exp) return cmd_export_spectrum(g, export_level, export_duties);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
