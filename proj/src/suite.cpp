#include "solartb/suite.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "solartb/error.hpp"
#include "solartb/format.hpp"

#ifndef SOLARTB_VERSION
#define SOLARTB_VERSION "0.0.0"
#endif

namespace solartb {

namespace {

using ojson = nlohmann::ordered_json;

std::string letter(iec::Grade g) { return std::string(1, iec::grade_letter(g)); }

ojson experiment_json(const ExperimentResult& r) {
  return ojson{{"metric_percent", r.metric.percent},
               {"class", letter(r.metric.grade)},
               {"feedback", r.feedback},
               {"seed", r.seed},
               {"level_w_m2", r.level_w_m2},
               {"samples", r.series.size()}};
}

template <class Fn>
void write_file(const std::filesystem::path& p, Fn&& fn) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  fn(out);
  if (!out) throw Error(ErrorKind::Io, "write failed: " + p.string());
}

}  // namespace

std::string tool_version() { return SOLARTB_VERSION; }

UniformityResult evaluate_uniformity(const std::vector<double>& grid, int grid_n) {
  if (grid_n < 2 || grid.size() != static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n)) {
    throw Error(ErrorKind::OutOfRange, "scan grid must be n x n with n >= 2");
  }
  UniformityResult u;
  u.grid_n = grid_n;
  double mean = 0.0;
  for (double v : grid) mean += v;
  mean /= static_cast<double>(grid.size());
  if (!(mean > 0.0)) throw Error(ErrorKind::EmptyOrNonPositive, "scan grid carries no irradiance");
  u.normalized.reserve(grid.size());
  for (double v : grid) u.normalized.push_back(v / mean);
  u.metric = iec::nonuniformity(u.normalized);

  // Odd grids leave the middle row out of both halves.
  const int half = grid_n / 2;
  double front = 0.0, rear = 0.0;
  for (int r = 0; r < half; ++r) {
    for (int c = 0; c < grid_n; ++c) {
      front += u.normalized[static_cast<std::size_t>(r * grid_n + c)];
      rear += u.normalized[static_cast<std::size_t>((grid_n - 1 - r) * grid_n + c)];
    }
  }
  u.front_mean = front / (half * grid_n);
  u.rear_mean = rear / (half * grid_n);
  return u;
}

iec::SpectralMatch combined_spectral(const std::vector<SpectralLevel>& levels) {
  if (levels.empty()) throw Error(ErrorKind::EmptyOrNonPositive, "no spectral levels");
  const iec::SpectralMatch* worst = &levels.front().match;
  for (const auto& l : levels) {
    const auto& m = l.match;
    const bool lower = static_cast<int>(m.grade) > static_cast<int>(worst->grade);
    if (lower || (m.grade == worst->grade && m.worst_deviation() > worst->worst_deviation())) worst = &m;
  }
  return *worst;
}

iec::ClassificationResult recompute_overall(const SuiteReport& r) {
  return iec::classify_overall(combined_spectral(r.spectral), r.uniformity.metric, r.sti_closed.metric,
                               r.lti.metric);
}

SuiteReport run_suite(TestbedPort& port, const SystemConfig& cfg, std::uint64_t seed) {
  const auto& e = cfg.experiments;
  SuiteReport r;
  r.seed = seed;
  r.config_hash = config_hash(cfg);
  r.version = tool_version();

  for (double level : kSuiteLevels) {
    port.reset();
    port.set_seed(seed);
    port.set_target(SpectralTarget::Am15g);
    port.set_irradiance(level);
    SpectralLevel s;
    s.level_w_m2 = level;
    s.fractions = port.read_bins();
    s.match = iec::spectral_match(s.fractions);
    r.spectral.push_back(std::move(s));
  }

  port.reset();
  port.set_seed(seed);
  port.set_target(SpectralTarget::Am15g);
  port.set_irradiance(e.scan_level_w_m2);
  r.uniformity = evaluate_uniformity(port.scan(e.scan_grid_n), e.scan_grid_n);

  r.sti_open = run_sti(port, sti_options(e, false), seed);
  r.sti_closed = run_sti(port, sti_options(e, true), seed);
  r.lti = run_lti(port, lti_options(e, true), seed);
  port.reset();

  r.overall = recompute_overall(r);
  return r;
}

std::string report_json(const SuiteReport& r) {
  ojson spectral = ojson::array();
  for (const auto& s : r.spectral) {
    spectral.push_back(ojson{{"level_w_m2", s.level_w_m2},
                             {"fractions_percent", s.fractions.values()},
                             {"ratios", s.match.ratios},
                             {"worst_ratio", s.match.worst_ratio},
                             {"class", letter(s.match.grade)}});
  }
  const auto& u = r.uniformity;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < u.grid_n; ++i) {
    const auto b = u.normalized.begin() + static_cast<std::ptrdiff_t>(i * u.grid_n);
    rows.emplace_back(b, b + u.grid_n);
  }
  const auto& o = r.overall;
  ojson j{
      {"schema", 1},
      {"spectral", spectral},
      {"uniformity",
       {{"grid_n", u.grid_n},
        {"normalized", rows},
        {"nonuniformity_percent", u.metric.percent},
        {"front_mean", u.front_mean},
        {"rear_mean", u.rear_mean},
        {"class", letter(u.metric.grade)}}},
      {"sti_open_loop", experiment_json(r.sti_open)},
      {"sti", experiment_json(r.sti_closed)},
      {"lti", experiment_json(r.lti)},
      {"overall",
       {{"verdict", o.verdict()},
        {"spectral", letter(o.spectral)},
        {"uniformity", letter(o.uniformity)},
        {"temporal", letter(o.temporal())},
        {"sti", letter(o.sti)},
        {"lti", letter(o.lti)},
        {"worst_ratio", o.worst_ratio},
        {"nonuniformity_percent", o.nonuniformity_pct},
        {"sti_percent", o.sti_pct},
        {"lti_percent", o.lti_pct}}},
      {"provenance", {{"config_hash", r.config_hash}, {"seed", r.seed}, {"version", r.version}}},
  };
  return j.dump(2) + "\n";
}

void write_report(const SuiteReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  write_file(dir / "report.json", [&](std::ostream& out) { out << report_json(r); });
  write_file(dir / "spectral.csv", [&](std::ostream& out) {
    out << "level_w_m2,bin,fraction_percent,ratio\n";
    for (const auto& s : r.spectral) {
      for (std::size_t b = 0; b < iec::kBinCount; ++b) {
        out << format_number(s.level_w_m2) << ',' << b + 1 << ',' << format_number(s.fractions[b]) << ','
            << format_number(s.match.ratios[b]) << '\n';
      }
    }
  });
  write_file(dir / "uniformity.csv", [&](std::ostream& out) {
    out << "row,col,normalized\n";
    const auto& u = r.uniformity;
    for (int i = 0; i < u.grid_n; ++i) {
      for (int c = 0; c < u.grid_n; ++c) {
        out << i << ',' << c << ',' << format_number(u.normalized[static_cast<std::size_t>(i * u.grid_n + c)])
            << '\n';
      }
    }
  });
  write_file(dir / "sti_open.csv", [&](std::ostream& out) { write_series_csv(out, r.sti_open); });
  write_file(dir / "sti_closed.csv", [&](std::ostream& out) { write_series_csv(out, r.sti_closed); });
  write_file(dir / "lti.csv", [&](std::ostream& out) { write_series_csv(out, r.lti); });
}

}  // namespace solartb
