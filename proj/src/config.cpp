#include "solartb/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "solartb/error.hpp"
#include "solartb/format.hpp"

namespace solartb {

using nlohmann::json;

void ExperimentSettings::validate() const {
  if (!(sti_cadence_s > 0.0) || !(sti_duration_s > 2.0 * sti_cadence_s)) {
    throw Error(ErrorKind::Config, "experiments: sti_duration_s must exceed 2 * sti_cadence_s > 0");
  }
  if (!(sti_settle_s >= 0.0)) throw Error(ErrorKind::Config, "experiments: sti_settle_s must be >= 0");
  if (lti_samples < 2 || !(lti_interval_s > 0.0)) {
    throw Error(ErrorKind::Config, "experiments: lti needs >= 2 samples and interval > 0");
  }
  if (scan_grid_n < 2) throw Error(ErrorKind::Config, "experiments: scan_grid_n must be >= 2");
  if (!(sti_level_w_m2 > 0.0) || !(lti_level_w_m2 > 0.0) || !(scan_level_w_m2 > 0.0)) {
    throw Error(ErrorKind::Config, "experiments: levels must be > 0");
  }
}

void SystemConfig::validate() const {
  if (board.size() != kChannelCount) throw Error(ErrorKind::Config, "board needs eight channels");
  chamber.validate();
  regulator.validate();
  experiments.validate();
}

namespace {

// Reads fields of one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorKind::Config, name_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(ErrorKind::Config, name_ + ": unknown key '" + k + "'");
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        if constexpr (std::is_same_v<T, double>) {
          if (!v->is_number()) throw Error(ErrorKind::Config, name_ + "." + key + ": expected a number");
        } else if constexpr (std::is_same_v<T, bool>) {
          if (!v->is_boolean()) throw Error(ErrorKind::Config, name_ + "." + key + ": expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
          if (!v->is_number_integer()) throw Error(ErrorKind::Config, name_ + "." + key + ": expected an integer");
        }
        out = v->get<T>();
      } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, name_ + "." + key + ": " + e.what());
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <std::size_t N>
void get_array(Section& s, const std::string& key, std::array<double, N>& out) {
  if (const json* v = s.find(key)) {
    if (!v->is_array() || v->size() != N) {
      throw Error(ErrorKind::Config, s.name() + "." + key + ": expected " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!(*v)[i].is_number()) throw Error(ErrorKind::Config, s.name() + "." + key + ": expected numbers");
      out[i] = (*v)[i].get<double>();
    }
  }
}

void read_lux(const json& j, const std::string& name, LuxSensorSpec& l) {
  Section s(j, name);
  s.get("min_lx", l.min_lx);
  s.get("max_lx", l.max_lx);
  s.get("noise_sigma", l.noise_sigma);
}

ChannelSet read_board_channels(const json& arr) {
  if (!arr.is_array()) throw Error(ErrorKind::Config, "board.channels: expected an array");
  std::vector<LedChannelSpec> out;
  for (const auto& c : arr) {
    Section s(c, "board.channels[]");
    std::string name;
    int count = 0;
    double lo = 0.0, hi = 0.0, tc = 0.0;
    s.get("name", name);
    s.get("led_count", count);
    s.get("irr_min_w_m2", lo);
    s.get("irr_max_w_m2", hi);
    s.get("temp_coeff_per_k", tc);
    std::vector<ShapeComponent> shape;
    if (const json* sh = s.find("shape")) {
      if (!sh->is_array()) throw Error(ErrorKind::Config, "board.channels[].shape: expected an array");
      for (const auto& comp : *sh) {
        Section cs(comp, "board.channels[].shape[]");
        ShapeComponent sc;
        cs.get("peak_nm", sc.peak_nm);
        cs.get("fwhm_nm", sc.fwhm_nm);
        cs.get("weight", sc.weight);
        shape.push_back(sc);
      }
    }
    try {
      out.emplace_back(name, count, shape, lo, hi, tc);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string("board.channels: ") + e.what());
    }
  }
  return ChannelSet(std::move(out));
}

json board_to_json(const SystemConfig& cfg) {
  json chans = json::array();
  for (const auto& c : cfg.board) {
    json shape = json::array();
    for (const auto& sc : c.shape()) {
      shape.push_back({{"peak_nm", sc.peak_nm}, {"fwhm_nm", sc.fwhm_nm}, {"weight", sc.weight}});
    }
    chans.push_back({{"name", c.name()},
                     {"led_count", c.led_count()},
                     {"shape", shape},
                     {"irr_min_w_m2", c.irr_min()},
                     {"irr_max_w_m2", c.irr_max()},
                     {"temp_coeff_per_k", c.temp_coeff_per_k()}});
  }
  return {{"board_temp_c", cfg.chamber.board_temp_c}, {"channels", chans}};
}

json lux_to_json(const LuxSensorSpec& l) {
  return {{"min_lx", l.min_lx}, {"max_lx", l.max_lx}, {"noise_sigma", l.noise_sigma}};
}

}  // namespace

SystemConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  SystemConfig cfg;
  {
    Section top(root, "config");
    if (const json* v = top.find("seed")) {
      if (!v->is_number_unsigned()) throw Error(ErrorKind::Config, "config.seed: expected an unsigned integer");
      cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = top.find("board")) {
      Section s(*v, "board");
      s.get("board_temp_c", cfg.chamber.board_temp_c);
      if (const json* c = s.find("channels")) cfg.board = read_board_channels(*c);
    }
    if (const json* v = top.find("geometry")) {
      auto& g = cfg.chamber.geometry;
      Section s(*v, "geometry");
      s.get("interior_w_mm", g.interior_w_mm);
      s.get("interior_d_mm", g.interior_d_mm);
      s.get("interior_h_mm", g.interior_h_mm);
      s.get("led_span_mm", g.led_span_mm);
      s.get("led_grid_n", g.led_grid_n);
      s.get("dut_plane_z_mm", g.dut_plane_z_mm);
      s.get("test_area_mm", g.test_area_mm);
      get_array(s, "wall_reflectance", g.wall_reflectance);
      s.get("door_reflectance", g.door_reflectance);
      s.get("door_fraction", g.door_fraction);
      if (const json* f = s.find("field_override"); f && !f->is_null()) {
        if (!f->is_array()) throw Error(ErrorKind::Config, "geometry.field_override: expected an array");
        std::vector<double> vals;
        for (const auto& row : *f) {
          if (row.is_array()) {
            for (const auto& x : row) {
              if (!x.is_number()) throw Error(ErrorKind::Config, "geometry.field_override: expected numbers");
              vals.push_back(x.get<double>());
            }
          } else if (row.is_number()) {
            vals.push_back(row.get<double>());
          } else {
            throw Error(ErrorKind::Config, "geometry.field_override: expected numbers");
          }
        }
        g.field_override = std::move(vals);
      }
    }
    if (const json* v = top.find("drift")) {
      auto& d = cfg.chamber.drift;
      Section s(*v, "drift");
      s.get("warmup_amplitude", d.warmup_amplitude);
      s.get("warmup_tau_s", d.warmup_tau_s);
      s.get("random_walk_sigma_per_sqrt_h", d.random_walk_sigma_per_sqrt_h);
      s.get("aging_slope_per_kh", d.aging_slope_per_kh);
      s.get("fluctuation_sigma", d.fluctuation_sigma);
      s.get("fluctuation_tau_s", d.fluctuation_tau_s);
    }
    if (const json* v = top.find("dut")) {
      auto& d = cfg.chamber.dut;
      Section s(*v, "dut");
      s.get("area_m2", d.area_m2);
      s.get("isc_temp_coeff_per_k", d.isc_temp_coeff_per_k);
      s.get("peltier_tau_s", cfg.chamber.peltier_tau_s);
      if (const json* r = s.find("responsivity")) {
        if (!r->is_array()) throw Error(ErrorKind::Config, "dut.responsivity: expected [[nm, A/W], ...]");
        d.responsivity.clear();
        for (const auto& p : *r) {
          if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(ErrorKind::Config, "dut.responsivity: expected [[nm, A/W], ...]");
          }
          d.responsivity.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
      }
    }
    if (const json* v = top.find("sensors")) {
      auto& ss = cfg.chamber.sensors;
      Section s(*v, "sensors");
      if (const json* sp = s.find("spectrometer")) {
        Section t(*sp, "sensors.spectrometer");
        get_array(t, "centers_nm", ss.spectrometer.centers_nm);
        get_array(t, "fwhm_nm", ss.spectrometer.fwhm_nm);
        t.get("noise_sigma", ss.spectrometer.noise_sigma);
        t.get("saturation_w_m2_nm", ss.spectrometer.saturation_w_m2_nm);
      }
      if (const json* l = s.find("lux_low")) read_lux(*l, "sensors.lux_low", ss.lux_low);
      if (const json* l = s.find("lux_high")) read_lux(*l, "sensors.lux_high", ss.lux_high);
      s.get("smu_noise_sigma", ss.smu_noise_sigma);
      s.get("temp_noise_sigma_c", ss.temp_noise_sigma_c);
      std::array<double, 2> pos{cfg.chamber.sensor_x_mm, cfg.chamber.sensor_y_mm};
      get_array(s, "position_mm", pos);
      cfg.chamber.sensor_x_mm = pos[0];
      cfg.chamber.sensor_y_mm = pos[1];
    }
    if (const json* v = top.find("regulator")) {
      auto& r = cfg.regulator;
      Section s(*v, "regulator");
      s.get("ki", r.ki);
      s.get("sample_period_s", r.sample_period_s);
      s.get("anti_windup", r.anti_windup);
      std::string mode;
      s.get("mode", mode);
      if (mode == "TOTAL") {
        r.mode = control::RegulatorMode::Total;
      } else if (mode == "PER_BIN") {
        r.mode = control::RegulatorMode::PerBin;
      } else if (!mode.empty()) {
        throw Error(ErrorKind::Config, "regulator.mode: expected TOTAL or PER_BIN");
      }
    }
    if (const json* v = top.find("experiments")) {
      auto& e = cfg.experiments;
      Section s(*v, "experiments");
      s.get("sti_level_w_m2", e.sti_level_w_m2);
      s.get("sti_duration_s", e.sti_duration_s);
      s.get("sti_cadence_s", e.sti_cadence_s);
      s.get("sti_settle_s", e.sti_settle_s);
      s.get("lti_level_w_m2", e.lti_level_w_m2);
      s.get("lti_samples", e.lti_samples);
      s.get("lti_interval_s", e.lti_interval_s);
      s.get("scan_grid_n", e.scan_grid_n);
      s.get("scan_level_w_m2", e.scan_level_w_m2);
    }
    if (const json* v = top.find("custom_target"); v && !v->is_null()) {
      std::array<double, iec::kBinCount> f{};
      if (!v->is_array() || v->size() != iec::kBinCount) {
        throw Error(ErrorKind::Config, "custom_target: expected six percentages");
      }
      for (std::size_t i = 0; i < iec::kBinCount; ++i) {
        if (!(*v)[i].is_number()) throw Error(ErrorKind::Config, "custom_target: expected numbers");
        f[i] = (*v)[i].get<double>();
      }
      try {
        cfg.custom_target = iec::BinFractions(f);
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, std::string("custom_target: ") + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const SystemConfig& cfg, int indent) {
  const auto& ch = cfg.chamber;
  const auto& g = ch.geometry;
  json geometry = {{"interior_w_mm", g.interior_w_mm},
                   {"interior_d_mm", g.interior_d_mm},
                   {"interior_h_mm", g.interior_h_mm},
                   {"led_span_mm", g.led_span_mm},
                   {"led_grid_n", g.led_grid_n},
                   {"dut_plane_z_mm", g.dut_plane_z_mm},
                   {"test_area_mm", g.test_area_mm},
                   {"wall_reflectance", g.wall_reflectance},
                   {"door_reflectance", g.door_reflectance},
                   {"door_fraction", g.door_fraction},
                   {"field_override", g.field_override ? json(*g.field_override) : json(nullptr)}};
  const auto& d = ch.drift;
  json drift = {{"warmup_amplitude", d.warmup_amplitude},
                {"warmup_tau_s", d.warmup_tau_s},
                {"random_walk_sigma_per_sqrt_h", d.random_walk_sigma_per_sqrt_h},
                {"aging_slope_per_kh", d.aging_slope_per_kh},
                {"fluctuation_sigma", d.fluctuation_sigma},
                {"fluctuation_tau_s", d.fluctuation_tau_s}};
  json resp = json::array();
  for (const auto& [wl, a] : ch.dut.responsivity) resp.push_back({wl, a});
  json dut = {{"area_m2", ch.dut.area_m2},
              {"responsivity", resp},
              {"isc_temp_coeff_per_k", ch.dut.isc_temp_coeff_per_k},
              {"peltier_tau_s", ch.peltier_tau_s}};
  const auto& ss = ch.sensors;
  json sensors = {{"spectrometer",
                   {{"centers_nm", ss.spectrometer.centers_nm},
                    {"fwhm_nm", ss.spectrometer.fwhm_nm},
                    {"noise_sigma", ss.spectrometer.noise_sigma},
                    {"saturation_w_m2_nm", ss.spectrometer.saturation_w_m2_nm}}},
                  {"lux_low", lux_to_json(ss.lux_low)},
                  {"lux_high", lux_to_json(ss.lux_high)},
                  {"smu_noise_sigma", ss.smu_noise_sigma},
                  {"temp_noise_sigma_c", ss.temp_noise_sigma_c},
                  {"position_mm", {ch.sensor_x_mm, ch.sensor_y_mm}}};
  const auto& r = cfg.regulator;
  json regulator = {{"ki", r.ki},
                    {"sample_period_s", r.sample_period_s},
                    {"mode", r.mode == control::RegulatorMode::Total ? "TOTAL" : "PER_BIN"},
                    {"anti_windup", r.anti_windup}};
  const auto& e = cfg.experiments;
  json experiments = {{"sti_level_w_m2", e.sti_level_w_m2}, {"sti_duration_s", e.sti_duration_s},
                      {"sti_cadence_s", e.sti_cadence_s},   {"sti_settle_s", e.sti_settle_s},
                      {"lti_level_w_m2", e.lti_level_w_m2}, {"lti_samples", e.lti_samples},
                      {"lti_interval_s", e.lti_interval_s}, {"scan_grid_n", e.scan_grid_n},
                      {"scan_level_w_m2", e.scan_level_w_m2}};
  json root = {{"seed", cfg.seed},
               {"board", board_to_json(cfg)},
               {"geometry", geometry},
               {"drift", drift},
               {"dut", dut},
               {"sensors", sensors},
               {"regulator", regulator},
               {"experiments", experiments},
               {"custom_target", cfg.custom_target ? json(cfg.custom_target->values()) : json(nullptr)}};
  return root.dump(indent);
}

void save_config(const std::filesystem::path& path, const SystemConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write config file " + path.string());
  out << config_to_json(cfg, 2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing config file " + path.string());
}

std::string config_hash(const SystemConfig& cfg) { return hex64(fnv1a64(config_to_json(cfg))); }

}  // namespace solartb
