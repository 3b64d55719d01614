#include "solartb/instrument.hpp"

#include <cctype>
#include <cmath>

#include "solartb/error.hpp"
#include "solartb/format.hpp"

namespace solartb::scpi {

namespace {

enum class Op {
  None,
  Idn,
  Rst,
  Opc,
  Cls,
  ChanInt,
  ChanIntQ,
  Target,
  TargetQ,
  Irr,
  IrrQ,
  Feed,
  FeedQ,
  MeasSpec,
  MeasBins,
  MeasIll,
  MeasCurr,
  MeasTemp,
  MeasScan,
  DutTemp,
  DutTempQ,
  DutPos,
  DutPosQ,
  TimeQ,
  TimeAdv,
  TimeScal,
  TimeScalQ,
  Door,
  DoorQ,
  ErrQ,
  Seed,
  SeedQ,
};

struct Node {
  std::string long_form;
  std::string alias;
  bool suffix = false;
  Op set = Op::None;
  Op query = Op::None;
  std::vector<Node> children;
};

std::string short_form(const std::string& long_form) {
  std::string s;
  for (char c : long_form) {
    if (std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c))) s.push_back(c);
  }
  return s;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

bool matches_keyword(const std::string& long_form, const std::string& typed_upper) {
  return typed_upper == short_form(long_form) || typed_upper == upper(long_form);
}

bool matches(const Node& n, const Mnemonic& m) {
  if (m.suffix && !n.suffix) return false;
  return matches_keyword(n.long_form, m.text) || (!n.alias.empty() && matches_keyword(n.alias, m.text));
}

const Node& tree() {
  static const Node root = [] {
    Node r;
    r.children = {
        Node{"SOURce", "", false, Op::None, Op::None,
             {
                 Node{"CHANnel", "", true, Op::None, Op::None,
                      {Node{"INTensity", "", false, Op::ChanInt, Op::ChanIntQ, {}}}},
                 Node{"SPECtrum", "", false, Op::None, Op::None,
                      {Node{"TARGet", "", false, Op::Target, Op::TargetQ, {}},
                       Node{"IRRadiance", "", false, Op::Irr, Op::IrrQ, {}}}},
                 Node{"CTRL", "CONTrol", false, Op::None, Op::None,
                      {Node{"FEEDback", "", false, Op::Feed, Op::FeedQ, {}}}},
             }},
        Node{"MEASure", "", false, Op::None, Op::None,
             {
                 Node{"SPECtrum", "", false, Op::None, Op::MeasSpec,
                      {Node{"BINS", "", false, Op::None, Op::MeasBins, {}}}},
                 Node{"ILLuminance", "", false, Op::None, Op::MeasIll, {}},
                 Node{"DUT", "", false, Op::None, Op::None,
                      {Node{"CURRent", "", false, Op::None, Op::MeasCurr, {}},
                       Node{"TEMPerature", "", false, Op::None, Op::MeasTemp, {}}}},
                 Node{"SCAN", "", false, Op::None, Op::MeasScan, {}},
             }},
        Node{"SYSTem", "", false, Op::None, Op::None,
             {
                 Node{"DUT", "", false, Op::None, Op::None,
                      {Node{"TEMPerature", "", false, Op::DutTemp, Op::DutTempQ, {}},
                       Node{"POSition", "", false, Op::DutPos, Op::DutPosQ, {}}}},
                 Node{"TIME", "", false, Op::None, Op::TimeQ,
                      {Node{"ADVance", "", false, Op::TimeAdv, Op::None, {}},
                       Node{"SCALe", "", false, Op::TimeScal, Op::TimeScalQ, {}}}},
                 Node{"DOOR", "", false, Op::Door, Op::DoorQ, {}},
                 Node{"ERRor", "", false, Op::None, Op::ErrQ, {}},
                 Node{"SEED", "", false, Op::Seed, Op::SeedQ, {}},
             }},
    };
    return r;
  }();
  return root;
}

const Node* lookup(const std::vector<Mnemonic>& header) {
  const Node* n = &tree();
  for (const auto& m : header) {
    const Node* next = nullptr;
    for (const auto& c : n->children) {
      if (matches(c, m)) {
        next = &c;
        break;
      }
    }
    if (!next) return nullptr;
    n = next;
  }
  return n == &tree() ? nullptr : n;
}

Op common_op(const Command& cmd) {
  const std::string& h = cmd.header.front().text;
  if (h == "IDN" && cmd.query) return Op::Idn;
  if (h == "RST" && !cmd.query) return Op::Rst;
  if (h == "OPC" && cmd.query) return Op::Opc;
  if (h == "CLS" && !cmd.query) return Op::Cls;
  return Op::None;
}

// Thrown inside handlers, turned into an error-queue entry.
struct Fail {
  int code;
  std::string detail;
};

void arg_count(const Command& c, std::size_t lo, std::size_t hi) {
  if (c.args.size() < lo) throw Fail{code::kMissingParameter, {}};
  if (c.args.size() > hi) throw Fail{code::kParameterNotAllowed, {}};
}

double number_arg(const Command& c, std::size_t i) {
  const auto& a = c.args[i];
  if (a.kind != Argument::Kind::Number) throw Fail{code::kDataTypeError, {}};
  return a.number;
}

/// Index into `options` (long forms) of the token argument.
std::size_t choice_arg(const Command& c, std::size_t i, std::initializer_list<const char*> options) {
  const auto& a = c.args[i];
  if (a.kind != Argument::Kind::Token) throw Fail{code::kDataTypeError, {}};
  std::size_t k = 0;
  for (const char* o : options) {
    if (matches_keyword(o, a.text)) return k;
    ++k;
  }
  throw Fail{code::kDataTypeError, {}};
}

bool bool_arg(const Command& c, std::size_t i) {
  const auto& a = c.args[i];
  if (a.kind == Argument::Kind::Number) {
    if (a.number == 0.0) return false;
    if (a.number == 1.0) return true;
    throw Fail{code::kDataOutOfRange, {}};
  }
  return choice_arg(c, i, {"ON", "OFF"}) == 0;
}

std::string join(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s.push_back(',');
    s += format_number(v[i]);
  }
  return s;
}

constexpr double kMaxAdvanceS = 1e7;
// SCPI overrange marker.
constexpr const char* kOverrange = "9.9E37";

}  // namespace

bool header_exists(const std::vector<Mnemonic>& header) { return lookup(header) != nullptr; }

void resolve_paths(std::vector<Unit>& units) {
  std::vector<Mnemonic> path;
  for (auto& u : units) {
    auto* cmd = std::get_if<Command>(&u);
    if (!cmd || cmd->common) continue;
    if (!cmd->absolute) {
      for (std::size_t k = path.size() + 1; k-- > 0;) {
        std::vector<Mnemonic> cand(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(k));
        cand.insert(cand.end(), cmd->header.begin(), cmd->header.end());
        if (lookup(cand)) {
          cmd->header = std::move(cand);
          break;
        }
      }
    }
    cmd->absolute = true;
    path.assign(cmd->header.begin(), cmd->header.end() - 1);
  }
}

Instrument::Instrument(Testbed& testbed, Reload reload)
    : tb_(testbed), reload_(std::move(reload)), seed_(testbed.config().seed) {}

std::optional<std::string> Instrument::execute(std::string_view line) {
  auto units = parse_line(line);
  resolve_paths(units);
  std::optional<std::string> out;
  for (const auto& u : units) {
    if (const auto* e = std::get_if<ParseError>(&u)) {
      errors_.push(e->code, e->message);
      continue;
    }
    if (auto r = dispatch(std::get<Command>(u))) {
      if (out) {
        out->push_back(';');
        *out += *r;
      } else {
        out = std::move(r);
      }
    }
  }
  return out;
}

void Instrument::free_run(double wall_elapsed_s) {
  const double dt = wall_elapsed_s * tb_.chamber().clock().scale();
  if (dt > 0.0) tb_.advance(dt);
}

std::optional<std::string> Instrument::dispatch(const Command& c) {
  Op op = Op::None;
  int channel = 1;
  if (c.common) {
    op = common_op(c);
  } else if (const Node* n = lookup(c.header)) {
    op = c.query ? n->query : n->set;
    for (std::size_t i = 0; i < c.header.size(); ++i) {
      if (c.header[i].suffix) channel = *c.header[i].suffix;
    }
  }
  if (op == Op::None) {
    errors_.push(code::kUndefinedHeader, error_text(code::kUndefinedHeader));
    return std::nullopt;
  }

  try {
    switch (op) {
      case Op::Idn:
        arg_count(c, 0, 0);
        return std::string(kIdentity);
      case Op::Rst:
        arg_count(c, 0, 0);
        if (reload_) {
          try {
            tb_.reconfigure(reload_());
          } catch (const std::exception& e) {
            tb_.reset();
            throw Fail{code::kSystemError, std::string("config reload failed: ") + e.what()};
          }
        } else {
          tb_.reset();
        }
        seed_ = tb_.config().seed;
        return std::nullopt;
      case Op::Opc:
        arg_count(c, 0, 0);
        return std::string("1");
      case Op::Cls:
        arg_count(c, 0, 0);
        errors_.clear();
        return std::nullopt;
      case Op::ChanInt: {
        arg_count(c, 1, 1);
        if (channel < 1 || channel > static_cast<int>(kChannelCount)) throw Fail{code::kSuffixOutOfRange, {}};
        const double pct = number_arg(c, 0);
        if (!(pct >= 0.0 && pct <= 100.0)) throw Fail{code::kDataOutOfRange, "intensity must be within 0-100 %"};
        tb_.set_channel_percent(channel, pct);
        return std::nullopt;
      }
      case Op::ChanIntQ:
        arg_count(c, 0, 0);
        if (channel < 1 || channel > static_cast<int>(kChannelCount)) throw Fail{code::kSuffixOutOfRange, {}};
        return format_number(tb_.channel_percent(channel));
      case Op::Target:
        arg_count(c, 1, 1);
        tb_.set_target(choice_arg(c, 0, {"AM15G", "CUSTom"}) == 0 ? SpectralTarget::Am15g : SpectralTarget::Custom);
        return std::nullopt;
      case Op::TargetQ:
        arg_count(c, 0, 0);
        return std::string(tb_.target() == SpectralTarget::Am15g ? "AM15G" : "CUST");
      case Op::Irr:
        arg_count(c, 1, 1);
        tb_.set_irradiance(number_arg(c, 0));
        return std::nullopt;
      case Op::IrrQ:
        arg_count(c, 0, 0);
        return format_number(tb_.irradiance_setting().value_or(0.0));
      case Op::Feed:
        arg_count(c, 1, 1);
        tb_.set_feedback(bool_arg(c, 0));
        return std::nullopt;
      case Op::FeedQ:
        arg_count(c, 0, 0);
        return std::string(tb_.feedback() ? "1" : "0");
      case Op::MeasSpec: {
        arg_count(c, 0, 0);
        const auto v = tb_.read_spectrum();
        return join(v.data(), v.size());
      }
      case Op::MeasBins: {
        arg_count(c, 0, 0);
        const auto b = tb_.read_bins();
        return join(b.values().data(), b.values().size());
      }
      case Op::MeasIll: {
        arg_count(c, 0, 1);
        LuxRange range = LuxRange::Low;
        if (!c.args.empty()) range = choice_arg(c, 0, {"LOW", "HIGH"}) == 0 ? LuxRange::Low : LuxRange::High;
        const auto r = tb_.read_illuminance(range);
        if (r.status == LuxStatus::Saturated) return std::string(kOverrange);
        if (r.status == LuxStatus::BelowFloor) return std::string("0");
        return format_number(r.lux);
      }
      case Op::MeasCurr:
        arg_count(c, 0, 0);
        return format_number(tb_.read_dut_current());
      case Op::MeasTemp:
        arg_count(c, 0, 0);
        return format_number(tb_.read_dut_temperature());
      case Op::MeasScan: {
        arg_count(c, 0, 1);
        int n = 8;
        if (!c.args.empty()) {
          const double v = number_arg(c, 0);
          if (!(v >= 2.0 && v <= 64.0) || v != std::floor(v)) throw Fail{code::kDataOutOfRange, "grid must be 2-64"};
          n = static_cast<int>(v);
        }
        const auto g = tb_.scan(n);
        return join(g.data(), g.size());
      }
      case Op::DutTemp:
        arg_count(c, 1, 1);
        tb_.set_dut_temperature(number_arg(c, 0));
        return std::nullopt;
      case Op::DutTempQ:
        arg_count(c, 0, 0);
        return format_number(tb_.chamber().dut_setpoint());
      case Op::DutPos:
        arg_count(c, 2, 2);
        tb_.chamber().set_dut_position(number_arg(c, 0), number_arg(c, 1));
        return std::nullopt;
      case Op::DutPosQ:
        arg_count(c, 0, 0);
        return format_number(tb_.chamber().dut_x_mm()) + "," + format_number(tb_.chamber().dut_y_mm());
      case Op::TimeQ:
        arg_count(c, 0, 0);
        return format_number(tb_.now());
      case Op::TimeAdv: {
        arg_count(c, 1, 1);
        const double s = number_arg(c, 0);
        if (!(s > 0.0 && s <= kMaxAdvanceS)) throw Fail{code::kDataOutOfRange, "advance must be within (0, 1e7] s"};
        tb_.advance(s);
        return std::nullopt;
      }
      case Op::TimeScal:
        arg_count(c, 1, 1);
        tb_.chamber().clock().set_scale(number_arg(c, 0));
        return std::nullopt;
      case Op::TimeScalQ:
        arg_count(c, 0, 0);
        return format_number(tb_.chamber().clock().scale());
      case Op::Door:
        arg_count(c, 1, 1);
        tb_.set_door(choice_arg(c, 0, {"OPEN", "CLOSed"}) == 0 ? DoorState::Open : DoorState::Closed);
        return std::nullopt;
      case Op::DoorQ:
        arg_count(c, 0, 0);
        return std::string(tb_.chamber().door() == DoorState::Open ? "OPEN" : "CLOS");
      case Op::ErrQ:
        arg_count(c, 0, 0);
        return format_error(errors_.pop());
      case Op::Seed: {
        arg_count(c, 1, 1);
        const auto& a = c.args[0];
        if (a.kind != Argument::Kind::Number) throw Fail{code::kDataTypeError, {}};
        std::uint64_t s = 0;
        if (!parse_u64(a.text, s)) throw Fail{code::kDataOutOfRange, "seed must be an unsigned 64-bit integer"};
        tb_.set_seed(s);
        seed_ = s;
        return std::nullopt;
      }
      case Op::SeedQ:
        arg_count(c, 0, 0);
        return std::to_string(seed_);
      case Op::None:
        break;
    }
  } catch (const Fail& f) {
    std::string msg = error_text(f.code);
    if (!f.detail.empty()) msg += "; " + f.detail;
    errors_.push(f.code, std::move(msg));
  } catch (const Error& e) {
    int c2 = code::kSystemError;
    switch (e.kind()) {
      case ErrorKind::OutOfRange:
      case ErrorKind::TargetOutOfRange:
      case ErrorKind::DutyOutOfRange:
      case ErrorKind::Unachievable:
        c2 = code::kDataOutOfRange;
        break;
      case ErrorKind::Config:
      case ErrorKind::EmptyOrNonPositive:
        c2 = code::kSettingsConflict;
        break;
      default:
        break;
    }
    errors_.push(c2, std::string(error_text(c2)) + "; " + e.what());
  }
  return std::nullopt;
}

}  // namespace solartb::scpi
