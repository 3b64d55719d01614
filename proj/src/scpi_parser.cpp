#include "solartb/scpi.hpp"

#include <cctype>

#include "solartb/format.hpp"

namespace solartb::scpi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Split on `sep` outside single or double quotes.
std::vector<std::string_view> split_outside_quotes(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

ParseError error(int c) { return {c, error_text(c)}; }

// Letters, then optional digits forming the numeric suffix.
std::optional<Mnemonic> parse_mnemonic(std::string_view seg, int& err) {
  std::size_t i = 0;
  while (i < seg.size() && (is_alpha(seg[i]) || seg[i] == '_')) ++i;
  if (i == 0) {
    err = code::kUndefinedHeader;
    return std::nullopt;
  }
  std::size_t j = i;
  while (j < seg.size() && is_digit(seg[j])) ++j;
  if (j != seg.size()) {
    err = code::kUndefinedHeader;
    return std::nullopt;
  }
  Mnemonic m{upper(seg.substr(0, i)), std::nullopt};
  if (j > i) {
    const std::string_view digits = seg.substr(i);
    if (digits.size() > 9) {
      err = code::kSuffixOutOfRange;
      return std::nullopt;
    }
    int v = 0;
    for (char c : digits) v = v * 10 + (c - '0');
    if (v < 1) {
      err = code::kSuffixOutOfRange;
      return std::nullopt;
    }
    m.suffix = v;
  }
  return m;
}

std::optional<Argument> parse_argument(std::string_view raw) {
  const std::string_view t = trim(raw);
  if (t.empty()) return std::nullopt;
  Argument a;
  if (t.front() == '"' || t.front() == '\'') {
    const char q = t.front();
    if (t.size() < 2 || t.back() != q) return std::nullopt;
    std::string content;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == q) {
        // Embedded quote must be doubled.
        if (i + 2 < t.size() && t[i + 1] == q) {
          content.push_back(q);
          ++i;
        } else {
          return std::nullopt;
        }
      } else {
        content.push_back(t[i]);
      }
    }
    a.kind = Argument::Kind::String;
    a.text = std::move(content);
    return a;
  }
  double v = 0.0;
  if (parse_double(t, v)) {
    a.kind = Argument::Kind::Number;
    a.text = std::string(t);
    a.number = v;
    return a;
  }
  if (is_alpha(t.front())) {
    for (char c : t) {
      if (!(is_alpha(c) || is_digit(c) || c == '_')) return std::nullopt;
    }
    a.kind = Argument::Kind::Token;
    a.text = upper(t);
    return a;
  }
  return std::nullopt;
}

Unit parse_unit(std::string_view unit) {
  unit = trim(unit);
  std::size_t ws = 0;
  while (ws < unit.size() && !std::isspace(static_cast<unsigned char>(unit[ws]))) ++ws;
  std::string_view head = unit.substr(0, ws);
  const std::string_view rest = trim(unit.substr(ws));

  Command cmd;
  if (!head.empty() && head.back() == '?') {
    cmd.query = true;
    head.remove_suffix(1);
  }
  if (!head.empty() && head.front() == '*') {
    cmd.common = true;
    head.remove_prefix(1);
    if (head.empty()) return error(code::kUndefinedHeader);
    for (char c : head) {
      if (!is_alpha(c)) return error(code::kUndefinedHeader);
    }
    cmd.header.push_back({upper(head), std::nullopt});
  } else {
    if (!head.empty() && head.front() == ':') {
      cmd.absolute = true;
      head.remove_prefix(1);
    }
    if (head.empty()) return error(code::kUndefinedHeader);
    for (std::string_view seg : split_outside_quotes(head, ':')) {
      int err = 0;
      auto m = parse_mnemonic(seg, err);
      if (!m) return error(err);
      cmd.header.push_back(std::move(*m));
    }
  }

  if (!rest.empty()) {
    for (std::string_view raw : split_outside_quotes(rest, ',')) {
      auto a = parse_argument(raw);
      if (!a) return error(code::kDataTypeError);
      cmd.args.push_back(std::move(*a));
    }
  }
  return cmd;
}

}  // namespace

std::vector<Unit> parse_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.size() > kMaxLineBytes) return {error(code::kTooMuchData)};
  std::vector<Unit> out;
  for (std::string_view unit : split_outside_quotes(line, ';')) {
    if (trim(unit).empty()) continue;
    out.push_back(parse_unit(unit));
  }
  return out;
}

std::string format(const Command& cmd) {
  std::string s;
  if (cmd.common) {
    s = "*" + (cmd.header.empty() ? std::string() : cmd.header.front().text);
  } else {
    if (cmd.absolute) s.push_back(':');
    for (std::size_t i = 0; i < cmd.header.size(); ++i) {
      if (i) s.push_back(':');
      s += cmd.header[i].text;
      if (cmd.header[i].suffix) s += std::to_string(*cmd.header[i].suffix);
    }
  }
  if (cmd.query) s.push_back('?');
  for (std::size_t i = 0; i < cmd.args.size(); ++i) {
    s.push_back(i ? ',' : ' ');
    const auto& a = cmd.args[i];
    if (a.kind == Argument::Kind::String) {
      s.push_back('"');
      for (char c : a.text) {
        if (c == '"') s.push_back('"');
        s.push_back(c);
      }
      s.push_back('"');
    } else {
      s += a.text;
    }
  }
  return s;
}

void ErrorQueue::push(int c, std::string message) {
  if (q_.size() >= kErrorQueueCapacity) {
    q_.back() = {code::kQueueOverflow, error_text(code::kQueueOverflow)};
    return;
  }
  q_.push_back({c, std::move(message)});
}

ErrorEntry ErrorQueue::pop() {
  if (q_.empty()) return {code::kNoError, "No error"};
  ErrorEntry e = std::move(q_.front());
  q_.pop_front();
  return e;
}

std::string format_error(const ErrorEntry& e) {
  std::string s = std::to_string(e.code) + ",\"";
  for (char c : e.message) {
    if (c == '"') s.push_back('"');
    s.push_back(c);
  }
  s.push_back('"');
  return s;
}

const char* error_text(int c) {
  switch (c) {
    case code::kNoError: return "No error";
    case code::kDataTypeError: return "Data type error";
    case code::kParameterNotAllowed: return "Parameter not allowed";
    case code::kMissingParameter: return "Missing parameter";
    case code::kUndefinedHeader: return "Undefined header";
    case code::kSuffixOutOfRange: return "Header suffix out of range";
    case code::kSettingsConflict: return "Settings conflict";
    case code::kDataOutOfRange: return "Data out of range";
    case code::kTooMuchData: return "Too much data";
    case code::kSystemError: return "System error";
    case code::kQueueOverflow: return "Queue overflow";
    default: return "Unknown error";
  }
}

}  // namespace solartb::scpi
