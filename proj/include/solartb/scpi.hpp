#pragma once

// SCPI line grammar: headers, numeric suffixes, query marks, arguments,
// ';' chaining with path sharing, and the instrument error queue.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace solartb::scpi {

inline constexpr std::size_t kMaxLineBytes = 4096;
inline constexpr std::size_t kErrorQueueCapacity = 16;

namespace code {
inline constexpr int kNoError = 0;
inline constexpr int kDataTypeError = -104;
inline constexpr int kParameterNotAllowed = -108;
inline constexpr int kMissingParameter = -109;
inline constexpr int kUndefinedHeader = -113;
inline constexpr int kSuffixOutOfRange = -114;
inline constexpr int kSettingsConflict = -221;
inline constexpr int kDataOutOfRange = -222;
inline constexpr int kTooMuchData = -223;
inline constexpr int kSystemError = -310;
inline constexpr int kQueueOverflow = -350;
}  // namespace code

struct Mnemonic {
  /// Upper-cased letters as typed, without the numeric suffix.
  std::string text;
  std::optional<int> suffix;

  friend bool operator==(const Mnemonic&, const Mnemonic&) = default;
};

struct Argument {
  enum class Kind { Number, Token, String };
  Kind kind = Kind::Token;
  /// Raw text for numbers and tokens, unquoted content for strings.
  std::string text;
  double number = 0.0;

  friend bool operator==(const Argument&, const Argument&) = default;
};

struct Command {
  /// `*IDN?` style; header holds the single name without '*'.
  bool common = false;
  /// Header started with ':'.
  bool absolute = false;
  std::vector<Mnemonic> header;
  bool query = false;
  std::vector<Argument> args;

  friend bool operator==(const Command&, const Command&) = default;
};

struct ParseError {
  int code = 0;
  std::string message;

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

using Unit = std::variant<Command, ParseError>;

/// Splits on ';' (outside quotes) and parses each unit independently; a bad
/// unit yields a ParseError and the rest of the line still parses. Lines
/// longer than kMaxLineBytes give a single -223 error. A trailing CR/LF is
/// ignored.
std::vector<Unit> parse_line(std::string_view line);

/// Text that parses back to an equal Command.
std::string format(const Command& cmd);

struct ErrorEntry {
  int code = 0;
  std::string message;

  friend bool operator==(const ErrorEntry&, const ErrorEntry&) = default;
};

/// FIFO of at most 16 entries. When full, the newest entry is replaced by
/// -350 "Queue overflow".
class ErrorQueue {
 public:
  void push(int code, std::string message);
  /// Oldest entry, or {0, "No error"} when empty.
  ErrorEntry pop();
  std::size_t size() const { return q_.size(); }
  void clear() { q_.clear(); }

 private:
  std::deque<ErrorEntry> q_;
};

/// `code,"message"` with embedded quotes doubled.
std::string format_error(const ErrorEntry& e);

/// Standard text for the codes above.
const char* error_text(int code);

}  // namespace solartb::scpi
