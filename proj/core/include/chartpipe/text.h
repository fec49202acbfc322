#pragma once

// Small string helpers shared across modules.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartpipe::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Collapses every whitespace run to a single space and trims the ends.
std::string normalize_space(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lowercase alphanumeric tokens; every other character separates tokens.
std::vector<std::string> word_tokens(std::string_view s);

/// Whole-string decimal number (optional sign, fraction, exponent). Rejects
/// nan/inf and hex forms. Surrounding whitespace is ignored.
std::optional<double> parse_number(std::string_view s);

/// Shortest decimal rendering that round-trips; integral values print
/// without a fractional part ("2000", not "2000.0").
std::string format_number(double v);

/// A calendar date read from `YYYY-MM-DD`, optionally followed by a time
/// part (`THH:MM[:SS]` or ` HH:MM[:SS]`).
struct IsoDate {
  int year = 0;
  int month = 1;
  int day = 1;
  /// Days since 1970-01-01 plus the fractional time of day.
  double ordinal = 0.0;
};

std::optional<IsoDate> parse_iso_date(std::string_view s);

/// Integer in [1500, 2500] written with exactly four digits.
std::optional<int> parse_year(std::string_view s);

}  // namespace chartpipe::text
