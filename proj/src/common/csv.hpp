#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace comira {

// RFC 4180 fields: quoted when they hold a comma, quote or line break.
std::string csv_field(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

// Parses CSV text into rows of fields. Throws Errc::format on an unterminated
// quoted field. A trailing newline does not produce an empty row.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Shortest decimal text that round-trips a double; "inf", "-inf", "nan" for
// non-finite values.
std::string format_double(double v);
// Throws Errc::format on malformed input.
double parse_double(std::string_view text);

}  // namespace comira
