#ifndef DTNNAME_TEXT_HPP
#define DTNNAME_TEXT_HPP

// Small text helpers shared by the wire formats (bundle header, traces,
// scenario files, metrics).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dtnname {

/// Shortest decimal text that reads back to exactly the same double.
std::string format_number(double value);

/// Like format_number, but always carries a fractional part ("1" -> "1.0").
std::string format_decimal(double value);

/// Strict full-string parse; rejects trailing garbage, inf and nan.
std::optional<double> parse_number(std::string_view text);
std::optional<std::uint64_t> parse_unsigned(std::string_view text);

bool is_space(char c) noexcept;
std::string_view trim(std::string_view text) noexcept;

/// Splits on runs of whitespace; empty fields are never produced.
std::vector<std::string_view> split_words(std::string_view text);

/// An EID is a non-empty token without whitespace or commas (commas
/// separate fields in trace details).
bool is_valid_eid(std::string_view eid) noexcept;

}  // namespace dtnname

#endif  // DTNNAME_TEXT_HPP
