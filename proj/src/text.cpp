#include "dtnname/text.hpp"

#include <charconv>
#include <cmath>

namespace dtnname {

std::string format_number(double value)
{
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    return "nan";
  }
  std::string out(buf, end);
  if (out == "-0") {
    out = "0";
  }
  return out;
}

std::string format_decimal(double value)
{
  std::string out = format_number(value);
  if (out.find_first_of(".en") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::optional<double> parse_number(std::string_view text)
{
  if (text.empty()) {
    return std::nullopt;
  }
  // from_chars rejects a leading '+', which scenario authors may write.
  if (text.front() == '+') {
    text.remove_prefix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> parse_unsigned(std::string_view text)
{
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

bool is_space(char c) noexcept
{
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view text) noexcept
{
  while (!text.empty() && is_space(text.front())) {
    text.remove_prefix(1);
  }
  while (!text.empty() && is_space(text.back())) {
    text.remove_suffix(1);
  }
  return text;
}

std::vector<std::string_view> split_words(std::string_view text)
{
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) {
      ++i;
    }
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) {
      ++i;
    }
    if (i > start) {
      words.push_back(text.substr(start, i - start));
    }
  }
  return words;
}

bool is_valid_eid(std::string_view eid) noexcept
{
  if (eid.empty()) {
    return false;
  }
  for (char c : eid) {
    if (is_space(c) || c == ',') {
      return false;
    }
  }
  return true;
}

}  // namespace dtnname
