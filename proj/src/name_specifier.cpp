#include "dtnname/name_specifier.hpp"

#include "dtnname/text.hpp"

#include <algorithm>

namespace dtnname {

namespace {

bool is_reserved(char c) noexcept
{
  return c == '[' || c == ']' || c == '=';
}

void sort_and_check_siblings(std::vector<AvPair>& pairs)
{
  std::sort(pairs.begin(), pairs.end(), [](const AvPair& a, const AvPair& b) {
    return a.attribute() < b.attribute();
  });
  auto dup = std::adjacent_find(pairs.begin(), pairs.end(), [](const AvPair& a, const AvPair& b) {
    return a.attribute() == b.attribute();
  });
  if (dup != pairs.end()) {
    throw SpecifierError(SpecifierErrorKind::DuplicateSiblingAttribute,
                         "duplicate sibling attribute '" + dup->attribute() + "'");
  }
}

const AvPair* find_attribute(const std::vector<AvPair>& pairs, std::string_view attribute) noexcept
{
  auto it = std::lower_bound(pairs.begin(), pairs.end(), attribute,
                             [](const AvPair& p, std::string_view a) { return p.attribute() < a; });
  if (it != pairs.end() && it->attribute() == attribute) {
    return &*it;
  }
  return nullptr;
}

// Recursive descent over the bracketed grammar:
//   specifier := ws group (ws group)* ws
//   group     := '[' attribute '=' value (ws group)* ws ']'
// where value extends to the next bracket.
class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  NameSpecifier parse()
  {
    std::vector<AvPair> roots;
    for (;;) {
      skip_ws();
      if (at_end()) {
        break;
      }
      char c = text_[pos_];
      if (c == '[') {
        roots.push_back(group());
      } else if (c == ']') {
        fail(SpecifierErrorKind::UnbalancedBrackets, "unmatched ']'");
      } else {
        fail(SpecifierErrorKind::InvalidToken, "text outside of a bracketed group");
      }
    }
    if (roots.empty()) {
      fail(SpecifierErrorKind::EmptySpecifier, "specifier contains no av-pair");
    }
    try {
      return NameSpecifier(std::move(roots));
    } catch (const SpecifierError& e) {
      throw SpecifierError(e.kind(), e.what(), pos_);
    }
  }

private:
  AvPair group()
  {
    const std::size_t open = pos_;
    ++pos_;  // '['

    std::size_t start = pos_;
    while (!at_end() && text_[pos_] != '=') {
      if (text_[pos_] == '[' || text_[pos_] == ']') {
        fail(SpecifierErrorKind::MissingEquals, "av-pair without '='");
      }
      ++pos_;
    }
    if (at_end()) {
      fail(SpecifierErrorKind::UnbalancedBrackets, "unterminated '['", open);
    }
    std::string_view attribute = trim(text_.substr(start, pos_ - start));
    if (attribute.empty()) {
      fail(SpecifierErrorKind::EmptyToken, "empty attribute", start);
    }
    if (!is_valid_attribute(attribute)) {
      fail(SpecifierErrorKind::InvalidToken, "whitespace inside attribute token", start);
    }
    ++pos_;  // '='

    start = pos_;
    while (!at_end() && text_[pos_] != '[' && text_[pos_] != ']') {
      if (text_[pos_] == '=') {
        fail(SpecifierErrorKind::InvalidToken, "'=' inside value token");
      }
      ++pos_;
    }
    if (at_end()) {
      fail(SpecifierErrorKind::UnbalancedBrackets, "unterminated '['", open);
    }
    std::string value = normalize_value(text_.substr(start, pos_ - start));
    if (value.empty()) {
      fail(SpecifierErrorKind::EmptyToken, "empty value", start);
    }

    std::vector<AvPair> children;
    for (;;) {
      skip_ws();
      if (at_end()) {
        fail(SpecifierErrorKind::UnbalancedBrackets, "unterminated '['", open);
      }
      char c = text_[pos_];
      if (c == ']') {
        ++pos_;
        break;
      }
      if (c != '[') {
        fail(SpecifierErrorKind::InvalidToken, "text between child groups");
      }
      children.push_back(group());
    }

    try {
      return AvPair(std::string(attribute), std::move(value), std::move(children));
    } catch (const SpecifierError& e) {
      throw SpecifierError(e.kind(), e.what(), open);
    }
  }

  void skip_ws() noexcept
  {
    while (!at_end() && is_space(text_[pos_])) {
      ++pos_;
    }
  }

  bool at_end() const noexcept { return pos_ >= text_.size(); }

  [[noreturn]] void fail(SpecifierErrorKind kind, const std::string& what) const
  {
    fail(kind, what, pos_);
  }

  [[noreturn]] void fail(SpecifierErrorKind kind, const std::string& what, std::size_t at) const
  {
    throw SpecifierError(kind, what + " at offset " + std::to_string(at), at);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_pair(std::string& out, const AvPair& pair)
{
  out += '[';
  out += pair.attribute();
  out += '=';
  out += pair.value();
  for (const AvPair& child : pair.children()) {
    out += ' ';
    write_pair(out, child);
  }
  out += ']';
}

}  // namespace

SpecifierError::SpecifierError(SpecifierErrorKind kind, const std::string& what, std::size_t offset)
    : std::runtime_error(what), kind_(kind), offset_(offset)
{
}

bool is_valid_attribute(std::string_view token) noexcept
{
  if (token.empty()) {
    return false;
  }
  return std::none_of(token.begin(), token.end(), [](char c) { return is_space(c) || is_reserved(c); });
}

std::string normalize_value(std::string_view raw)
{
  std::string out;
  for (std::string_view word : split_words(raw)) {
    if (!out.empty()) {
      out += ' ';
    }
    out += word;
  }
  return out;
}

AvPair::AvPair(std::string attribute, std::string value, std::vector<AvPair> children)
    : attribute_(std::move(attribute)), children_(std::move(children))
{
  if (attribute_.empty()) {
    throw SpecifierError(SpecifierErrorKind::EmptyToken, "empty attribute");
  }
  if (!is_valid_attribute(attribute_)) {
    throw SpecifierError(SpecifierErrorKind::InvalidToken, "invalid attribute token '" + attribute_ + "'");
  }
  if (std::any_of(value.begin(), value.end(), is_reserved)) {
    throw SpecifierError(SpecifierErrorKind::InvalidToken, "invalid value token '" + value + "'");
  }
  value_ = normalize_value(value);
  if (value_.empty()) {
    throw SpecifierError(SpecifierErrorKind::EmptyToken, "empty value for '" + attribute_ + "'");
  }
  sort_and_check_siblings(children_);
}

const AvPair* AvPair::child(std::string_view attribute) const noexcept
{
  return find_attribute(children_, attribute);
}

NameSpecifier::NameSpecifier(std::vector<AvPair> roots) : roots_(std::move(roots))
{
  if (roots_.empty()) {
    throw SpecifierError(SpecifierErrorKind::EmptySpecifier, "specifier contains no av-pair");
  }
  sort_and_check_siblings(roots_);
}

const AvPair* NameSpecifier::root(std::string_view attribute) const noexcept
{
  return find_attribute(roots_, attribute);
}

NameSpecifier parse_specifier(std::string_view text)
{
  return Parser(text).parse();
}

std::string serialize(const AvPair& pair)
{
  std::string out;
  write_pair(out, pair);
  return out;
}

std::string serialize(const NameSpecifier& ns)
{
  std::string out;
  for (const AvPair& root : ns.roots()) {
    write_pair(out, root);
  }
  return out;
}

bool matches(const std::vector<AvPair>& query, const std::vector<AvPair>& advert)
{
  for (const AvPair& wanted : query) {
    const AvPair* offered = find_attribute(advert, wanted.attribute());
    if (offered == nullptr || offered->value() != wanted.value()) {
      return false;
    }
    if (!matches(wanted.children(), offered->children())) {
      return false;
    }
  }
  return true;
}

bool matches(const NameSpecifier& query, const NameSpecifier& advert)
{
  return matches(query.roots(), advert.roots());
}

}  // namespace dtnname
