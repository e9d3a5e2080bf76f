#ifndef DTNNAME_NAME_SPECIFIER_HPP
#define DTNNAME_NAME_SPECIFIER_HPP

// Attribute-value name-specifiers.
//
// A specifier is a forest of av-pairs written in bracketed form:
//
//   [role = general [mission = command]]
//   [location = known [longitude = 116 degrees] [latitude = 40 degrees]]
//
// A child av-pair is meaningful only under its parent; siblings name
// orthogonal categories and therefore carry distinct attributes. Values run
// from '=' to the next bracket, so "116 degrees" is a single value once its
// whitespace is normalised. All objects here are immutable and kept in
// canonical form (siblings sorted by attribute), so structural equality is
// plain operator==.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtnname {

enum class SpecifierErrorKind {
  UnbalancedBrackets,
  MissingEquals,
  EmptyToken,
  DuplicateSiblingAttribute,
  EmptySpecifier,
  InvalidToken,  // forbidden character inside a token or stray text
};

class SpecifierError : public std::runtime_error {
public:
  SpecifierError(SpecifierErrorKind kind, const std::string& what, std::size_t offset = 0);

  SpecifierErrorKind kind() const noexcept { return kind_; }
  /// Byte offset in the parsed text where the problem was detected.
  std::size_t offset() const noexcept { return offset_; }

private:
  SpecifierErrorKind kind_;
  std::size_t offset_;
};

class AvPair {
public:
  /// Validates both tokens, normalises whitespace inside the value and sorts
  /// the children. Throws SpecifierError on any invariant violation.
  AvPair(std::string attribute, std::string value, std::vector<AvPair> children = {});

  const std::string& attribute() const noexcept { return attribute_; }
  const std::string& value() const noexcept { return value_; }
  const std::vector<AvPair>& children() const noexcept { return children_; }

  /// Child with the given attribute, or nullptr.
  const AvPair* child(std::string_view attribute) const noexcept;

  friend bool operator==(const AvPair&, const AvPair&) = default;

private:
  std::string attribute_;
  std::string value_;
  std::vector<AvPair> children_;
};

class NameSpecifier {
public:
  /// Throws SpecifierError (EmptySpecifier, DuplicateSiblingAttribute).
  explicit NameSpecifier(std::vector<AvPair> roots);

  const std::vector<AvPair>& roots() const noexcept { return roots_; }
  const AvPair* root(std::string_view attribute) const noexcept;

  friend bool operator==(const NameSpecifier&, const NameSpecifier&) = default;

private:
  std::vector<AvPair> roots_;
};

NameSpecifier parse_specifier(std::string_view text);

/// Canonical text: "[attr=value [child=...]]", one space before each child
/// group, roots written back to back, no other whitespace.
std::string serialize(const NameSpecifier& ns);
std::string serialize(const AvPair& pair);

/// True iff every root av-pair of `query` has a root in `advert` with the
/// same attribute and value whose children in turn satisfy the query pair's
/// children. Omitted attributes in the query mean "don't care".
bool matches(const NameSpecifier& query, const NameSpecifier& advert);
bool matches(const std::vector<AvPair>& query, const std::vector<AvPair>& advert);

/// Token predicates used by the parser and the AvPair constructor.
bool is_valid_attribute(std::string_view token) noexcept;
/// Whitespace-normalised form of a raw value token (trimmed, runs collapsed).
std::string normalize_value(std::string_view raw);

}  // namespace dtnname

#endif  // DTNNAME_NAME_SPECIFIER_HPP
