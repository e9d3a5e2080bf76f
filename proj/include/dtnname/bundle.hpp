#ifndef DTNNAME_BUNDLE_HPP
#define DTNNAME_BUNDLE_HPP

#include "dtnname/geo.hpp"
#include "dtnname/name_specifier.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dtnname {

enum class RoutingState { PointToPoint, Stem, Flood };

/// "POINT_TO_POINT", "STEM" or "FLOOD".
std::string_view to_string(RoutingState state) noexcept;
std::optional<RoutingState> parse_routing_state(std::string_view text) noexcept;

enum class BundleErrorKind {
  MalformedLocationSubtree,
  EmptyAfterStrip,
  MalformedHeader,
  BadHexPayload,
  InvalidBundle,
};

class BundleError : public std::runtime_error {
public:
  BundleError(BundleErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  BundleErrorKind kind() const noexcept { return kind_; }

private:
  BundleErrorKind kind_;
};

/// Metadata Extension Block.
struct Meb {
  std::optional<std::string> next_resolver_eid;
  RoutingState routing_state = RoutingState::Stem;
  std::optional<WithinPredicate> scope_predicate;
  std::optional<double> ttl_seconds;

  friend bool operator==(const Meb&, const Meb&) = default;
};

/// Throws BundleError(InvalidBundle) unless POINT_TO_POINT holds exactly when
/// a non-empty resolver is set and at least one scope condition is present.
void validate(const Meb& meb);

struct Bundle {
  std::string bundle_id;
  NameSpecifier source_specifier;
  NameSpecifier destination_specifier;
  Meb meb;
  std::vector<std::uint8_t> payload;
  double created_at = 0.0;
  std::uint32_t hop_count = 0;

  friend bool operator==(const Bundle&, const Bundle&) = default;
};

void validate(const Bundle& b);

/// Moves a `location` root subtree carrying longitude/latitude/distance
/// children ("116 degrees", "40 degrees", "2 km") out of the specifier and
/// into a within-predicate. Specifiers without a location root pass through.
std::pair<NameSpecifier, std::optional<WithinPredicate>> extract_predicate(const NameSpecifier& ns);

/// Textual wire form: "key:value" header lines, a blank line, then the
/// payload as lowercase hex.
std::string encode(const Bundle& b);
Bundle decode(std::string_view bytes);

/// Wraps `inner` in an envelope addressed point-to-point to `resolver_eid`.
/// The envelope inherits the inner bundle's TTL and scope.
Bundle encapsulate(const Bundle& inner, const std::string& resolver_eid, double now);
Bundle decapsulate(const Bundle& envelope);

/// Live while now <= created_at + ttl.
bool is_expired(const Bundle& b, double now) noexcept;

std::vector<std::uint8_t> to_bytes(std::string_view text);
std::string_view as_text(const std::vector<std::uint8_t>& bytes) noexcept;

}  // namespace dtnname

#endif  // DTNNAME_BUNDLE_HPP
