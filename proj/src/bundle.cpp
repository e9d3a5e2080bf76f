#include "dtnname/bundle.hpp"

#include "dtnname/text.hpp"

#include <array>

namespace dtnname {

namespace {

constexpr std::array<std::string_view, 9> kHeaderKeys = {
    "id", "src", "dst", "state", "resolver", "scope", "ttl", "created", "hops",
};

[[noreturn]] void malformed_location(const std::string& why)
{
  throw BundleError(BundleErrorKind::MalformedLocationSubtree, "malformed location subtree: " + why);
}

[[noreturn]] void malformed_header(const std::string& why)
{
  throw BundleError(BundleErrorKind::MalformedHeader, "malformed bundle header: " + why);
}

// "<number> <unit>" with the unit word mandatory.
double quantity(const AvPair& location, std::string_view attribute, std::string_view unit)
{
  const AvPair* child = location.child(attribute);
  if (child == nullptr) {
    malformed_location("missing '" + std::string(attribute) + "'");
  }
  auto words = split_words(child->value());
  if (words.size() != 2 || words[1] != unit) {
    malformed_location("'" + std::string(attribute) + "' must read '<number> " + std::string(unit) + "'");
  }
  auto number = parse_number(words[0]);
  if (!number) {
    malformed_location("'" + std::string(words[0]) + "' is not a number");
  }
  return *number;
}

int hex_digit(char c) noexcept
{
  if (c >= '0' && c <= '9') {
    return c - '0';
  }
  if (c >= 'a' && c <= 'f') {
    return c - 'a' + 10;
  }
  return -1;
}

template <typename T>
T header_field(std::string_view key, std::string_view text, std::optional<T> parsed)
{
  if (!parsed) {
    malformed_header("bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return *parsed;
}

}  // namespace

std::string_view to_string(RoutingState state) noexcept
{
  switch (state) {
    case RoutingState::PointToPoint:
      return "POINT_TO_POINT";
    case RoutingState::Stem:
      return "STEM";
    case RoutingState::Flood:
      return "FLOOD";
  }
  return "?";
}

std::optional<RoutingState> parse_routing_state(std::string_view text) noexcept
{
  if (text == "POINT_TO_POINT") {
    return RoutingState::PointToPoint;
  }
  if (text == "STEM") {
    return RoutingState::Stem;
  }
  if (text == "FLOOD") {
    return RoutingState::Flood;
  }
  return std::nullopt;
}

void validate(const Meb& meb)
{
  const bool has_resolver = meb.next_resolver_eid.has_value() && !meb.next_resolver_eid->empty();
  if (meb.next_resolver_eid.has_value() && !is_valid_eid(*meb.next_resolver_eid)) {
    throw BundleError(BundleErrorKind::InvalidBundle, "invalid next resolver EID");
  }
  if (has_resolver != (meb.routing_state == RoutingState::PointToPoint)) {
    throw BundleError(BundleErrorKind::InvalidBundle,
                      "POINT_TO_POINT routing requires a next resolver EID and vice versa");
  }
  if (!meb.scope_predicate && !meb.ttl_seconds) {
    throw BundleError(BundleErrorKind::InvalidBundle, "MEB needs a TTL or a scope predicate");
  }
  if (meb.ttl_seconds && !(*meb.ttl_seconds >= 0.0)) {
    throw BundleError(BundleErrorKind::InvalidBundle, "negative TTL");
  }
}

void validate(const Bundle& b)
{
  if (!is_valid_eid(b.bundle_id)) {
    throw BundleError(BundleErrorKind::InvalidBundle, "invalid bundle id '" + b.bundle_id + "'");
  }
  if (b.destination_specifier.root("location") != nullptr) {
    throw BundleError(BundleErrorKind::InvalidBundle, "destination still carries a location subtree");
  }
  validate(b.meb);
}

std::pair<NameSpecifier, std::optional<WithinPredicate>> extract_predicate(const NameSpecifier& ns)
{
  const AvPair* location = ns.root("location");
  if (location == nullptr) {
    return {ns, std::nullopt};
  }
  const double lon = quantity(*location, "longitude", "degrees");
  const double lat = quantity(*location, "latitude", "degrees");
  const double radius = quantity(*location, "distance", "km");
  std::optional<WithinPredicate> pred;
  try {
    pred.emplace(GeoPoint(lon, lat), radius);
  } catch (const GeoError& e) {
    malformed_location(e.what());
  }

  std::vector<AvPair> rest;
  for (const AvPair& root : ns.roots()) {
    if (root.attribute() != "location") {
      rest.push_back(root);
    }
  }
  if (rest.empty()) {
    throw BundleError(BundleErrorKind::EmptyAfterStrip,
                      "specifier holds only a location subtree; nothing left to name the destination");
  }
  return {NameSpecifier(std::move(rest)), pred};
}

std::string encode(const Bundle& b)
{
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out += "id:" + b.bundle_id + "\n";
  out += "src:" + serialize(b.source_specifier) + "\n";
  out += "dst:" + serialize(b.destination_specifier) + "\n";
  out += "state:" + std::string(to_string(b.meb.routing_state)) + "\n";
  out += "resolver:" + b.meb.next_resolver_eid.value_or("") + "\n";
  out += "scope:";
  if (b.meb.scope_predicate) {
    const WithinPredicate& p = *b.meb.scope_predicate;
    out += to_string(p.center()) + " " + format_number(p.radius_km());
  }
  out += "\n";
  out += "ttl:" + (b.meb.ttl_seconds ? format_number(*b.meb.ttl_seconds) : std::string()) + "\n";
  out += "created:" + format_number(b.created_at) + "\n";
  out += "hops:" + std::to_string(b.hop_count) + "\n";
  out += "\n";
  out.reserve(out.size() + 2 * b.payload.size());
  for (std::uint8_t byte : b.payload) {
    out += kHex[byte >> 4];
    out += kHex[byte & 0x0f];
  }
  return out;
}

Bundle decode(std::string_view bytes)
{
  std::array<std::string_view, kHeaderKeys.size()> fields;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kHeaderKeys.size(); ++i) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) {
      malformed_header("truncated before '" + std::string(kHeaderKeys[i]) + "'");
    }
    std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos || line.substr(0, colon) != kHeaderKeys[i]) {
      malformed_header("expected '" + std::string(kHeaderKeys[i]) + ":' line");
    }
    fields[i] = line.substr(colon + 1);
  }
  if (bytes.substr(pos, 1) != "\n") {
    malformed_header("missing blank line after header");
  }
  std::string_view hex = bytes.substr(pos + 1);
  if (!hex.empty() && hex.back() == '\n') {
    hex.remove_suffix(1);
  }
  if (hex.size() % 2 != 0) {
    throw BundleError(BundleErrorKind::BadHexPayload, "odd-length hex payload");
  }
  std::vector<std::uint8_t> payload;
  payload.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_digit(hex[i]);
    const int lo = hex_digit(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw BundleError(BundleErrorKind::BadHexPayload, "non-hex character in payload");
    }
    payload.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }

  try {
    Meb meb;
    meb.routing_state = header_field("state", fields[3], parse_routing_state(fields[3]));
    if (!fields[4].empty()) {
      meb.next_resolver_eid = std::string(fields[4]);
    }
    if (!fields[5].empty()) {
      auto words = split_words(fields[5]);
      if (words.size() != 3) {
        malformed_header("scope needs 'lon lat radius'");
      }
      const double lon = header_field("scope", fields[5], parse_number(words[0]));
      const double lat = header_field("scope", fields[5], parse_number(words[1]));
      const double radius = header_field("scope", fields[5], parse_number(words[2]));
      meb.scope_predicate.emplace(GeoPoint(lon, lat), radius);
    }
    if (!fields[6].empty()) {
      meb.ttl_seconds = header_field("ttl", fields[6], parse_number(fields[6]));
    }
    const auto hops = header_field("hops", fields[8], parse_unsigned(fields[8]));
    if (hops > UINT32_MAX) {
      malformed_header("hop count out of range");
    }
    Bundle b{
        .bundle_id = std::string(fields[0]),
        .source_specifier = parse_specifier(fields[1]),
        .destination_specifier = parse_specifier(fields[2]),
        .meb = std::move(meb),
        .payload = std::move(payload),
        .created_at = header_field("created", fields[7], parse_number(fields[7])),
        .hop_count = static_cast<std::uint32_t>(hops),
    };
    validate(b);
    return b;
  } catch (const SpecifierError& e) {
    malformed_header(e.what());
  } catch (const GeoError& e) {
    malformed_header(e.what());
  } catch (const BundleError& e) {
    if (e.kind() == BundleErrorKind::InvalidBundle) {
      malformed_header(e.what());
    }
    throw;
  }
}

Bundle encapsulate(const Bundle& inner, const std::string& resolver_eid, double now)
{
  if (!is_valid_eid(resolver_eid)) {
    throw BundleError(BundleErrorKind::InvalidBundle, "invalid resolver EID '" + resolver_eid + "'");
  }
  Bundle envelope{
      .bundle_id = inner.bundle_id + "+env:" + resolver_eid,
      .source_specifier = inner.source_specifier,
      .destination_specifier = NameSpecifier({AvPair("eid", resolver_eid)}),
      .meb =
          Meb{
              .next_resolver_eid = resolver_eid,
              .routing_state = RoutingState::PointToPoint,
              .scope_predicate = inner.meb.scope_predicate,
              .ttl_seconds = inner.meb.ttl_seconds,
          },
      .payload = to_bytes(encode(inner)),
      .created_at = now,
      .hop_count = 0,
  };
  validate(envelope);
  return envelope;
}

Bundle decapsulate(const Bundle& envelope)
{
  return decode(as_text(envelope.payload));
}

bool is_expired(const Bundle& b, double now) noexcept
{
  return b.meb.ttl_seconds.has_value() && now > b.created_at + *b.meb.ttl_seconds;
}

std::vector<std::uint8_t> to_bytes(std::string_view text)
{
  return {text.begin(), text.end()};
}

std::string_view as_text(const std::vector<std::uint8_t>& bytes) noexcept
{
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace dtnname
