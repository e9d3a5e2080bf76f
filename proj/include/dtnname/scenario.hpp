#ifndef DTNNAME_SCENARIO_HPP
#define DTNNAME_SCENARIO_HPP

// Line-oriented scenario files. '#' starts a comment. Directives:
//
//   node <eid> <lon> <lat>
//   range <km> | beacon <seconds> | latency <seconds> | seed <int> | until <seconds>
//   register <eid> <app_eid> <lifetime_s> <specifier>
//   move <eid> <t> <lon> <lat>
//   contact <eidA> <eidB> <t_open> <t_close>
//   inject <bundle_id> <src_eid> <t> [ttl <s>] dst <specifier>
//
// An inject destination carries its geographic scope as a location subtree
// ([location=... [longitude=116 degrees] [latitude=40 degrees] [distance=2 km]]).

#include "dtnname/bundle.hpp"
#include "dtnname/geo.hpp"
#include "dtnname/name_specifier.hpp"
#include "dtnname/simulator.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dtnname {

enum class ScenarioErrorKind { SyntaxError, UndeclaredNode, InvalidCoordinate, Io };

class ScenarioError : public std::runtime_error {
public:
  ScenarioError(ScenarioErrorKind kind, std::size_t line, const std::string& what);
  ScenarioErrorKind kind() const noexcept { return kind_; }
  /// 1-based line number; 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  ScenarioErrorKind kind_;
  std::size_t line_;
};

struct Scenario {
  struct Node {
    std::string eid;
    GeoPoint location;
    friend bool operator==(const Node&, const Node&) = default;
  };
  struct Registration {
    std::string node;
    std::string app_eid;
    double lifetime_s;
    NameSpecifier specifier;
    friend bool operator==(const Registration&, const Registration&) = default;
  };
  struct Move {
    std::string node;
    double t;
    GeoPoint location;
    friend bool operator==(const Move&, const Move&) = default;
  };
  struct Contact {
    std::string a;
    std::string b;
    double open;
    double close;
    friend bool operator==(const Contact&, const Contact&) = default;
  };
  struct Inject {
    std::string bundle_id;
    std::string source;
    double t;
    std::optional<double> ttl_s;
    NameSpecifier destination;  // as written, location subtree included
    friend bool operator==(const Inject&, const Inject&) = default;
  };

  std::vector<Node> nodes;
  double radio_range_km = 1.0;
  double beacon_period_s = 10.0;
  double latency_s = 0.1;
  std::uint64_t seed = 1;
  double until_s = 1000.0;
  std::vector<Registration> registrations;
  std::vector<Move> moves;
  std::vector<Contact> contacts;
  std::vector<Inject> injects;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Canonical scenario text; parse_scenario(format_scenario(s)) == s.
std::string format_scenario(const Scenario& s);

/// The bundle an inject line creates: destination stripped of its location
/// subtree, scope in the MEB, source named [eid=<src>].
Bundle make_bundle(const Scenario::Inject& inject);

WorldConfig world_config(const Scenario& s);
/// A world with every node, registration, waypoint, contact and injection
/// of the scenario loaded.
World build_world(const Scenario& s);

}  // namespace dtnname

#endif  // DTNNAME_SCENARIO_HPP
