#ifndef DTNNAME_NODE_HPP
#define DTNNAME_NODE_HPP

// Per-node bundle agent, resolver and router.
//
// Routing follows the STEM/FLOOD scheme: while the custodian is outside the
// destination's within-predicate the bundle is greedily forwarded to the
// neighbour closest to the predicate center (STEM); once inside, it is
// flooded to every neighbour that is also inside and delivered to matching
// local registrations (FLOOD). Envelopes addressed point-to-point to a
// resolver are unwrapped on arrival and their inner bundle re-enters routing.

#include "dtnname/bundle.hpp"
#include "dtnname/geo.hpp"
#include "dtnname/name_specifier.hpp"
#include "dtnname/name_tree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dtnname {

enum class NodeErrorKind { MissingPredicate, MalformedBeacon };

class NodeError : public std::runtime_error {
public:
  NodeError(NodeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  NodeErrorKind kind() const noexcept { return kind_; }

private:
  NodeErrorKind kind_;
};

struct Neighbor {
  std::string eid;
  GeoPoint location;
};

struct NodeTableEntry {
  std::string eid;
  GeoPoint location;
  double updated_at = 0.0;
};

struct Registration {
  std::string app_eid;
  NameSpecifier specifier;
  double expires_at = 0.0;
};

struct DeliveryRecord {
  std::string bundle_id;
  std::string app_eid;
  double at = 0.0;
};

struct RoutingDecision {
  enum class Kind { ForwardTo, Hold, FloodTo, PointToPoint, Drop };

  Kind kind = Kind::Hold;
  RoutingState state = RoutingState::Stem;
  std::vector<std::string> deliver_to;  // local app EIDs, FLOOD only
  std::vector<std::string> targets;     // ForwardTo/PointToPoint: one; FloodTo: any number
  std::optional<double> distance_km;    // custodian to predicate center
  std::string drop_reason;
};

std::string_view to_string(RoutingDecision::Kind kind) noexcept;

enum class AcceptOutcome { Accepted, Duplicate, Expired, Beacon };

struct AcceptResult {
  AcceptOutcome outcome = AcceptOutcome::Accepted;
  /// Set when an envelope addressed to this node was unwrapped.
  std::optional<std::string> inner_id;
  bool inner_duplicate = false;
  std::optional<std::string> inner_error;
};

/// Result of evaluating one pending bundle in process_pending().
struct RoutingAction {
  std::string bundle_id;
  RoutingDecision decision;
  RoutingState previous_state = RoutingState::Stem;
  bool newly_held = false;
  std::uint32_t hop_count = 0;
  double created_at = 0.0;
  std::optional<Bundle> snapshot;  // the bundle as routed (state rewritten)
};

inline constexpr std::string_view kBeaconAttribute = "beacon";
inline constexpr std::string_view kBeaconValue = "location-update";

bool is_beacon(const Bundle& b) noexcept;

class NodeState {
public:
  struct PendingBundle {
    Bundle bundle;
    std::string arrived_from;  // empty for locally created bundles
    std::set<std::string> handed_to;
    bool held = false;
  };

  NodeState(std::string canonical_eid, GeoPoint location, double beacon_period_s = 10.0);

  const std::string& canonical_eid() const noexcept { return canonical_eid_; }
  const GeoPoint& location() const noexcept { return location_; }
  void set_location(const GeoPoint& p) noexcept { location_ = p; }
  double beacon_period() const noexcept { return beacon_period_; }

  const NameTree& kb() const noexcept { return kb_; }
  const std::map<std::string, NodeTableEntry>& node_table() const noexcept { return node_table_; }
  const std::vector<Registration>& registrations() const noexcept { return registrations_; }
  const std::vector<DeliveryRecord>& delivered() const noexcept { return delivered_; }
  const std::vector<PendingBundle>& pending() const noexcept { return pending_; }
  bool has_seen(std::string_view bundle_id) const { return seen_ids_.contains(std::string(bundle_id)); }

  /// Binds `app_eid` to `ns` in the local knowledge base for `lifetime_s`.
  /// Registering the same pair again refreshes its lifetime.
  void register_app(const std::string& app_eid, const NameSpecifier& ns, double lifetime_s, double now);

  /// One-hop location update carrying (canonical EID, location, now).
  Bundle make_beacon(double now);

  /// Upserts the sender's node-table entry if the beacon is newer than what
  /// is stored. Returns true if the table changed. Throws MalformedBeacon.
  bool apply_beacon(const Bundle& beacon, double now);

  /// Pure routing evaluation for `b` at this custodian. Rewrites
  /// b.meb.routing_state to the state used. Flood targets and deliveries
  /// already performed for this bundle are excluded.
  RoutingDecision route_bundle(Bundle& b, std::span<const Neighbor> neighbors, double now,
                               std::string_view arrived_from = {}) const;

  /// Bundle arriving over a link. Duplicates, expired bundles and beacons
  /// are never queued; envelopes addressed to this node are unwrapped.
  AcceptResult accept_bundle(const Bundle& b, std::string_view from, double now);

  /// Entry point for bundles created at this node.
  void originate(const Bundle& b);

  /// Destination EIDs known locally for `query`; empty means route by name.
  std::vector<std::string> resolve_local(const NameSpecifier& query, double now) const;

  /// Runs route_bundle over every pending bundle and commits the outcome:
  /// records deliveries, removes forwarded/dropped bundles and remembers
  /// flood recipients. Only evaluations with an observable effect are
  /// returned.
  std::vector<RoutingAction> process_pending(std::span<const Neighbor> neighbors, double now);

  struct MaintenanceReport {
    std::size_t expired_records = 0;
    std::vector<std::string> dropped_bundles;
  };

  /// Expires knowledge-base records, registrations and TTL-dead bundles.
  MaintenanceReport maintenance(double now);

private:
  PendingBundle* find_pending(std::string_view bundle_id);
  const PendingBundle* find_pending(std::string_view bundle_id) const;
  void enqueue(Bundle b, std::string_view from);

  std::string canonical_eid_;
  GeoPoint location_;
  double beacon_period_;
  NameTree kb_;
  std::map<std::string, NodeTableEntry> node_table_;
  std::vector<PendingBundle> pending_;
  std::set<std::string> seen_ids_;
  std::vector<Registration> registrations_;
  std::vector<DeliveryRecord> delivered_;
  std::set<std::pair<std::string, std::string>> delivered_keys_;
  std::uint64_t beacon_seq_ = 0;
};

}  // namespace dtnname

#endif  // DTNNAME_NODE_HPP
