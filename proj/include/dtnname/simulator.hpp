#ifndef DTNNAME_SIMULATOR_HPP
#define DTNNAME_SIMULATOR_HPP

// Deterministic discrete-event DTN simulator.
//
// Connectivity is unit-disk (radio_range_km), optionally masked per node
// pair by explicit contact windows. Transmissions take a fixed latency and
// are never lost. Nodes follow piecewise-linear waypoints sampled every
// mobility tick. Every processed event is written to a line-oriented trace:
//
//   t=<time> ev=<KIND> node=<eid> bundle=<id|-> detail=<key=value,...>

#include "dtnname/bundle.hpp"
#include "dtnname/geo.hpp"
#include "dtnname/node.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace dtnname {

/// Ordinal doubles as the tie-break rank for events at the same instant.
enum class EventKind { BundleInject = 0, NodeMove = 1, BeaconDue = 2, TransmitComplete = 3, MaintenanceTick = 4 };

std::string_view to_string(EventKind kind) noexcept;

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run breaks one of the simulator's own bookkeeping laws.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct SimEvent {
  struct Beacon {
    bool periodic = true;
  };
  struct Transmit {
    Bundle bundle;
    std::string from;
  };
  struct Inject {
    Bundle bundle;
  };

  double at = 0.0;
  EventKind kind = EventKind::MaintenanceTick;
  std::string subject;
  std::uint64_t seq = 0;  // final tie-break: scheduling order
  std::variant<std::monostate, Beacon, Transmit, Inject> data;
};

struct Metrics {
  struct BundleStats {
    double created_at = 0.0;
    std::uint64_t deliveries = 0;
    std::optional<double> first_delivery_latency;
    std::uint32_t first_delivery_hops = 0;
  };

  std::uint64_t created = 0;
  std::uint64_t delivered = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t duplicates_suppressed = 0;
  std::uint64_t drops_ttl = 0;
  std::uint64_t holds = 0;

  // Per-transmission outcomes; together with in_flight they account for
  // every transmission.
  std::uint64_t accepted = 0;
  std::uint64_t rejected_ttl = 0;
  std::uint64_t in_flight = 0;

  // (bundle, node, app) deliveries the source could expect at creation:
  // live matching registrations on nodes inside the scope at that time.
  std::set<std::tuple<std::string, std::string, std::string>> intended;
  std::uint64_t intended_delivered = 0;

  std::map<std::string, BundleStats> per_bundle;

  double delivery_ratio() const noexcept;
  double avg_hops() const noexcept;
  double avg_latency_s() const noexcept;

  /// key=value lines, newline-terminated.
  std::string to_text() const;
};

struct WorldConfig {
  double radio_range_km = 1.0;
  double beacon_period_s = 10.0;
  double latency_s = 0.1;
  double mobility_tick_s = 1.0;
  double maintenance_period_s = 1.0;
  std::uint64_t seed = 1;
};

class World {
public:
  using DeliveryObserver =
      std::function<void(const std::string& node, const std::string& app, const Bundle& bundle, double at)>;

  explicit World(WorldConfig config);

  void add_node(const std::string& eid, const GeoPoint& location);
  /// The node moves linearly from its previous waypoint (its declared
  /// position at t=0 for the first) to reach `location` at time `t`.
  void add_waypoint(const std::string& eid, double t, const GeoPoint& location);
  /// Restricts the pair's link to the listed windows [open, close].
  void add_contact(const std::string& a, const std::string& b, double open, double close);
  void register_app(const std::string& node, const std::string& app_eid, const NameSpecifier& ns,
                    double lifetime_s);
  void inject(const std::string& source, double at, Bundle bundle);

  bool has_events() const noexcept { return !queue_.empty(); }
  /// Throws SimulationError when the queue is empty.
  SimEvent step();
  /// Processes every event scheduled at or before `until`.
  const Metrics& run(double until);

  /// Link neighbours of `eid` with their true positions, sorted by EID.
  std::vector<Neighbor> neighbors(std::string_view eid) const;
  bool connected(const std::string& a, const std::string& b) const;
  GeoPoint position_at(const std::string& eid, double t) const;

  const NodeState& node(std::string_view eid) const;
  std::vector<std::string> node_ids() const;
  double clock() const noexcept { return clock_; }
  const WorldConfig& config() const noexcept { return config_; }
  const Metrics& metrics() const noexcept { return metrics_; }
  const std::string& trace() const noexcept { return trace_; }
  /// Encoded form of every bundle created so far, in creation order.
  const std::vector<std::string>& created_bundles() const noexcept { return created_bundles_; }

  void on_delivery(DeliveryObserver observer) { observer_ = std::move(observer); }

  /// Throws InvariantViolation if the metric accounting does not close.
  void check_invariants() const;

private:
  struct EventOrder {
    bool operator()(const SimEvent& a, const SimEvent& b) const noexcept;
  };
  struct Waypoint {
    double t;
    GeoPoint location;
  };

  NodeState& mutable_node(std::string_view eid);
  void start();
  void schedule(double at, EventKind kind, const std::string& subject,
                decltype(SimEvent::data) data = std::monostate{});
  void handle_inject(const std::string& source, const Bundle& bundle);
  void handle_move(const std::string& eid);
  void handle_beacon(const std::string& eid, bool periodic);
  void handle_transmit(const std::string& receiver, const SimEvent::Transmit& tx);
  void handle_maintenance(const std::string& eid);
  void route_at(const std::string& eid);
  std::vector<Neighbor> known_neighbors(const std::string& eid) const;
  void record_intended(const Bundle& bundle);
  void emit(std::string_view kind, const std::string& node, std::string_view bundle, const std::string& detail);

  WorldConfig config_;
  std::map<std::string, NodeState, std::less<>> nodes_;
  std::map<std::string, std::vector<Waypoint>, std::less<>> waypoints_;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> contacts_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventOrder> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t total_registrations_ = 0;
  double clock_ = 0.0;
  bool started_ = false;
  Metrics metrics_;
  std::string trace_;
  std::vector<std::string> created_bundles_;
  DeliveryObserver observer_;
};

}  // namespace dtnname

#endif  // DTNNAME_SIMULATOR_HPP
