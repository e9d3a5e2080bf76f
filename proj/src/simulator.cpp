#include "dtnname/simulator.hpp"

#include "dtnname/text.hpp"

#include <algorithm>
#include <cmath>

namespace dtnname {

namespace {

// Event times live on a microsecond grid so repeated latency additions print
// cleanly and compare exactly.
double quantize(double t)
{
  return std::round(t * 1e6) / 1e6;
}

std::pair<std::string, std::string> pair_key(const std::string& a, const std::string& b)
{
  return a < b ? std::pair(a, b) : std::pair(b, a);
}

std::string kv(std::string_view key, std::string_view value)
{
  std::string out(key);
  out += '=';
  out += value;
  return out;
}

std::string join(std::initializer_list<std::string> parts)
{
  std::string out;
  for (const std::string& p : parts) {
    if (p.empty()) {
      continue;
    }
    if (!out.empty()) {
      out += ',';
    }
    out += p;
  }
  return out;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept
{
  switch (kind) {
    case EventKind::BundleInject:
      return "BundleInject";
    case EventKind::NodeMove:
      return "NodeMove";
    case EventKind::BeaconDue:
      return "BeaconDue";
    case EventKind::TransmitComplete:
      return "TransmitComplete";
    case EventKind::MaintenanceTick:
      return "MaintenanceTick";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Metrics

double Metrics::delivery_ratio() const noexcept
{
  if (intended.empty()) {
    return 0.0;
  }
  return static_cast<double>(intended_delivered) / static_cast<double>(intended.size());
}

double Metrics::avg_hops() const noexcept
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [id, stats] : per_bundle) {
    if (stats.first_delivery_latency) {
      sum += stats.first_delivery_hops;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double Metrics::avg_latency_s() const noexcept
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [id, stats] : per_bundle) {
    if (stats.first_delivery_latency) {
      sum += *stats.first_delivery_latency;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::string Metrics::to_text() const
{
  std::string out;
  out += "created=" + std::to_string(created) + "\n";
  out += "delivered=" + std::to_string(delivered) + "\n";
  out += "delivery_ratio=" + format_decimal(delivery_ratio()) + "\n";
  out += "transmissions=" + std::to_string(transmissions) + "\n";
  out += "duplicates_suppressed=" + std::to_string(duplicates_suppressed) + "\n";
  out += "drops_ttl=" + std::to_string(drops_ttl) + "\n";
  out += "holds=" + std::to_string(holds) + "\n";
  out += "avg_hops=" + format_decimal(avg_hops()) + "\n";
  out += "avg_latency_s=" + format_decimal(avg_latency_s()) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// World setup

bool World::EventOrder::operator()(const SimEvent& a, const SimEvent& b) const noexcept
{
  // priority_queue pops the largest element; invert for earliest-first.
  auto key = [](const SimEvent& e) { return std::tie(e.at, e.kind, e.subject, e.seq); };
  return key(a) > key(b);
}

World::World(WorldConfig config) : config_(config)
{
  if (!(config_.radio_range_km >= 0.0) || !(config_.beacon_period_s > 0.0) || !(config_.latency_s >= 0.0) ||
      !(config_.mobility_tick_s > 0.0) || !(config_.maintenance_period_s > 0.0)) {
    throw SimulationError("invalid world configuration");
  }
}

void World::add_node(const std::string& eid, const GeoPoint& location)
{
  if (nodes_.contains(eid)) {
    throw SimulationError("node '" + eid + "' declared twice");
  }
  nodes_.emplace(eid, NodeState(eid, location, config_.beacon_period_s));
  if (started_) {
    schedule(clock_, EventKind::BeaconDue, eid, SimEvent::Beacon{true});
    schedule(clock_ + config_.maintenance_period_s, EventKind::MaintenanceTick, eid);
  }
}

void World::add_waypoint(const std::string& eid, double t, const GeoPoint& location)
{
  const NodeState& n = node(eid);
  if (!(t >= 0.0)) {
    throw SimulationError("waypoint time must be non-negative");
  }
  auto& path = waypoints_[eid];
  if (path.empty()) {
    path.push_back(Waypoint{0.0, n.location()});
  }
  auto at = std::upper_bound(path.begin(), path.end(), t, [](double v, const Waypoint& w) { return v < w.t; });
  path.insert(at, Waypoint{t, location});
}

void World::add_contact(const std::string& a, const std::string& b, double open, double close)
{
  node(a);
  node(b);
  if (a == b || !(open >= 0.0) || !(close >= open)) {
    throw SimulationError("invalid contact window " + a + "-" + b);
  }
  contacts_[pair_key(a, b)].emplace_back(open, close);
}

void World::register_app(const std::string& node_eid, const std::string& app_eid, const NameSpecifier& ns,
                         double lifetime_s)
{
  mutable_node(node_eid).register_app(app_eid, ns, lifetime_s, clock_);
  ++total_registrations_;
}

void World::inject(const std::string& source, double at, Bundle bundle)
{
  node(source);
  if (!(at >= clock_)) {
    throw SimulationError("cannot inject into the past");
  }
  validate(bundle);
  schedule(at, EventKind::BundleInject, source, SimEvent::Inject{std::move(bundle)});
}

const NodeState& World::node(std::string_view eid) const
{
  auto it = nodes_.find(eid);
  if (it == nodes_.end()) {
    throw SimulationError("unknown node '" + std::string(eid) + "'");
  }
  return it->second;
}

NodeState& World::mutable_node(std::string_view eid)
{
  auto it = nodes_.find(eid);
  if (it == nodes_.end()) {
    throw SimulationError("unknown node '" + std::string(eid) + "'");
  }
  return it->second;
}

std::vector<std::string> World::node_ids() const
{
  std::vector<std::string> ids;
  for (const auto& [eid, n] : nodes_) {
    ids.push_back(eid);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Topology

bool World::connected(const std::string& a, const std::string& b) const
{
  if (a == b) {
    return false;
  }
  if (distance_km(node(a).location(), node(b).location()) > config_.radio_range_km) {
    return false;
  }
  auto windows = contacts_.find(pair_key(a, b));
  if (windows == contacts_.end()) {
    return true;
  }
  return std::any_of(windows->second.begin(), windows->second.end(),
                     [&](const auto& w) { return w.first <= clock_ && clock_ <= w.second; });
}

std::vector<Neighbor> World::neighbors(std::string_view eid) const
{
  const std::string self(eid);
  node(self);
  std::vector<Neighbor> out;
  for (const auto& [other, n] : nodes_) {
    if (connected(self, other)) {
      out.push_back(Neighbor{other, n.location()});
    }
  }
  return out;
}

std::vector<Neighbor> World::known_neighbors(const std::string& eid) const
{
  const NodeState& self = node(eid);
  std::vector<Neighbor> out;
  for (const Neighbor& n : neighbors(eid)) {
    auto entry = self.node_table().find(n.eid);
    if (entry != self.node_table().end()) {
      out.push_back(Neighbor{n.eid, entry->second.location});
    }
  }
  return out;
}

GeoPoint World::position_at(const std::string& eid, double t) const
{
  const NodeState& n = node(eid);
  auto it = waypoints_.find(eid);
  if (it == waypoints_.end()) {
    return n.location();
  }
  const auto& path = it->second;
  if (t >= path.back().t) {
    return path.back().location;
  }
  auto next = std::upper_bound(path.begin(), path.end(), t, [](double v, const Waypoint& w) { return v < w.t; });
  if (next == path.begin()) {
    return next->location;
  }
  auto prev = std::prev(next);
  const double span = next->t - prev->t;
  const double f = span > 0.0 ? (t - prev->t) / span : 1.0;
  const double lon = prev->location.longitude() + f * (next->location.longitude() - prev->location.longitude());
  const double lat = prev->location.latitude() + f * (next->location.latitude() - prev->location.latitude());
  return GeoPoint(lon, lat);
}

// ---------------------------------------------------------------------------
// Event loop

void World::schedule(double at, EventKind kind, const std::string& subject, decltype(SimEvent::data) data)
{
  queue_.push(SimEvent{quantize(at), kind, subject, next_seq_++, std::move(data)});
}

void World::start()
{
  if (started_) {
    return;
  }
  started_ = true;
  for (const auto& [eid, n] : nodes_) {
    schedule(clock_, EventKind::BeaconDue, eid, SimEvent::Beacon{true});
    schedule(clock_ + config_.maintenance_period_s, EventKind::MaintenanceTick, eid);
  }
  for (const auto& [eid, path] : waypoints_) {
    schedule(clock_ + config_.mobility_tick_s, EventKind::NodeMove, eid);
  }
  // Links that come up at a scheduled instant are discovered right away.
  for (const auto& [pair, windows] : contacts_) {
    for (const auto& [open, close] : windows) {
      if (open >= clock_) {
        schedule(open, EventKind::BeaconDue, pair.first, SimEvent::Beacon{false});
        schedule(open, EventKind::BeaconDue, pair.second, SimEvent::Beacon{false});
      }
    }
  }
}

SimEvent World::step()
{
  start();
  if (queue_.empty()) {
    throw SimulationError("event queue is empty");
  }
  SimEvent ev = queue_.top();
  queue_.pop();
  clock_ = std::max(clock_, ev.at);

  switch (ev.kind) {
    case EventKind::BundleInject:
      handle_inject(ev.subject, std::get<SimEvent::Inject>(ev.data).bundle);
      break;
    case EventKind::NodeMove:
      handle_move(ev.subject);
      break;
    case EventKind::BeaconDue:
      handle_beacon(ev.subject, std::get<SimEvent::Beacon>(ev.data).periodic);
      break;
    case EventKind::TransmitComplete:
      handle_transmit(ev.subject, std::get<SimEvent::Transmit>(ev.data));
      break;
    case EventKind::MaintenanceTick:
      handle_maintenance(ev.subject);
      break;
  }
  return ev;
}

const Metrics& World::run(double until)
{
  start();
  while (!queue_.empty() && queue_.top().at <= until) {
    step();
  }
  return metrics_;
}

// ---------------------------------------------------------------------------
// Handlers

void World::emit(std::string_view kind, const std::string& node_eid, std::string_view bundle,
                 const std::string& detail)
{
  trace_ += "t=" + format_number(clock_);
  trace_ += " ev=";
  trace_ += kind;
  trace_ += " node=" + node_eid;
  trace_ += " bundle=";
  trace_ += bundle.empty() ? std::string_view("-") : bundle;
  trace_ += " detail=" + detail + "\n";
}

void World::record_intended(const Bundle& bundle)
{
  const Bundle* effective = &bundle;
  std::optional<Bundle> inner;
  while (effective->meb.next_resolver_eid) {
    inner = decapsulate(*effective);
    effective = &*inner;
  }
  Metrics::BundleStats& stats = metrics_.per_bundle[effective->bundle_id];
  stats.created_at = effective->created_at;
  if (!effective->meb.scope_predicate) {
    return;
  }
  for (const auto& [eid, n] : nodes_) {
    if (!within(n.location(), *effective->meb.scope_predicate)) {
      continue;
    }
    for (const Registration& reg : n.registrations()) {
      if (reg.expires_at >= clock_ && matches(effective->destination_specifier, reg.specifier)) {
        metrics_.intended.emplace(effective->bundle_id, eid, reg.app_eid);
      }
    }
  }
}

void World::handle_inject(const std::string& source, const Bundle& bundle)
{
  NodeState& n = mutable_node(source);
  ++metrics_.created;
  record_intended(bundle);
  created_bundles_.push_back(encode(bundle));
  const auto resolved = n.resolve_local(bundle.destination_specifier, clock_);
  emit("CREATE", source, bundle.bundle_id,
       join({kv("state", to_string(bundle.meb.routing_state)), kv("resolved", std::to_string(resolved.size()))}));
  n.originate(bundle);
  route_at(source);
}

void World::handle_move(const std::string& eid)
{
  NodeState& n = mutable_node(eid);
  const GeoPoint p = position_at(eid, clock_);
  n.set_location(p);
  emit("MOVE", eid, {},
       join({kv("lon", format_number(p.longitude())), kv("lat", format_number(p.latitude()))}));
  if (clock_ < waypoints_.at(eid).back().t) {
    schedule(clock_ + config_.mobility_tick_s, EventKind::NodeMove, eid);
  }
}

void World::handle_beacon(const std::string& eid, bool periodic)
{
  NodeState& sender = mutable_node(eid);
  const Bundle beacon = sender.make_beacon(clock_);
  const auto heard_by = neighbors(eid);
  emit("BEACON", eid, beacon.bundle_id,
       join({kv("lon", format_number(sender.location().longitude())),
             kv("lat", format_number(sender.location().latitude())),
             kv("recipients", std::to_string(heard_by.size()))}));
  std::vector<std::string> updated;
  for (const Neighbor& nb : heard_by) {
    if (mutable_node(nb.eid).apply_beacon(beacon, clock_)) {
      updated.push_back(nb.eid);
    }
  }
  for (const std::string& receiver : updated) {
    route_at(receiver);
  }
  if (periodic) {
    schedule(clock_ + config_.beacon_period_s, EventKind::BeaconDue, eid, SimEvent::Beacon{true});
  }
}

void World::handle_transmit(const std::string& receiver, const SimEvent::Transmit& tx)
{
  --metrics_.in_flight;
  NodeState& n = mutable_node(receiver);
  const AcceptResult result = n.accept_bundle(tx.bundle, tx.from, clock_);
  const std::string& id = tx.bundle.bundle_id;
  switch (result.outcome) {
    case AcceptOutcome::Accepted:
      ++metrics_.accepted;
      emit("RECV", receiver, id, join({kv("from", tx.from), kv("hops", std::to_string(tx.bundle.hop_count + 1))}));
      if (result.inner_error) {
        throw InvariantViolation("envelope " + id + " does not carry a bundle: " + *result.inner_error);
      }
      if (result.inner_id) {
        emit(result.inner_duplicate ? "DUP" : "RECV", receiver, *result.inner_id,
             join({kv("from", tx.from), kv("decap", id)}));
      }
      break;
    case AcceptOutcome::Duplicate:
      ++metrics_.duplicates_suppressed;
      emit("DUP", receiver, id, kv("from", tx.from));
      break;
    case AcceptOutcome::Expired:
      ++metrics_.rejected_ttl;
      ++metrics_.drops_ttl;
      emit("DROP_TTL", receiver, id, join({kv("reason", "ttl"), kv("where", "arrival")}));
      break;
    case AcceptOutcome::Beacon:
      break;
  }
  route_at(receiver);
}

void World::handle_maintenance(const std::string& eid)
{
  NodeState& n = mutable_node(eid);
  const auto report = n.maintenance(clock_);
  for (const std::string& id : report.dropped_bundles) {
    ++metrics_.drops_ttl;
    emit("DROP_TTL", eid, id, join({kv("reason", "ttl"), kv("where", "pending")}));
  }
  route_at(eid);
  schedule(clock_ + config_.maintenance_period_s, EventKind::MaintenanceTick, eid);
}

void World::route_at(const std::string& eid)
{
  NodeState& n = mutable_node(eid);
  if (n.pending().empty()) {
    return;
  }
  const auto nbrs = known_neighbors(eid);
  for (const RoutingAction& action : n.process_pending(nbrs, clock_)) {
    const RoutingDecision& d = action.decision;
    const Bundle& b = *action.snapshot;
    const std::string dist = d.distance_km ? kv("dist", format_number(*d.distance_km)) : std::string();

    if (d.state != action.previous_state && d.kind != RoutingDecision::Kind::Drop) {
      emit("STATE", eid, b.bundle_id,
           join({kv("from", to_string(action.previous_state)), kv("to", to_string(d.state)), dist}));
    }

    for (const std::string& app : d.deliver_to) {
      ++metrics_.delivered;
      Metrics::BundleStats& stats = metrics_.per_bundle[b.bundle_id];
      ++stats.deliveries;
      const double latency = quantize(clock_ - b.created_at);
      if (!stats.first_delivery_latency) {
        stats.first_delivery_latency = latency;
        stats.first_delivery_hops = b.hop_count;
      }
      if (metrics_.intended.contains({b.bundle_id, eid, app})) {
        ++metrics_.intended_delivered;
      }
      emit("DELIVER", eid, b.bundle_id,
           join({kv("app", app), kv("latency", format_number(latency)), kv("hops", std::to_string(b.hop_count))}));
      if (observer_) {
        observer_(eid, app, b, clock_);
      }
    }

    switch (d.kind) {
      case RoutingDecision::Kind::ForwardTo:
      case RoutingDecision::Kind::FloodTo:
      case RoutingDecision::Kind::PointToPoint:
        for (const std::string& to : d.targets) {
          ++metrics_.transmissions;
          ++metrics_.in_flight;
          emit("SEND", eid, b.bundle_id, join({kv("to", to), kv("state", to_string(d.state)), dist}));
          schedule(clock_ + config_.latency_s, EventKind::TransmitComplete, to, SimEvent::Transmit{b, eid});
        }
        break;
      case RoutingDecision::Kind::Hold:
        if (action.newly_held) {
          ++metrics_.holds;
          emit("HOLD", eid, b.bundle_id, join({kv("state", to_string(d.state)), dist}));
        }
        break;
      case RoutingDecision::Kind::Drop:
        if (d.drop_reason != "ttl") {
          throw InvariantViolation("bundle " + b.bundle_id + " dropped at " + eid + ": " + d.drop_reason);
        }
        ++metrics_.drops_ttl;
        emit("DROP_TTL", eid, b.bundle_id, join({kv("reason", "ttl"), kv("where", "pending")}));
        break;
    }
  }
}

void World::check_invariants() const
{
  const Metrics& m = metrics_;
  if (m.transmissions != m.accepted + m.duplicates_suppressed + m.rejected_ttl + m.in_flight) {
    throw InvariantViolation("transmission accounting does not close");
  }
  if (m.delivered > m.created * std::max<std::uint64_t>(total_registrations_, 1)) {
    throw InvariantViolation("more deliveries than created bundles times registrations");
  }
  for (const auto& [eid, n] : nodes_) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const DeliveryRecord& d : n.delivered()) {
      if (!seen.emplace(d.bundle_id, d.app_eid).second) {
        throw InvariantViolation("bundle " + d.bundle_id + " delivered twice to " + d.app_eid);
      }
    }
  }
}

}  // namespace dtnname
