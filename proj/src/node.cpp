#include "dtnname/node.hpp"

#include "dtnname/text.hpp"

#include <algorithm>
#include <limits>

namespace dtnname {

namespace {

const NameSpecifier& beacon_specifier()
{
  static const NameSpecifier spec({AvPair(std::string(kBeaconAttribute), std::string(kBeaconValue))});
  return spec;
}

[[noreturn]] void malformed_beacon(const std::string& why)
{
  throw NodeError(NodeErrorKind::MalformedBeacon, "malformed beacon: " + why);
}

// Closest candidate strictly nearer to `target` than `from_km`; ties go to
// the lexicographically smallest EID.
const Neighbor* greedy_next_hop(std::span<const Neighbor> neighbors, const GeoPoint& target, double from_km,
                                std::string_view self)
{
  const Neighbor* best = nullptr;
  double best_km = std::numeric_limits<double>::infinity();
  for (const Neighbor& n : neighbors) {
    if (n.eid == self) {
      continue;
    }
    const double d = distance_km(n.location, target);
    if (!(d < from_km)) {
      continue;
    }
    if (d < best_km || (d == best_km && best != nullptr && n.eid < best->eid)) {
      best = &n;
      best_km = d;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(RoutingDecision::Kind kind) noexcept
{
  switch (kind) {
    case RoutingDecision::Kind::ForwardTo:
      return "ForwardTo";
    case RoutingDecision::Kind::Hold:
      return "Hold";
    case RoutingDecision::Kind::FloodTo:
      return "FloodTo";
    case RoutingDecision::Kind::PointToPoint:
      return "PointToPoint";
    case RoutingDecision::Kind::Drop:
      return "Drop";
  }
  return "?";
}

bool is_beacon(const Bundle& b) noexcept
{
  return b.destination_specifier == beacon_specifier();
}

NodeState::NodeState(std::string canonical_eid, GeoPoint location, double beacon_period_s)
    : canonical_eid_(std::move(canonical_eid)), location_(location), beacon_period_(beacon_period_s)
{
  if (!is_valid_eid(canonical_eid_)) {
    throw std::invalid_argument("invalid canonical EID '" + canonical_eid_ + "'");
  }
  if (!(beacon_period_ > 0.0)) {
    throw std::invalid_argument("beacon period must be positive");
  }
}

void NodeState::register_app(const std::string& app_eid, const NameSpecifier& ns, double lifetime_s, double now)
{
  if (!is_valid_eid(app_eid)) {
    throw std::invalid_argument("invalid application EID '" + app_eid + "'");
  }
  if (!(lifetime_s >= 0.0)) {
    throw std::invalid_argument("registration lifetime must be non-negative");
  }
  const double expires_at = now + lifetime_s;
  kb_.insert(ns, NameRecord{app_eid, {}, expires_at}, now);
  auto it = std::find_if(registrations_.begin(), registrations_.end(), [&](const Registration& r) {
    return r.app_eid == app_eid && r.specifier == ns;
  });
  if (it != registrations_.end()) {
    it->expires_at = expires_at;
  } else {
    registrations_.push_back(Registration{app_eid, ns, expires_at});
  }
}

Bundle NodeState::make_beacon(double now)
{
  const std::string body =
      canonical_eid_ + " " + to_string(location_) + " " + format_number(now);
  return Bundle{
      .bundle_id = "beacon:" + canonical_eid_ + ":" + std::to_string(beacon_seq_++),
      .source_specifier = NameSpecifier({AvPair("eid", canonical_eid_)}),
      .destination_specifier = beacon_specifier(),
      .meb = Meb{.next_resolver_eid = std::nullopt,
                 .routing_state = RoutingState::Flood,
                 .scope_predicate = std::nullopt,
                 .ttl_seconds = beacon_period_},
      .payload = to_bytes(body),
      .created_at = now,
      .hop_count = 0,
  };
}

bool NodeState::apply_beacon(const Bundle& beacon, double /*now*/)
{
  if (!is_beacon(beacon)) {
    malformed_beacon("not addressed to " + serialize(beacon_specifier()));
  }
  auto words = split_words(as_text(beacon.payload));
  if (words.size() != 4) {
    malformed_beacon("payload must be '<eid> <lon> <lat> <time>'");
  }
  const auto lon = parse_number(words[1]);
  const auto lat = parse_number(words[2]);
  const auto sent_at = parse_number(words[3]);
  if (!is_valid_eid(words[0]) || !lon || !lat || !sent_at) {
    malformed_beacon("unparseable payload");
  }
  std::string eid(words[0]);
  if (eid == canonical_eid_) {
    return false;
  }
  std::optional<GeoPoint> where;
  try {
    where.emplace(*lon, *lat);
  } catch (const GeoError& e) {
    malformed_beacon(e.what());
  }
  auto it = node_table_.find(eid);
  if (it == node_table_.end()) {
    node_table_.emplace(eid, NodeTableEntry{eid, *where, *sent_at});
    return true;
  }
  if (*sent_at <= it->second.updated_at) {
    return false;
  }
  it->second.location = *where;
  it->second.updated_at = *sent_at;
  return true;
}

RoutingDecision NodeState::route_bundle(Bundle& b, std::span<const Neighbor> neighbors, double now,
                                        std::string_view arrived_from) const
{
  RoutingDecision decision;
  decision.state = b.meb.routing_state;

  if (is_expired(b, now)) {
    decision.kind = RoutingDecision::Kind::Drop;
    decision.drop_reason = "ttl";
    return decision;
  }

  if (b.meb.next_resolver_eid && !b.meb.next_resolver_eid->empty()) {
    const std::string& resolver = *b.meb.next_resolver_eid;
    decision.state = RoutingState::PointToPoint;
    b.meb.routing_state = decision.state;
    if (resolver == canonical_eid_) {
      decision.kind = RoutingDecision::Kind::Drop;
      decision.drop_reason = "self-addressed";
      return decision;
    }
    auto direct = std::find_if(neighbors.begin(), neighbors.end(),
                               [&](const Neighbor& n) { return n.eid == resolver; });
    if (direct != neighbors.end()) {
      decision.kind = RoutingDecision::Kind::PointToPoint;
      decision.targets = {resolver};
      return decision;
    }
    // Resolver out of reach: head towards its last beaconed position.
    if (auto known = node_table_.find(resolver); known != node_table_.end()) {
      const GeoPoint& target = known->second.location;
      if (const Neighbor* hop = greedy_next_hop(neighbors, target, distance_km(location_, target), canonical_eid_)) {
        decision.kind = RoutingDecision::Kind::PointToPoint;
        decision.targets = {hop->eid};
        return decision;
      }
    }
    decision.kind = RoutingDecision::Kind::Hold;
    return decision;
  }

  if (!b.meb.scope_predicate) {
    throw NodeError(NodeErrorKind::MissingPredicate,
                    "bundle " + b.bundle_id + " has no within-predicate to route by");
  }
  const WithinPredicate& scope = *b.meb.scope_predicate;
  const double here_km = distance_km(location_, scope.center());
  decision.distance_km = here_km;

  if (here_km > scope.radius_km()) {
    decision.state = RoutingState::Stem;
    b.meb.routing_state = decision.state;
    if (const Neighbor* hop = greedy_next_hop(neighbors, scope.center(), here_km, canonical_eid_)) {
      decision.kind = RoutingDecision::Kind::ForwardTo;
      decision.targets = {hop->eid};
    } else {
      decision.kind = RoutingDecision::Kind::Hold;
    }
    return decision;
  }

  decision.state = RoutingState::Flood;
  b.meb.routing_state = decision.state;
  decision.kind = RoutingDecision::Kind::FloodTo;

  for (const Registration& reg : registrations_) {
    if (reg.expires_at < now || !matches(b.destination_specifier, reg.specifier)) {
      continue;
    }
    if (delivered_keys_.contains({b.bundle_id, reg.app_eid})) {
      continue;
    }
    if (std::find(decision.deliver_to.begin(), decision.deliver_to.end(), reg.app_eid) ==
        decision.deliver_to.end()) {
      decision.deliver_to.push_back(reg.app_eid);
    }
  }
  std::sort(decision.deliver_to.begin(), decision.deliver_to.end());

  const PendingBundle* entry = find_pending(b.bundle_id);
  for (const Neighbor& n : neighbors) {
    if (n.eid == canonical_eid_ || n.eid == arrived_from || !within(n.location, scope)) {
      continue;
    }
    if (entry != nullptr && entry->handed_to.contains(n.eid)) {
      continue;
    }
    decision.targets.push_back(n.eid);
  }
  std::sort(decision.targets.begin(), decision.targets.end());
  return decision;
}

AcceptResult NodeState::accept_bundle(const Bundle& b, std::string_view from, double now)
{
  AcceptResult result;
  if (is_beacon(b)) {
    apply_beacon(b, now);
    result.outcome = AcceptOutcome::Beacon;
    return result;
  }
  if (is_expired(b, now)) {
    result.outcome = AcceptOutcome::Expired;
    return result;
  }
  if (seen_ids_.contains(b.bundle_id)) {
    result.outcome = AcceptOutcome::Duplicate;
    return result;
  }
  seen_ids_.insert(b.bundle_id);
  Bundle copy = b;
  ++copy.hop_count;

  if (copy.meb.next_resolver_eid && *copy.meb.next_resolver_eid == canonical_eid_) {
    try {
      Bundle inner = decapsulate(copy);
      inner.hop_count += copy.hop_count;
      result.inner_id = inner.bundle_id;
      if (seen_ids_.contains(inner.bundle_id)) {
        result.inner_duplicate = true;
      } else {
        seen_ids_.insert(inner.bundle_id);
        enqueue(std::move(inner), from);
      }
    } catch (const std::exception& e) {
      result.inner_error = e.what();
    }
    return result;
  }
  enqueue(std::move(copy), from);
  return result;
}

void NodeState::originate(const Bundle& b)
{
  validate(b);
  if (b.meb.next_resolver_eid && *b.meb.next_resolver_eid == canonical_eid_) {
    Bundle inner = decapsulate(b);
    seen_ids_.insert(b.bundle_id);
    seen_ids_.insert(inner.bundle_id);
    enqueue(std::move(inner), {});
    return;
  }
  seen_ids_.insert(b.bundle_id);
  enqueue(b, {});
}

std::vector<std::string> NodeState::resolve_local(const NameSpecifier& query, double now) const
{
  std::vector<std::string> eids;
  for (const NameRecord& r : kb_.lookup(query, now)) {
    if (eids.empty() || eids.back() != r.destination_eid) {
      eids.push_back(r.destination_eid);
    }
  }
  return eids;
}

std::vector<RoutingAction> NodeState::process_pending(std::span<const Neighbor> neighbors, double now)
{
  std::vector<RoutingAction> actions;
  std::vector<std::string> finished;

  for (PendingBundle& entry : pending_) {
    RoutingAction action;
    action.bundle_id = entry.bundle.bundle_id;
    action.previous_state = entry.bundle.meb.routing_state;
    action.hop_count = entry.bundle.hop_count;
    action.created_at = entry.bundle.created_at;
    action.decision = route_bundle(entry.bundle, neighbors, now, entry.arrived_from);
    RoutingDecision& d = action.decision;

    for (const std::string& app : d.deliver_to) {
      delivered_keys_.emplace(entry.bundle.bundle_id, app);
      delivered_.push_back(DeliveryRecord{entry.bundle.bundle_id, app, now});
    }

    bool effect = !d.deliver_to.empty() || d.state != action.previous_state;
    switch (d.kind) {
      case RoutingDecision::Kind::Hold:
        action.newly_held = !entry.held;
        entry.held = true;
        effect = effect || action.newly_held;
        break;
      case RoutingDecision::Kind::FloodTo:
        entry.held = false;
        entry.handed_to.insert(d.targets.begin(), d.targets.end());
        effect = effect || !d.targets.empty();
        break;
      case RoutingDecision::Kind::ForwardTo:
      case RoutingDecision::Kind::PointToPoint:
        finished.push_back(entry.bundle.bundle_id);
        effect = true;
        break;
      case RoutingDecision::Kind::Drop:
        finished.push_back(entry.bundle.bundle_id);
        effect = true;
        break;
    }
    if (effect) {
      action.snapshot = entry.bundle;
      actions.push_back(std::move(action));
    }
  }

  std::erase_if(pending_, [&](const PendingBundle& p) {
    return std::find(finished.begin(), finished.end(), p.bundle.bundle_id) != finished.end();
  });
  return actions;
}

NodeState::MaintenanceReport NodeState::maintenance(double now)
{
  MaintenanceReport report;
  report.expired_records = kb_.expire(now);
  std::erase_if(registrations_, [&](const Registration& r) { return r.expires_at < now; });
  for (const PendingBundle& p : pending_) {
    if (is_expired(p.bundle, now)) {
      report.dropped_bundles.push_back(p.bundle.bundle_id);
    }
  }
  std::erase_if(pending_, [&](const PendingBundle& p) { return is_expired(p.bundle, now); });
  return report;
}

NodeState::PendingBundle* NodeState::find_pending(std::string_view bundle_id)
{
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [&](const PendingBundle& p) { return p.bundle.bundle_id == bundle_id; });
  return it == pending_.end() ? nullptr : &*it;
}

const NodeState::PendingBundle* NodeState::find_pending(std::string_view bundle_id) const
{
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [&](const PendingBundle& p) { return p.bundle.bundle_id == bundle_id; });
  return it == pending_.end() ? nullptr : &*it;
}

void NodeState::enqueue(Bundle b, std::string_view from)
{
  pending_.push_back(PendingBundle{std::move(b), std::string(from), {}, false});
}

}  // namespace dtnname
