// One PASS/FAIL line per acceptance criterion; exit status is non-zero if any
// criterion fails.

#include "dtnname/bundle.hpp"
#include "dtnname/cli.hpp"
#include "dtnname/geo.hpp"
#include "dtnname/name_specifier.hpp"
#include "dtnname/name_tree.hpp"
#include "dtnname/scenario.hpp"
#include "dtnname/simulator.hpp"
#include "dtnname/text.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

using namespace dtnname;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int number, bool ok, const std::string& title, const std::string& detail)
{
  std::cout << (ok ? "PASS" : "FAIL") << " [" << number << "] " << title << ": " << detail << "\n";
  failures += ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Trace parsing

struct TraceLine {
  double t = 0.0;
  std::string ev;
  std::string node;
  std::string bundle;
  std::map<std::string, std::string> detail;
};

std::vector<TraceLine> parse_trace(const std::string& trace)
{
  std::vector<TraceLine> out;
  std::istringstream in(trace);
  std::string line;
  while (std::getline(in, line)) {
    TraceLine tl;
    std::istringstream words(line);
    std::string w;
    while (words >> w) {
      const auto eq = w.find('=');
      const std::string key = w.substr(0, eq);
      const std::string value = w.substr(eq + 1);
      if (key == "t") {
        tl.t = std::stod(value);
      } else if (key == "ev") {
        tl.ev = value;
      } else if (key == "node") {
        tl.node = value;
      } else if (key == "bundle") {
        tl.bundle = value;
      } else if (key == "detail") {
        std::istringstream parts(value);
        std::string kv;
        while (std::getline(parts, kv, ',')) {
          const auto e = kv.find('=');
          if (e != std::string::npos) {
            tl.detail[kv.substr(0, e)] = kv.substr(e + 1);
          }
        }
      }
    }
    out.push_back(std::move(tl));
  }
  return out;
}

// (node, bundle) pairs that appear more than once among accepted receptions.
std::size_t repeated_receptions(const std::string& trace)
{
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t repeats = 0;
  for (const TraceLine& l : parse_trace(trace)) {
    if (l.ev == "RECV" && !seen.emplace(l.node, l.bundle).second) {
      ++repeats;
    }
  }
  return repeats;
}

// ---------------------------------------------------------------------------
// Scenario construction

constexpr double kKmPerDegreeLat = kEarthRadiusKm * std::numbers::pi / 180.0;

std::string location_subtree(const GeoPoint& c, double radius_km)
{
  return "[location=target [longitude=" + format_number(c.longitude()) + " degrees] [latitude=" +
         format_number(c.latitude()) + " degrees] [distance=" + format_number(radius_km) + " km]]";
}

double oracle_km(const GeoPoint& a, const GeoPoint& b)
{
  return oracle::great_circle_km(a.longitude(), a.latitude(), b.longitude(), b.latitude());
}

bool connected_graph(const std::vector<GeoPoint>& pts, double range_km)
{
  std::vector<bool> reached(pts.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  reached[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!reached[j] && oracle_km(pts[i], pts[j]) <= range_km) {
        reached[j] = true;
        ++count;
        frontier.push(j);
      }
    }
  }
  return count == pts.size();
}

// Uniform placement in a square around (116, 40), redrawn until the unit-disk
// graph is connected.
Scenario random_static_scenario(gen::Rng& rng)
{
  std::uniform_int_distribution<int> node_count(20, 50);
  const int n = node_count(rng);
  const double side_km = 0.6 * std::sqrt(static_cast<double>(n));
  const double km_per_lon = kKmPerDegreeLat * std::cos(40.0 * std::numbers::pi / 180.0);
  std::uniform_real_distribution<double> coord(0.0, side_km);

  std::vector<GeoPoint> pts;
  do {
    pts.clear();
    for (int i = 0; i < n; ++i) {
      pts.emplace_back(116.0 + coord(rng) / km_per_lon, 40.0 + coord(rng) / kKmPerDegreeLat);
    }
  } while (!connected_graph(pts, 1.0));

  Scenario s;
  s.radio_range_km = 1.0;
  s.until_s = 80;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const std::string eid = "n" + std::to_string(i);
    s.nodes.push_back(Scenario::Node{eid, pts[static_cast<std::size_t>(i)]});
    const char* spec = unit(rng) < 0.3 ? "[role=general]" : "[role=soldier]";
    s.registrations.push_back(Scenario::Registration{eid, "dtn://" + eid + "/app", 1000, parse_specifier(spec)});
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_real_distribution<double> radius(0.3, 1.5);
  for (int b = 0; b < 3; ++b) {
    const GeoPoint center(116.0 + coord(rng) / km_per_lon, 40.0 + coord(rng) / kKmPerDegreeLat);
    s.injects.push_back(Scenario::Inject{
        "b" + std::to_string(b), "n" + std::to_string(pick(rng)), 1.0 + b, 60.0,
        parse_specifier("[role=general] " + location_subtree(center, radius(rng)))});
  }
  return s;
}

// Grid of 5x5 nodes about 1 km apart; three generals sit inside the target
// region, one general and one soldier outside or off-name.
Scenario grid_scenario()
{
  Scenario s;
  s.radio_range_km = 1.2;
  s.until_s = 60;
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      s.nodes.push_back(Scenario::Node{"g" + std::to_string(r) + std::to_string(c),
                                       GeoPoint(116.0 + 0.0117 * c, 40.0 + 0.009 * r)});
    }
  }
  auto reg = [&](const std::string& node, const std::string& spec) {
    s.registrations.push_back(Scenario::Registration{node, "dtn://" + node + "/app", 1000, parse_specifier(spec)});
  };
  reg("g22", "[role=general [mission=command]]");
  reg("g12", "[role=general]");
  reg("g23", "[role=general [mission=logistics]]");
  reg("g21", "[role=soldier]");
  reg("g44", "[role=general]");
  s.injects.push_back(Scenario::Inject{"grid-b1", "g00", 5.0, 120.0,
                                       parse_specifier("[role=general] " +
                                                       location_subtree(GeoPoint(116.0234, 40.018), 1.6))});
  return s;
}

// Two three-node partitions bridged only by an a3-b1 contact from t=100.
Scenario disruption_scenario()
{
  Scenario s;
  s.radio_range_km = 1.0;
  s.latency_s = 0.1;
  s.until_s = 300;
  const double step = 0.8 / (kKmPerDegreeLat * std::cos(40.0 * std::numbers::pi / 180.0));
  const char* names[] = {"a1", "a2", "a3", "b1", "b2", "b3"};
  for (int i = 0; i < 6; ++i) {
    s.nodes.push_back(Scenario::Node{names[i], GeoPoint(116.0 + step * i, 40.0)});
  }
  s.contacts.push_back(Scenario::Contact{"a3", "b1", 100, 200});
  s.registrations.push_back(Scenario::Registration{"b3", "dtn://b3/app", 1000, parse_specifier("[role=general]")});
  s.injects.push_back(Scenario::Inject{"dis-b1", "a1", 10.0, 250.0,
                                       parse_specifier("[role=general] " +
                                                       location_subtree(GeoPoint(116.0 + step * 5, 40.0), 0.3))});
  return s;
}

std::string temp_file(const std::string& name)
{
  return (std::filesystem::temp_directory_path() / ("dtnname_acceptance_" + name)).string();
}

std::string slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cli(const std::vector<std::string>& args)
{
  std::vector<const char*> argv{"name_sim"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

// ---------------------------------------------------------------------------
// Criteria

void parser_round_trip()
{
  const auto start = Clock::now();
  gen::Rng rng(1);
  int failed = 0;
  const int total = 2000;
  for (int i = 0; i < total; ++i) {
    const NameSpecifier ns = gen::specifier(rng);
    try {
      if (parse_specifier(serialize(ns)) != ns) {
        ++failed;
      }
    } catch (const std::exception&) {
      ++failed;
    }
  }
  const double took = seconds_since(start);
  report(1, failed == 0 && took < 5.0, "parser round-trip",
         std::to_string(total) + " specifiers, " + std::to_string(failed) + " failures, " + format_number(took) +
             " s (limit 5 s)");
}

void figure_fidelity()
{
  bool ok = true;
  const NameSpecifier role = parse_specifier("[role = general [mission = command]]");
  ok = ok && role.roots().size() == 1 && role.roots()[0].attribute() == "role" &&
       role.roots()[0].value() == "general" && role.roots()[0].children().size() == 1 &&
       role.roots()[0].children()[0] == AvPair("mission", "command");

  const NameSpecifier location =
      parse_specifier("[ location = known [ longitude = 116 degrees ] [ latitude = 112 degrees ] ]");
  const AvPair* loc = location.root("location");
  ok = ok && loc != nullptr && loc->value() == "known" && loc->children().size() == 2 &&
       loc->child("longitude") != nullptr && loc->child("longitude")->value() == "116 degrees" &&
       loc->child("latitude") != nullptr && loc->child("latitude")->value() == "112 degrees";

  // 112 degrees is not a valid latitude, so the predicate uses a real one;
  // the longitude and radius under test are unchanged.
  auto [rest, pred] = extract_predicate(parse_specifier(
      "[role=general] [location=known [longitude=116 degrees] [latitude=40 degrees] [distance=2 km]]"));
  ok = ok && pred.has_value() && pred->center().longitude() == 116.0 && pred->radius_km() == 2.0 &&
       serialize(rest) == "[role=general]";

  report(2, ok, "example specifier fidelity",
         "role/mission and location/longitude/latitude trees exact; predicate lon=116, radius=2 km");
}

void name_tree_oracle()
{
  const auto start = Clock::now();
  gen::Rng rng(3);
  gen::Shape narrow;
  narrow.max_depth = 3;
  narrow.max_fanout = 3;
  narrow.attributes = 3;
  narrow.values = 3;
  std::vector<NameSpecifier> queries;
  for (int i = 0; i < 100; ++i) {
    queries.push_back(gen::specifier(rng, narrow));
  }
  NameTree tree;
  oracle::FlatStore flat;
  std::uniform_real_distribution<double> life(0.0, 100.0);
  double now = 0.0;
  std::size_t mismatches = 0;
  std::size_t comparisons = 0;
  for (int i = 0; i < 100; ++i) {
    const NameSpecifier s = gen::specifier(rng, narrow);
    const NameRecord r{"E" + std::to_string(i % 41), {}, now + life(rng)};
    tree.insert(s, r, now);
    flat.insert(s, r);
    if (i % 10 == 9) {
      now += 7.0;
      tree.expire(now);
      flat.expire(now);
    }
    for (const NameSpecifier& q : queries) {
      auto got = tree.lookup(q, now);
      oracle::FlatStore::normalize(got);
      mismatches += got == flat.lookup(q, now) ? 0 : 1;
      ++comparisons;
    }
  }
  const double took = seconds_since(start);
  report(3, mismatches == 0 && took < 10.0, "name-tree oracle equivalence",
         std::to_string(comparisons) + " lookups, " + std::to_string(mismatches) + " mismatches, " +
             format_number(took) + " s (limit 10 s)");
}

void distance_oracle()
{
  gen::Rng rng(4);
  std::uniform_real_distribution<double> lon(-180, 180);
  std::uniform_real_distribution<double> lat(-90, 90);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const GeoPoint a(lon(rng), lat(rng));
    const GeoPoint b(lon(rng), lat(rng));
    const double expected = oracle_km(a, b);
    worst = std::max(worst, std::abs(distance_km(a, b) - expected) / expected);
  }
  const double antipodal = distance_km(GeoPoint(0, 0), GeoPoint(180, 0));
  const bool ok = worst <= 1e-9 && std::abs(antipodal - 20015.09) <= 0.01;
  report(4, ok, "distance oracle",
         "10000 pairs, worst relative error " + format_number(worst) + " (limit 1e-9); antipodal " +
             format_number(antipodal) + " km");
}

struct RandomRuns {
  std::size_t stem_hops = 0;
  std::size_t stem_violations = 0;
  std::size_t flood_sends = 0;
  std::size_t flood_violations = 0;
  std::vector<std::string> traces;
};

RandomRuns random_static_runs()
{
  RandomRuns runs;
  gen::Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Scenario s = random_static_scenario(rng);
    std::map<std::string, GeoPoint> where;
    for (const auto& n : s.nodes) {
      where.emplace(n.eid, n.location);
    }
    std::map<std::string, WithinPredicate> scope;
    for (const auto& inj : s.injects) {
      scope.emplace(inj.bundle_id, *make_bundle(inj).meb.scope_predicate);
    }

    World w = build_world(s);
    w.run(s.until_s);
    w.check_invariants();
    for (const TraceLine& l : parse_trace(w.trace())) {
      if (l.ev != "SEND") {
        continue;
      }
      const WithinPredicate& p = scope.at(l.bundle);
      const GeoPoint& from = where.at(l.node);
      const GeoPoint& to = where.at(l.detail.at("to"));
      if (l.detail.at("state") == "STEM") {
        ++runs.stem_hops;
        runs.stem_violations += oracle_km(to, p.center()) < oracle_km(from, p.center()) ? 0 : 1;
      } else if (l.detail.at("state") == "FLOOD") {
        ++runs.flood_sends;
        runs.flood_violations += oracle_km(to, p.center()) <= p.radius_km() ? 0 : 1;
      }
    }
    runs.traces.push_back(w.trace());
  }
  return runs;
}

void stem_and_flood(const RandomRuns& runs)
{
  report(5, runs.stem_violations == 0 && runs.stem_hops > 0, "STEM monotone progress",
         "50 scenarios, " + std::to_string(runs.stem_hops) + " STEM hops, " + std::to_string(runs.stem_violations) +
             " violations");
  report(6, runs.flood_violations == 0 && runs.flood_sends > 0, "FLOOD scoping",
         "50 scenarios, " + std::to_string(runs.flood_sends) + " FLOOD sends, " +
             std::to_string(runs.flood_violations) + " violations");
}

std::string grid_completeness()
{
  const auto start = Clock::now();
  const Scenario s = grid_scenario();
  World w = build_world(s);
  std::map<std::string, int> per_node;
  w.on_delivery([&](const std::string& node, const std::string&, const Bundle&, double) { ++per_node[node]; });
  const Metrics& m = w.run(s.until_s);
  w.check_invariants();
  const double took = seconds_since(start);
  const std::map<std::string, int> expected{{"g12", 1}, {"g22", 1}, {"g23", 1}};
  const bool ok = per_node == expected && m.delivery_ratio() == 1.0 && m.duplicates_suppressed > 0 && took < 2.0;
  std::string who;
  for (const auto& [node, count] : per_node) {
    who += (who.empty() ? "" : " ") + node + "x" + std::to_string(count);
  }
  report(7, ok, "grid delivery completeness",
         "deliveries {" + who + "}, delivery_ratio=" + format_decimal(m.delivery_ratio()) +
             ", duplicates_suppressed=" + std::to_string(m.duplicates_suppressed) + ", " + format_number(took) +
             " s (limit 2 s)");
  return w.trace();
}

std::string disruption()
{
  const Scenario s = disruption_scenario();
  World w = build_world(s);
  std::vector<double> at;
  w.on_delivery([&](const std::string&, const std::string&, const Bundle&, double t) { at.push_back(t); });
  w.run(s.until_s);
  w.check_invariants();
  const double limit = 100.0 + 10.0 * s.latency_s;
  const bool ok = at.size() == 1 && at[0] > 100.0 && at[0] < limit;
  report(8, ok, "disruption tolerance",
         at.empty() ? std::string("no delivery")
                    : "delivered at t=" + format_number(at[0]) + " (window (100, " + format_number(limit) + "))");
  return w.trace();
}

void determinism(gen::Rng& rng)
{
  const std::vector<std::pair<std::string, Scenario>> cases = {
      {"grid", grid_scenario()}, {"disruption", disruption_scenario()}, {"random", random_static_scenario(rng)}};
  bool ok = true;
  std::size_t bytes = 0;
  for (const auto& [name, s] : cases) {
    const std::string scn = temp_file(name + ".scn");
    std::ofstream(scn, std::ios::binary) << format_scenario(s);
    std::string outputs[2][2];
    for (int run = 0; run < 2; ++run) {
      const std::string trace = temp_file(name + ".trace" + std::to_string(run));
      const std::string metrics = temp_file(name + ".metrics" + std::to_string(run));
      ok = ok && cli({"--scenario", scn, "--seed", "42", "--trace", trace, "--metrics", metrics}) == 0;
      outputs[run][0] = slurp(trace);
      outputs[run][1] = slurp(metrics);
    }
    ok = ok && !outputs[0][0].empty() && outputs[0][0] == outputs[1][0] && outputs[0][1] == outputs[1][1];
    bytes += outputs[0][0].size();
  }
  report(9, ok, "determinism",
         "3 scenarios run twice through the CLI, " + std::to_string(bytes) + " trace bytes compared");
}

struct EnvelopeRun {
  bool ok = false;
  std::string detail;
  std::string trace;
};

EnvelopeRun envelope_round_trip()
{
  std::string detail;
  const double step = 0.8 / (kKmPerDegreeLat * std::cos(40.0 * std::numbers::pi / 180.0));
  World w(WorldConfig{});
  w.add_node("A", GeoPoint(116.0, 40.0));
  w.add_node("B", GeoPoint(116.0 + step, 40.0));
  w.add_node("C", GeoPoint(116.0 + 2 * step, 40.0));
  w.register_app("C", "dtn://C/app", parse_specifier("[role=general [mission=command]]"), 1000);

  const Bundle inner{
      .bundle_id = "inner-1",
      .source_specifier = parse_specifier("[eid=A] [role=soldier]"),
      .destination_specifier = parse_specifier("[role=general]"),
      .meb = Meb{.next_resolver_eid = std::nullopt,
                 .routing_state = RoutingState::Stem,
                 .scope_predicate = WithinPredicate(GeoPoint(116.0 + 2 * step, 40.0), 0.3),
                 .ttl_seconds = 100.0},
      .payload = to_bytes("orders: hold the bridge"),
      .created_at = 1.0,
      .hop_count = 0,
  };
  w.inject("A", 1.0, encapsulate(inner, "B", 1.0));

  std::vector<Bundle> delivered;
  std::vector<std::string> where;
  w.on_delivery([&](const std::string& node, const std::string&, const Bundle& b, double) {
    delivered.push_back(b);
    where.push_back(node);
  });
  w.run(20);
  w.check_invariants();

  bool ok = delivered.size() == 1 && where[0] == "C";
  if (ok) {
    Bundle got = delivered[0];
    // hop count and routing state are rewritten in transit by design.
    detail = "hops=" + std::to_string(got.hop_count) + ", state=" + std::string(to_string(got.meb.routing_state));
    got.hop_count = inner.hop_count;
    got.meb.routing_state = inner.meb.routing_state;
    ok = got == inner;
  }
  const bool decapsulated_at_b = w.trace().find("ev=RECV node=B bundle=inner-1 detail=from=A,decap=") != std::string::npos;
  ok = ok && decapsulated_at_b;
  return {ok, "A -> B (resolver, unwraps) -> C; inner bundle equal to original" +
                  (detail.empty() ? std::string() : " (" + detail + ")"),
          w.trace()};
}

}  // namespace

int main()
{
  try {
    parser_round_trip();
    figure_fidelity();
    name_tree_oracle();
    distance_oracle();

    const RandomRuns runs = random_static_runs();
    stem_and_flood(runs);

    std::vector<std::string> traces = runs.traces;
    traces.push_back(grid_completeness());
    traces.push_back(disruption());

    gen::Rng rng(9);
    determinism(rng);

    const EnvelopeRun envelope = envelope_round_trip();
    traces.push_back(envelope.trace);

    std::size_t repeats = 0;
    std::size_t receptions = 0;
    for (const std::string& t : traces) {
      repeats += repeated_receptions(t);
      for (const TraceLine& l : parse_trace(t)) {
        receptions += l.ev == "RECV" ? 1 : 0;
      }
    }
    report(10, repeats == 0 && receptions > 0, "at-most-once acceptance",
           std::to_string(traces.size()) + " runs, " + std::to_string(receptions) + " receptions, " +
               std::to_string(repeats) + " repeats");
    report(11, envelope.ok, "envelope round-trip", envelope.detail);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << "\n";
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
