#include "dtnname/scenario.hpp"

#include "dtnname/text.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dtnname {

namespace {

class LineParser {
public:
  LineParser(std::string_view line, std::size_t number) : rest_(line), number_(number) {}

  std::string_view word(std::string_view what)
  {
    rest_ = trim(rest_);
    std::size_t end = 0;
    while (end < rest_.size() && !is_space(rest_[end])) {
      ++end;
    }
    if (end == 0) {
      syntax("missing " + std::string(what));
    }
    std::string_view w = rest_.substr(0, end);
    rest_.remove_prefix(end);
    return w;
  }

  std::string_view peek()
  {
    LineParser copy = *this;
    rest_ = trim(rest_);
    if (rest_.empty()) {
      return {};
    }
    return copy.word("");
  }

  double number(std::string_view what)
  {
    std::string_view w = word(what);
    auto v = parse_number(w);
    if (!v) {
      syntax("bad " + std::string(what) + " '" + std::string(w) + "'");
    }
    return *v;
  }

  double non_negative(std::string_view what)
  {
    const double v = number(what);
    if (v < 0.0) {
      syntax(std::string(what) + " must be non-negative");
    }
    return v;
  }

  std::string eid(std::string_view what)
  {
    std::string_view w = word(what);
    if (!is_valid_eid(w)) {
      syntax("invalid " + std::string(what) + " '" + std::string(w) + "'");
    }
    return std::string(w);
  }

  GeoPoint point()
  {
    const double lon = number("longitude");
    const double lat = number("latitude");
    try {
      return GeoPoint(lon, lat);
    } catch (const GeoError& e) {
      throw ScenarioError(ScenarioErrorKind::InvalidCoordinate, number_, e.what());
    }
  }

  NameSpecifier specifier()
  {
    std::string_view text = trim(rest_);
    rest_ = {};
    if (text.empty()) {
      syntax("missing specifier");
    }
    try {
      return parse_specifier(text);
    } catch (const SpecifierError& e) {
      syntax(std::string("bad specifier: ") + e.what());
    }
  }

  void end()
  {
    if (!trim(rest_).empty()) {
      syntax("unexpected trailing text '" + std::string(trim(rest_)) + "'");
    }
  }

  [[noreturn]] void syntax(const std::string& what) const
  {
    throw ScenarioError(ScenarioErrorKind::SyntaxError, number_, what);
  }

private:
  std::string_view rest_;
  std::size_t number_;
};

}  // namespace

ScenarioError::ScenarioError(ScenarioErrorKind kind, std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), kind_(kind), line_(line)
{
}

Scenario parse_scenario(std::string_view text)
{
  Scenario s;
  std::set<std::string, std::less<>> declared;
  std::set<std::string, std::less<>> bundle_ids;
  std::size_t number = 0;

  auto require_declared = [&](const std::string& eid) {
    if (!declared.contains(eid)) {
      throw ScenarioError(ScenarioErrorKind::UndeclaredNode, number, "undeclared node '" + eid + "'");
    }
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      eol = text.size();
    }
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++number;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (trim(line).empty()) {
      continue;
    }

    LineParser p(line, number);
    const std::string_view directive = p.word("directive");
    if (directive == "node") {
      std::string eid = p.eid("node EID");
      GeoPoint where = p.point();
      p.end();
      if (!declared.insert(eid).second) {
        p.syntax("node '" + eid + "' declared twice");
      }
      s.nodes.push_back(Scenario::Node{std::move(eid), where});
    } else if (directive == "range") {
      s.radio_range_km = p.non_negative("range");
      p.end();
    } else if (directive == "beacon") {
      s.beacon_period_s = p.number("beacon period");
      if (!(s.beacon_period_s > 0.0)) {
        p.syntax("beacon period must be positive");
      }
      p.end();
    } else if (directive == "latency") {
      s.latency_s = p.non_negative("latency");
      p.end();
    } else if (directive == "seed") {
      std::string_view w = p.word("seed");
      auto seed = parse_unsigned(w);
      if (!seed) {
        p.syntax("bad seed '" + std::string(w) + "'");
      }
      s.seed = *seed;
      p.end();
    } else if (directive == "until") {
      s.until_s = p.non_negative("until");
      p.end();
    } else if (directive == "register") {
      std::string node = p.eid("node EID");
      require_declared(node);
      std::string app = p.eid("application EID");
      const double lifetime = p.non_negative("lifetime");
      s.registrations.push_back(Scenario::Registration{std::move(node), std::move(app), lifetime, p.specifier()});
    } else if (directive == "move") {
      std::string node = p.eid("node EID");
      require_declared(node);
      const double t = p.non_negative("time");
      GeoPoint where = p.point();
      p.end();
      s.moves.push_back(Scenario::Move{std::move(node), t, where});
    } else if (directive == "contact") {
      std::string a = p.eid("node EID");
      require_declared(a);
      std::string b = p.eid("node EID");
      require_declared(b);
      const double open = p.non_negative("open time");
      const double close = p.non_negative("close time");
      p.end();
      if (a == b) {
        p.syntax("contact needs two distinct nodes");
      }
      if (close < open) {
        p.syntax("contact closes before it opens");
      }
      s.contacts.push_back(Scenario::Contact{std::move(a), std::move(b), open, close});
    } else if (directive == "inject") {
      std::string id = p.eid("bundle id");
      std::string src = p.eid("source EID");
      require_declared(src);
      const double t = p.non_negative("injection time");
      std::optional<double> ttl;
      if (p.peek() == "ttl") {
        p.word("ttl");
        ttl = p.non_negative("ttl");
      }
      if (p.word("'dst'") != "dst") {
        p.syntax("expected 'dst' before the destination specifier");
      }
      Scenario::Inject inject{id, std::move(src), t, ttl, p.specifier()};
      try {
        auto [stripped, scope] = extract_predicate(inject.destination);
        if (!scope) {
          p.syntax("destination needs a location subtree to scope routing");
        }
      } catch (const BundleError& e) {
        p.syntax(e.what());
      }
      if (!bundle_ids.insert(id).second) {
        p.syntax("bundle id '" + id + "' injected twice");
      }
      s.injects.push_back(std::move(inject));
    } else {
      p.syntax("unknown directive '" + std::string(directive) + "'");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(ScenarioErrorKind::Io, 0, "cannot read scenario '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const Scenario& s)
{
  std::string out;
  auto line = [&](std::initializer_list<std::string> words) {
    bool first = true;
    for (const std::string& w : words) {
      if (!first) {
        out += ' ';
      }
      out += w;
      first = false;
    }
    out += '\n';
  };
  line({"range", format_number(s.radio_range_km)});
  line({"beacon", format_number(s.beacon_period_s)});
  line({"latency", format_number(s.latency_s)});
  line({"seed", std::to_string(s.seed)});
  line({"until", format_number(s.until_s)});
  for (const auto& n : s.nodes) {
    line({"node", n.eid, to_string(n.location)});
  }
  for (const auto& r : s.registrations) {
    line({"register", r.node, r.app_eid, format_number(r.lifetime_s), serialize(r.specifier)});
  }
  for (const auto& m : s.moves) {
    line({"move", m.node, format_number(m.t), to_string(m.location)});
  }
  for (const auto& c : s.contacts) {
    line({"contact", c.a, c.b, format_number(c.open), format_number(c.close)});
  }
  for (const auto& i : s.injects) {
    std::string ttl = i.ttl_s ? "ttl " + format_number(*i.ttl_s) : std::string();
    if (ttl.empty()) {
      line({"inject", i.bundle_id, i.source, format_number(i.t), "dst", serialize(i.destination)});
    } else {
      line({"inject", i.bundle_id, i.source, format_number(i.t), ttl, "dst", serialize(i.destination)});
    }
  }
  return out;
}

Bundle make_bundle(const Scenario::Inject& inject)
{
  auto [destination, scope] = extract_predicate(inject.destination);
  Bundle b{
      .bundle_id = inject.bundle_id,
      .source_specifier = NameSpecifier({AvPair("eid", inject.source)}),
      .destination_specifier = std::move(destination),
      .meb = Meb{.next_resolver_eid = std::nullopt,
                 .routing_state = RoutingState::Stem,
                 .scope_predicate = scope,
                 .ttl_seconds = inject.ttl_s},
      .payload = {},
      .created_at = inject.t,
      .hop_count = 0,
  };
  validate(b);
  return b;
}

WorldConfig world_config(const Scenario& s)
{
  WorldConfig config;
  config.radio_range_km = s.radio_range_km;
  config.beacon_period_s = s.beacon_period_s;
  config.latency_s = s.latency_s;
  config.seed = s.seed;
  return config;
}

World build_world(const Scenario& s)
{
  World world(world_config(s));
  for (const auto& n : s.nodes) {
    world.add_node(n.eid, n.location);
  }
  for (const auto& r : s.registrations) {
    world.register_app(r.node, r.app_eid, r.specifier, r.lifetime_s);
  }
  for (const auto& m : s.moves) {
    world.add_waypoint(m.node, m.t, m.location);
  }
  for (const auto& c : s.contacts) {
    world.add_contact(c.a, c.b, c.open, c.close);
  }
  for (const auto& i : s.injects) {
    world.inject(i.source, i.t, make_bundle(i));
  }
  return world;
}

}  // namespace dtnname
