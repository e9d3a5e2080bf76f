#include "dtnname/cli.hpp"

#include "dtnname/scenario.hpp"
#include "dtnname/simulator.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dtnname {

namespace {

struct Options {
  std::string scenario;
  std::string trace;
  std::string metrics = "-";
  std::string trace_bundles;
  std::string dump_kb;
  std::optional<std::uint64_t> seed;
  std::optional<double> until;
};

// Outputs are always rewritten in full; "-" means standard output.
bool write_output(const std::string& path, const std::string& content, std::ostream& out, std::ostream& err)
{
  if (path == "-") {
    out << content;
    out.flush();
    return true;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file << content;
  file.close();
  if (!file) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  Options opt;
  CLI::App app{"Run a delay-tolerant network naming scenario"};
  app.name("name_sim");
  app.add_option("--scenario", opt.scenario, "scenario file")->required();
  app.add_option("--trace", opt.trace, "event trace output (path or -)");
  app.add_option("--metrics", opt.metrics, "metrics output (path or -)")->capture_default_str();
  app.add_option("--trace-bundles", opt.trace_bundles, "encoded created bundles (path or -)");
  app.add_option("--dump-kb", opt.dump_kb, "print the knowledge base of this node after the run");
  app.add_option("--seed", opt.seed, "override the scenario seed");
  app.add_option("--until", opt.until, "override the scenario horizon (seconds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  Scenario scenario;
  try {
    scenario = load_scenario(opt.scenario);
  } catch (const ScenarioError& e) {
    err << "error: " << opt.scenario << ": " << e.what() << "\n";
    return 1;
  }
  if (opt.seed) {
    scenario.seed = *opt.seed;
  }
  if (opt.until) {
    if (*opt.until < 0.0) {
      err << "error: --until must be non-negative\n";
      return 1;
    }
    scenario.until_s = *opt.until;
  }

  std::optional<World> world;
  try {
    world.emplace(build_world(scenario));
    if (!opt.dump_kb.empty()) {
      world->node(opt.dump_kb);
    }
  } catch (const std::exception& e) {
    err << "error: " << opt.scenario << ": " << e.what() << "\n";
    return 1;
  }

  try {
    world->run(scenario.until_s);
    world->check_invariants();
  } catch (const std::exception& e) {
    err << "runtime invariant violation: " << e.what() << "\n";
    return 2;
  }

  bool ok = true;
  if (!opt.trace.empty()) {
    ok = write_output(opt.trace, world->trace(), out, err) && ok;
  }
  if (!opt.trace_bundles.empty()) {
    std::string dump;
    for (const std::string& encoded : world->created_bundles()) {
      dump += encoded;
      dump += "\n---\n";
    }
    ok = write_output(opt.trace_bundles, dump, out, err) && ok;
  }
  if (!opt.metrics.empty()) {
    ok = write_output(opt.metrics, world->metrics().to_text(), out, err) && ok;
  }
  if (!opt.dump_kb.empty()) {
    out << world->node(opt.dump_kb).kb().dump();
  }
  return ok ? 0 : 1;
}

}  // namespace dtnname
