#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "pilotscat/errors.hpp"
#include "pilotscat/runner.hpp"
#include "pilotscat/scenario.hpp"

namespace {

using namespace pilotscat;

// One JSON line on stderr.
void report(const std::string& kind, const std::string& message, int line = 0, const std::string& field = {}) {
  nlohmann::ordered_json j{{"error", kind}, {"message", message}};
  if (line > 0) j["line"] = line;
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << "\n";
}

std::string kind_of(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const NodalSingularity*>(&e)) return "NodalSingularity";
  if (dynamic_cast<const NoRoot*>(&e)) return "NoRoot";
  if (dynamic_cast<const XPointNotFound*>(&e)) return "XPointNotFound";
  if (dynamic_cast<const StepUnderflow*>(&e)) return "StepUnderflow";
  if (dynamic_cast<const RegimeViolation*>(&e)) return "RegimeViolation";
  if (dynamic_cast<const InvalidGrid*>(&e)) return "InvalidGrid";
  if (dynamic_cast<const DegenerateCell*>(&e)) return "DegenerateCell";
  if (dynamic_cast<const InsufficientStatistics*>(&e)) return "InsufficientStatistics";
  return "Error";
}

int execute(Scenario s, const std::string& out, std::optional<std::uint64_t> seed) {
  if (seed) s.seed = *seed;
  const auto m = run_scenario(s, out.empty() ? "out/" + s.name : out);
  std::cout << m.to_json();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pilot-wave scattering trajectories and observables"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version));

  std::string file, preset, out;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", file, "Scenario file")->required();
  run->add_option("--out", out, "Output directory (default out/<name>)");
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* pre = app.add_subcommand("preset", "Run a built-in preset");
  pre->add_option("name", preset, "Preset name")->required();
  pre->add_option("--out", out, "Output directory (default out/<name>)");
  pre->add_option("--seed", seed, "Override the preset seed");

  auto* dump = app.add_subcommand("dump-preset", "Print the canonical text of a preset");
  dump->add_option("name", preset, "Preset name")->required();

  app.add_subcommand("list-presets", "List built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (app.got_subcommand("dump-preset")) {
      std::cout << preset_text(preset);
      return 0;
    }
    if (app.got_subcommand("run")) return execute(load_scenario(file), out, seed);
    return execute(load_preset(preset), out, seed);
  } catch (const ParseError& e) {
    report("ParseError", e.what(), e.line(), e.field());
    return 1;
  } catch (const Error& e) {
    report(kind_of(e), e.what());
    return 1;
  } catch (const std::exception& e) {
    report("InternalError", e.what());
    return 2;
  } catch (...) {
    report("InternalError", "unknown exception");
    return 2;
  }
}
