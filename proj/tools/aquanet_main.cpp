#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aquanet/aquanet.hpp"

// Exit codes: 0 success, 2 configuration error (bad flags, unparsable or
// invalid scenario), 3 runtime failure.
int main(int argc, char** argv) {
  CLI::App app{"aquanet: irrigation-botnet attack simulation and water damage assessment"};

  std::string scenario_path;
  std::string phases_csv = "simulate,detect,attack,assess";
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;

  app.add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
  app.add_option("--phases", phases_csv,
                 "comma-separated subset of simulate,detect,attack,assess");
  app.add_option("--out", out_dir, "output directory for the artifact bundle");
  app.add_option("--seed-override", seed_override, "override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const aquanet::PhaseSet phases = aquanet::PhaseSet::parse(phases_csv);
    const aquanet::Scenario scenario = aquanet::load_scenario(scenario_path);
    const aquanet::RunSummary summary =
        aquanet::run_scenario(scenario, phases, out_dir, seed_override);
    for (const auto& line : summary.lines) std::printf("%s\n", line.c_str());
    std::printf("bundle written to %s\n", out_dir.c_str());
    return 0;
  } catch (const aquanet::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 3;
  }
}
