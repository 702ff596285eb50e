// Command-line front end: runs scenario files through the library and writes
// deterministic JSON/CSV bundles. Exit codes: 0 success, 1 error, 2 when
// --strict is set and any diagnostic verdict came back INCONCLUSIVE.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "symscope/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out = ".";
  bool strict = false;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario, "Scenario JSON file")
      ->required();
  cmd->add_option("--out", args.out, "Output directory (default: .)");
  cmd->add_flag("--strict", args.strict,
                "Exit 2 if any verdict is INCONCLUSIVE");
  cmd->add_option("--jobs", args.jobs, "Worker threads (default: 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
}

void apply_dimension_cap_env() {
  const char* cap = std::getenv("SYMSCOPE_DIM_CAP");
  if (!cap || !*cap) return;
  char* end = nullptr;
  long long v = std::strtoll(cap, &end, 10);
  if (!end || *end != '\0' || v < 2)
    throw symscope::ScenarioError(
        std::string("SYMSCOPE_DIM_CAP: expected an integer >= 2, got '") +
        cap + "'");
  symscope::set_dimension_cap(v);
}

int emit(const CommonArgs& args, const symscope::RunResult& result,
         const std::string& suffix) {
  namespace fs = std::filesystem;
  std::string name = result.bundle.at("name").get<std::string>();
  fs::path dir(args.out);
  if (!dir.empty()) fs::create_directories(dir);
  fs::path json_path = dir / (name + "." + suffix + ".json");
  symscope::write_text_file(json_path.string(),
                            symscope::serialize_json(result.bundle));
  std::printf("wrote %s\n", json_path.string().c_str());
  if (!result.csv.empty()) {
    fs::path csv_path = dir / (name + "." + suffix + ".csv");
    symscope::write_text_file(csv_path.string(), result.csv);
    std::printf("wrote %s\n", csv_path.string().c_str());
  }
  if (result.bundle.contains("reports")) {
    for (const auto& r : result.bundle.at("reports")) {
      std::string line = r.at("id").get<std::string>();
      if (r.contains("verdict"))
        line += "  " + r.at("verdict").get<std::string>();
      std::printf("  %s\n", line.c_str());
    }
  }
  if (result.bundle.contains("class_trivial"))
    std::printf("  class: %s\n",
                result.bundle.at("class_trivial").get<bool>()
                    ? "TRIVIAL"
                    : "NONTRIVIAL");
  if (result.any_inconclusive) {
    std::printf("  verdicts include INCONCLUSIVE\n");
    if (args.strict) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symscope: strong-symmetry and anomaly diagnostics"};
  app.require_subcommand(1);

  CommonArgs diagnose_args, cohomology_args, anomaly_args, channel_args,
      sweep_args;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "Run the diagnostics of a scenario");
  add_common(diagnose, diagnose_args);
  CLI::App* cohomology =
      app.add_subcommand("cohomology", "Run a cohomology check scenario");
  add_common(cohomology, cohomology_args);
  CLI::App* anomaly =
      app.add_subcommand("anomaly", "Extract anomaly data from a scenario");
  add_common(anomaly, anomaly_args);
  CLI::App* channel =
      app.add_subcommand("channel", "Run a channel scenario");
  add_common(channel, channel_args);
  CLI::App* sweep =
      app.add_subcommand("sweep", "Sweep a diagnostic over system sizes");
  add_common(sweep, sweep_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's error-code zoo: anything but help/version is exit 1.
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    apply_dimension_cap_env();
    if (diagnose->parsed()) {
      symscope::Json j = symscope::load_scenario_file(diagnose_args.scenario);
      std::string fname =
          std::filesystem::path(diagnose_args.scenario).filename().string();
      symscope::Scenario s =
          symscope::parse_scenario(j, fname, diagnose_args.seed);
      return emit(diagnose_args, symscope::run_scenario(s, diagnose_args.jobs),
                  "report");
    }
    if (cohomology->parsed()) {
      symscope::Json j =
          symscope::load_scenario_file(cohomology_args.scenario);
      std::string fname =
          std::filesystem::path(cohomology_args.scenario).filename().string();
      return emit(cohomology_args,
                  symscope::run_cohomology_scenario(j, fname,
                                                    cohomology_args.seed),
                  "cohomology");
    }
    if (anomaly->parsed()) {
      symscope::Json j = symscope::load_scenario_file(anomaly_args.scenario);
      std::string fname =
          std::filesystem::path(anomaly_args.scenario).filename().string();
      return emit(anomaly_args, symscope::run_anomaly_scenario(j, fname),
                  "anomaly");
    }
    if (channel->parsed()) {
      symscope::Json j = symscope::load_scenario_file(channel_args.scenario);
      std::string fname =
          std::filesystem::path(channel_args.scenario).filename().string();
      return emit(channel_args,
                  symscope::run_channel_scenario(j, fname, channel_args.seed,
                                                 channel_args.jobs),
                  "channel");
    }
    if (sweep->parsed()) {
      symscope::Json j = symscope::load_scenario_file(sweep_args.scenario);
      std::string fname =
          std::filesystem::path(sweep_args.scenario).filename().string();
      return emit(sweep_args,
                  symscope::sweep_sizes(j, fname, sweep_args.seed,
                                        sweep_args.jobs),
                  "sweep");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "symscope: %s\n", e.what());
    return 1;
  }
  return 0;
}
