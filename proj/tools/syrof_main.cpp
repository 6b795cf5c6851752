#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "syrof/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using syrof::cli::Json;

fs::path resolve_out_dir(std::string out_flag) {
  // the environment may override the output directory, nothing else
  if (const char* env = std::getenv("SYROF_OUT_DIR"); env != nullptr && *env != '\0') out_flag = env;
  fs::path dir = out_flag.empty() ? fs::path(".") : fs::path(out_flag);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, std::optional<uint64_t> seed, bool csv) {
  syrof::cli::ScenarioConfig cfg = syrof::cli::load_config(config_path);
  if (seed) cfg.seed = *seed;
  const fs::path out = resolve_out_dir(out_flag);

  const syrof::cli::RunResult result = syrof::cli::run_scenario(cfg);
  std::string trace;
  for (const auto& line : result.trace_lines) {
    trace += line;
    trace += '\n';
  }
  write_text(out / "trace.ndjson", trace);
  write_text(out / "summary.json", result.summary.dump(2) + "\n");
  if (csv) {
    std::string body = "round,id,true_x,true_y,est_x,est_y\n";
    for (const auto& line : result.trace_lines) {
      const Json j = Json::parse(line);
      for (const auto& jr : j.at("robots")) {
        body += std::to_string(j.at("round").get<uint64_t>()) + "," + std::to_string(jr.at("id").get<int>()) +
                "," + std::to_string(jr.at("tx").get<double>()) + "," + std::to_string(jr.at("ty").get<double>()) +
                "," + std::to_string(jr.at("ex").get<double>()) + "," + std::to_string(jr.at("ey").get<double>()) +
                "\n";
      }
    }
    write_text(out / "positions.csv", body);
  }

  if (!result.checks_passed) {
    Json counterexample;
    counterexample["config"] = config_path;
    counterexample["seed"] = cfg.seed;
    counterexample["drops_mode"] = cfg.drops.mode;
    counterexample["drops_seed"] = cfg.drops.seed;
    Json losses = Json::array();
    for (const auto& l : cfg.drops.losses) losses.push_back({l.round, l.from, l.to});
    counterexample["losses"] = losses;
    counterexample["violations"] = result.violations;
    write_text(out / "counterexample.json", counterexample.dump(2) + "\n");
    for (const auto& v : result.violations) std::cerr << "violation: " << v << "\n";
    std::cout << "FAIL (artifacts in " << out.string() << ")\n";
    return 1;
  }
  std::cout << "OK (artifacts in " << out.string() << ")\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_flag, std::optional<uint64_t> seed,
              bool exhaustive, int random_n, int max_losses, uint64_t budget) {
  syrof::cli::ScenarioConfig cfg = syrof::cli::load_config(config_path);
  if (seed) cfg.seed = *seed;
  const fs::path out = resolve_out_dir(out_flag);

  syrof::cli::SweepOptions opt;
  opt.exhaustive = exhaustive;
  opt.max_losses = max_losses;
  opt.budget = budget;
  opt.random_n = random_n;
  opt.seed = seed.value_or(cfg.seed);

  const syrof::cli::SweepResult result = syrof::cli::run_sweep(cfg, opt);
  write_text(out / "sweep_report.json", result.report.dump(2) + "\n");
  std::cout << "schedules: " << result.schedules_run << ", worst skew: " << result.worst_skew
            << ", worst streak: " << result.worst_streak << "\n";
  if (!result.passed) {
    std::cerr << "violating schedule: " << result.violating_schedule->dump() << "\n";
    std::cout << "FAIL (report in " << out.string() << ")\n";
    return 1;
  }
  std::cout << "OK (report in " << out.string() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SyROF swarm-synchronization scenario runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  bool csv = false;

  CLI::App* run = app.add_subcommand("run", "run one scenario, write trace + summary");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_flag("--csv", csv, "also write per-robot positions CSV");

  bool exhaustive = false;
  int random_n = 0;
  int max_losses = 2;
  uint64_t budget = 20'000'000;
  CLI::App* sweep = app.add_subcommand("sweep", "run a schedule sweep, report worst-case metrics");
  sweep->add_option("config", config_path, "scenario config (JSON)")->required();
  sweep->add_flag("--exhaustive", exhaustive, "enumerate all schedules up to --max-losses");
  sweep->add_option("--random", random_n, "number of random schedules");
  sweep->add_option("--max-losses", max_losses, "loss budget for --exhaustive");
  sweep->add_option("--budget", budget, "schedule-count budget for --exhaustive");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed, "base seed for random schedules");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, csv);
    return cmd_sweep(config_path, out_dir, seed, exhaustive, random_n, max_losses, budget);
  } catch (const syrof::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
