#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>

#include "rehab/config.hpp"
#include "rehab/io.hpp"
#include "rehab/protocols.hpp"

using namespace rehab;
using nlohmann::json;

namespace {

void print_acceptance(const std::string& label, const json& summary) {
  for (const auto& [name, a] : summary.at("acceptance").items())
    std::cout << (a.at("pass").get<bool>() ? "PASS " : "FAIL ") << label << name << " value=" << a.at("value").dump()
              << " " << a.at("op").get<std::string>() << " " << a.at("threshold").dump() << "\n";
}

int run_one(ExperimentConfig cfg, const std::string& out) {
  cfg.output_dir = out;
  const RunResult run = run_protocol(cfg);
  write_run(run, out);
  print_acceptance(cfg.scenario + ": ", run.summary);
  std::cout << "wrote " << out << "\n";
  return all_passed(run.summary) ? 0 : 1;
}

// {"base": {config}, "scenarios": [...], "seed": N, "seeds": N, "out": DIR}
int sweep(const std::string& path) {
  const json j = read_json(path);
  static const std::set<std::string> allowed{"base", "scenarios", "seed", "seeds", "out"};
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("sweep: unknown key '" + key + "'");
  ExperimentConfig base = j.contains("base") ? config_from_json(j.at("base")) : ExperimentConfig{};
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("seeds")) base.seed_count = j.at("seeds").get<int>();
  const std::string out = j.value("out", base.output_dir);
  std::vector<std::string> scenarios = j.value("scenarios", std::vector<std::string>{base.scenario});
  int code = 0;
  for (const auto& s : scenarios) {
    ExperimentConfig cfg = base;
    cfg.scenario = s;
    code = std::max(code, run_one(cfg, out + "/" + s));
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Impedance-control rehabilitation arm simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one protocol");
  std::string config_path, scenario, preset, out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds, cycles;
  std::optional<double> dt_phys;
  run->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--scenario", scenario, "f1..f6, rate or custom");
  run->add_option("--seed", seed, "first seed");
  run->add_option("--seeds", seeds, "number of consecutive seeds");
  run->add_option("--cycles", cycles, "movement cycles per episode");
  run->add_option("--dt-phys", dt_phys, "physics step (s)");
  run->add_option("--preset", preset, "rigid, soft or adaptive (custom scenario)");
  run->add_option("--out", out, "output directory");

  auto* sw = app.add_subcommand("sweep", "Run several protocols from a sweep file");
  std::string sweep_path;
  sw->add_option("--config", sweep_path, "sweep JSON")->required()->check(CLI::ExistingFile);

  auto* rep = app.add_subcommand("report", "Recompute the summary from a run directory");
  std::string in;
  bool allow_mismatch = false;
  rep->add_option("--in", in, "run directory")->required()->check(CLI::ExistingDirectory);
  rep->add_flag("--allow-hash-mismatch", allow_mismatch, "accept a config that does not match the recorded hash");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      if (!scenario.empty()) cfg.scenario = scenario;
      if (seed) cfg.seed = *seed;
      if (seeds) cfg.seed_count = *seeds;
      if (cycles) cfg.cycles = *cycles;
      if (dt_phys) cfg.plant.dt_phys = *dt_phys;
      if (!preset.empty()) cfg.preset = preset;
      return run_one(cfg, out);
    }
    if (*sw) return sweep(sweep_path);
    const ReportResult r = report(in, allow_mismatch);
    print_acceptance("", r.summary);
    std::cout << "summary " << (r.matches_stored ? "matches" : "differs from") << " the stored run summary\n";
    return all_passed(r.summary) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
