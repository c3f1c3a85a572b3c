#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rehab/config.hpp"
#include "rehab/episode.hpp"
#include "rehab/metrics.hpp"
#include "rehab/protocols.hpp"

using namespace rehab;
namespace fs = std::filesystem;

namespace {

EpisodeSpec base_spec(int cycles, PresetKind preset = PresetKind::Adaptive, std::uint64_t seed = 1) {
  EpisodeSpec s;
  s.name = "ep";
  s.arm = "arm";
  s.seed = seed;
  s.cycles = cycles;
  s.preset = preset;
  s.x_amp = 0.02;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rehab_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("tick arithmetic") {
  ExperimentConfig cfg;
  CHECK(cfg.ticks_per_cycle() == 240);
  const auto log = run_episode(cfg, base_spec(50));
  CHECK(log.ticks.rows() == 12000);
  CHECK(log.cycles.size() == 50);
  CHECK(log.ticks(11999, kT) == doctest::Approx(11999.0 / 120.0));
}

TEST_CASE("fixed presets keep their parameters") {
  ExperimentConfig cfg;
  const auto log = run_episode(cfg, base_spec(10, PresetKind::Rigid));
  CHECK((log.ticks.col(kK) == 10000.0).all());
  CHECK((log.ticks.col(kC) == 40.0).all());
}

TEST_CASE("disturbance column is silent when disabled") {
  ExperimentConfig cfg;
  auto spec = base_spec(20);
  spec.impulses = false;
  const auto quiet = run_episode(cfg, spec);
  CHECK((quiet.ticks.col(kFDisturb) == 0.0).all());
  cfg.disturbance.enabled = true;
  spec.impulses = true;
  const auto kicked = run_episode(cfg, spec);
  CHECK((kicked.ticks.col(kFDisturb) != 0.0).any());
}

TEST_CASE("episodes are deterministic") {
  ExperimentConfig cfg;
  const auto a = run_episode(cfg, base_spec(12));
  const auto b = run_episode(cfg, base_spec(12));
  CHECK((a.ticks == b.ticks).all());
  const auto c = run_episode(cfg, base_spec(12, PresetKind::Adaptive, 2));
  CHECK_FALSE((a.ticks == c.ticks).all());
}

TEST_CASE("cycle metrics are a pure function of the tick table") {
  ExperimentConfig cfg;
  auto log = run_episode(cfg, base_spec(15));
  const auto stored = log.cycles;
  for (auto& r : log.cycles) r.E_cycle = r.E_diss = r.r = r.moment_var = r.traj_rms = r.peak_force = -1.0;
  compute_cycle_metrics(cfg, log);
  for (std::size_t i = 0; i < stored.size(); ++i) {
    CHECK(log.cycles[i].E_cycle == stored[i].E_cycle);
    CHECK(log.cycles[i].E_diss == stored[i].E_diss);
    CHECK(log.cycles[i].moment_var == stored[i].moment_var);
    CHECK(log.cycles[i].traj_rms == stored[i].traj_rms);
    CHECK(log.cycles[i].peak_force == stored[i].peak_force);
  }
}

TEST_CASE("closed loop with a fixed preset stays bounded") {
  ExperimentConfig cfg;
  for (auto preset : {PresetKind::Rigid, PresetKind::Soft, PresetKind::Adaptive}) {
    auto spec = base_spec(200, preset);
    spec.learn = false;
    const auto log = run_episode(cfg, spec);
    CHECK(log.ticks.col(kX).abs().maxCoeff() <= 10.0 * cfg.control.reference.amplitude);
  }
}

TEST_CASE("fatigue lowers the peak contact force") {
  ExperimentConfig cfg;
  int lower = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    auto stable = base_spec(6, PresetKind::Adaptive, static_cast<std::uint64_t>(s));
    stable.learn = false;
    auto tired = stable;
    tired.schedule = {{PatientMode::Fatigued, 0, 6}};
    const double ps = run_episode(cfg, stable).ticks.col(kFContact).abs().maxCoeff();
    const double pf = run_episode(cfg, tired).ticks.col(kFContact).abs().maxCoeff();
    lower += pf < ps;
  }
  CHECK(lower == seeds);
}

TEST_CASE("mode profile") {
  const auto p = mode_profile({{PatientMode::Fatigued, 2, 4}, {PatientMode::Unstable, 5, 6}}, 7);
  REQUIRE(p.size() == 7);
  CHECK(p[0] == PatientMode::Stable);
  CHECK(p[2] == PatientMode::Fatigued);
  CHECK(p[3] == PatientMode::Fatigued);
  CHECK(p[4] == PatientMode::Stable);
  CHECK(p[5] == PatientMode::Unstable);
}

TEST_CASE("calibration meets its force target") {
  ExperimentConfig cfg;
  const double x = calibrated_amplitude(cfg);
  const double peak = calibration_peak_force(cfg, x);
  CHECK(std::abs(peak - cfg.patient.force_target) <= 0.02 * cfg.patient.force_target);
}

TEST_CASE("calibrated amplitude grows with the force target") {
  // a purely sinusoidal intent has no force floor at the reference amplitude
  ExperimentConfig cfg;
  cfg.patient.harmonic_weights.clear();
  cfg.patient.phase_lead = 0.0;
  cfg.patient.tremor_amp = 0.0;
  cfg.patient.force_target = 5.0;
  const double x5 = calibrated_amplitude(cfg);
  cfg.patient.force_target = 15.0;
  const double x15 = calibrated_amplitude(cfg);
  CHECK(x5 < x15);
  for (double target : {5.0, 15.0}) {
    cfg.patient.force_target = target;
    CHECK(calibration_peak_force(cfg, calibrated_amplitude(cfg)) == doctest::Approx(target).epsilon(0.02));
  }
  // stiffer coupling needs less excess amplitude for the same force
  cfg.patient.force_target = 10.0;
  const double a = cfg.control.reference.amplitude;
  const double soft = calibrated_amplitude(cfg);
  cfg.patient.k_p *= 2.0;
  const double stiff = calibrated_amplitude(cfg);
  CHECK(std::abs(stiff - a) < std::abs(soft - a));
}

TEST_CASE("config round trip and validation") {
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.patient.k_p = 2600.0;
  const auto j = to_json(cfg);
  const auto back = config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
  ExperimentConfig other = cfg;
  other.patient.k_p = 2601.0;
  CHECK(config_hash(other) != config_hash(cfg));

  auto bad = j;
  bad["patient"]["stiffness_typo"] = 1.0;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  auto wrong_scenario = j;
  wrong_scenario["scenario"] = "f9";
  CHECK_THROWS_AS(config_from_json(wrong_scenario).validate(), ConfigError);
  ExperimentConfig coarse;
  coarse.plant.dt_phys = 0.01;
  CHECK_THROWS_AS(coarse.validate(), ConfigError);
  ExperimentConfig partial = config_from_json(nlohmann::json{{"seed", 9}});
  CHECK(partial.seed == 9);
  CHECK(partial.cycles == ExperimentConfig{}.cycles);
}

TEST_CASE("seed list") {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.seed_count = 3;
  CHECK(seed_list(cfg) == std::vector<std::uint64_t>{7, 8, 9});
}

TEST_CASE("written runs are byte-identical and reproducible from logs") {
  ExperimentConfig cfg;
  cfg.scenario = "custom";
  cfg.cycles = 12;
  cfg.seed_count = 2;
  const auto a = scratch("a"), b = scratch("b");
  write_run(run_protocol(cfg), a.string());
  write_run(run_protocol(cfg), b.string());
  long files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK(slurp(e.path()) == slurp(b / rel));
    ++files;
  }
  CHECK(files >= 7);

  const auto rep = report(a.string(), false);
  CHECK(rep.hash_ok);
  CHECK(rep.matches_stored);

  auto cfg_json = nlohmann::json::parse(slurp(a / "config.json"));
  cfg_json["patient"]["k_p"] = 3000.0;
  std::ofstream(a / "config.json") << cfg_json.dump(2);
  CHECK_THROWS_AS(report(a.string(), false), HashMismatch);
  CHECK_NOTHROW(report(a.string(), true));
  fs::remove_all(a);
  fs::remove_all(b);
}
