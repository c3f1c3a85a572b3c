#include "rehab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rehab/rng.hpp"

namespace rehab {

using nlohmann::json;

namespace {

constexpr double kTickRate = 120.0;

// Reads known keys from one JSON object and rejects anything else.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError("config: '" + where_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + path(key) + "': " + e.what());
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError("config: unknown key '" + path(item.key()) + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

const std::vector<std::string>& known_scenarios() {
  static const std::vector<std::string> names{"f1", "f2", "f3", "f4", "f5", "f6", "rate", "custom"};
  return names;
}

int ExperimentConfig::ticks_per_cycle() const {
  return static_cast<int>(std::lround(kTickRate / control.reference.f_ref));
}

void ExperimentConfig::validate() const {
  bool known = false;
  for (const auto& s : known_scenarios()) known |= s == scenario;
  if (!known) throw ConfigError("config: unknown scenario '" + scenario + "'");
  if (seed_count < 1) throw ConfigError("config: seed_count must be >= 1");
  if (cycles < 1) throw ConfigError("config: cycles must be >= 1");
  try {
    parse_preset(preset);
    if (!(plant.m_eff > 0.0)) throw DomainError("plant: m_eff must be positive");
    if (!(plant.dt_phys > 0.0) || plant.dt_phys > 1.0 / kTickRate + 1e-12)
      throw DomainError("plant: dt_phys must be in (0, 1/120]");
    patient.validate();
    disturbance.validate();
    sensors.force().validate();
    sensors.imu().validate();
    sensors.position().validate();
    context.thresholds.validate();
    ControlPreset::adaptive(control.k0, control.c0);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const double per_cycle = kTickRate / control.reference.f_ref;
  if (std::abs(per_cycle - std::round(per_cycle)) > 1e-9)
    throw ConfigError("config: 120 / reference frequency must be an integer tick count");
  if (!(control.lever > 0.0)) throw ConfigError("config: lever must be positive");
  if (!(sensors.observer_bandwidth > 0.0)) throw ConfigError("config: observer_bandwidth must be positive");
  if (adaptation.window < 1 || !(adaptation.eta > 0.0) || !(adaptation.rho > 0.0 && adaptation.rho <= 1.0))
    throw ConfigError("config: adaptation needs window >= 1, eta > 0, rho in (0, 1]");
  if (calibration.enabled && !(calibration.lo >= 0.0 && calibration.hi > calibration.lo))
    throw ConfigError("config: calibration bracket must satisfy 0 <= lo < hi");
  if (context.smoothing < 1 || context.baseline_window < 1)
    throw ConfigError("config: context smoothing and baseline_window must be >= 1");
  for (const auto& e : schedule)
    if (e.from < 0 || e.to <= e.from) throw ConfigError("config: schedule spans must satisfy 0 <= from < to");
  if (protocol.freeze_start < 0 || protocol.freeze_end < protocol.freeze_start)
    throw ConfigError("config: freeze window must be ordered");
  if (protocol.segment_cycles < 1) throw ConfigError("config: segment_cycles must be >= 1");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["seed_count"] = c.seed_count;
  j["cycles"] = c.cycles;
  j["preset"] = c.preset;
  j["output_dir"] = c.output_dir;
  j["plant"] = {{"m_eff", c.plant.m_eff}, {"dt_phys", c.plant.dt_phys}, {"x0", c.plant.x0}, {"v0", c.plant.v0}};
  const auto& p = c.patient;
  j["patient"] = {{"k_p", p.k_p},
                  {"c_p", p.c_p},
                  {"tau", p.tau},
                  {"f0", p.f0},
                  {"X_amp", p.X_amp},
                  {"harmonic_weights", p.harmonic_weights},
                  {"sigma_phase", p.sigma_phase},
                  {"sigma_phase_unstable", p.sigma_phase_unstable},
                  {"force_target", p.force_target},
                  {"phase_lead", p.phase_lead},
                  {"tremor_amp", p.tremor_amp},
                  {"tremor_freq", p.tremor_freq}};
  j["calibration"] = {{"enabled", c.calibration.enabled}, {"lo", c.calibration.lo}, {"hi", c.calibration.hi}};
  j["disturbance"] = {{"magnitude", c.disturbance.magnitude},
                      {"duration", c.disturbance.duration},
                      {"mean_rate", c.disturbance.mean_rate},
                      {"enabled", c.disturbance.enabled}};
  const auto& s = c.sensors;
  j["sensors"] = {{"noise_rel", s.noise_rel},         {"corr_time", s.corr_time},
                  {"force_rate", s.force_rate},       {"imu_rate", s.imu_rate},
                  {"position_rate", s.position_rate}, {"observer_bandwidth", s.observer_bandwidth}};
  const auto& ct = c.control;
  j["control"] = {{"reference_amplitude", ct.reference.amplitude},
                  {"reference_frequency", ct.reference.f_ref},
                  {"reference_offset", ct.reference.offset},
                  {"saturation", ct.saturation},
                  {"k0", ct.k0},
                  {"c0", ct.c0},
                  {"lever", ct.lever}};
  const auto& a = c.adaptation;
  j["adaptation"] = {{"delta_k", a.delta_k}, {"delta_c", a.delta_c}, {"eta", a.eta}, {"rho", a.rho},
                     {"window", a.window}};
  const auto& cx = c.context;
  j["context"] = {{"lag_thr", cx.thresholds.lag_thr},
                  {"dE_thr", cx.thresholds.dE_thr},
                  {"var_thr", cx.thresholds.var_thr},
                  {"smoothing", cx.smoothing},
                  {"baseline_window", cx.baseline_window},
                  {"policy_enabled", cx.policy_enabled},
                  {"policy",
                   {{"step_k", cx.policy.step_k},
                    {"step_c", cx.policy.step_c},
                    {"fatigued_k", cx.policy.fatigued_k},
                    {"fatigued_c", cx.policy.fatigued_c},
                    {"unstable_c", cx.policy.unstable_c}}}};
  j["schedule"] = json::array();
  for (const auto& e : c.schedule)
    j["schedule"].push_back({{"mode", std::string(to_string(e.mode))}, {"from", e.from}, {"to", e.to}});
  const auto& pr = c.protocol;
  j["protocol"] = {{"eval_start", pr.eval_start},       {"freeze_start", pr.freeze_start},
                   {"freeze_end", pr.freeze_end},       {"lead_drift", pr.lead_drift},
                   {"delay_arm", pr.delay_arm},         {"segment_cycles", pr.segment_cycles}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Section top(j, "");
  top.read("scenario", c.scenario);
  top.read("seed", c.seed);
  top.read("seed_count", c.seed_count);
  top.read("cycles", c.cycles);
  top.read("preset", c.preset);
  top.read("output_dir", c.output_dir);
  if (top.has("plant")) {
    Section s(top.at("plant"), "plant");
    s.read("m_eff", c.plant.m_eff);
    s.read("dt_phys", c.plant.dt_phys);
    s.read("x0", c.plant.x0);
    s.read("v0", c.plant.v0);
    s.finish();
  }
  if (top.has("patient")) {
    auto& p = c.patient;
    Section s(top.at("patient"), "patient");
    s.read("k_p", p.k_p);
    s.read("c_p", p.c_p);
    s.read("tau", p.tau);
    s.read("f0", p.f0);
    s.read("X_amp", p.X_amp);
    s.read("harmonic_weights", p.harmonic_weights);
    s.read("sigma_phase", p.sigma_phase);
    s.read("sigma_phase_unstable", p.sigma_phase_unstable);
    s.read("force_target", p.force_target);
    s.read("phase_lead", p.phase_lead);
    s.read("tremor_amp", p.tremor_amp);
    s.read("tremor_freq", p.tremor_freq);
    s.finish();
  }
  if (top.has("calibration")) {
    Section s(top.at("calibration"), "calibration");
    s.read("enabled", c.calibration.enabled);
    s.read("lo", c.calibration.lo);
    s.read("hi", c.calibration.hi);
    s.finish();
  }
  if (top.has("disturbance")) {
    Section s(top.at("disturbance"), "disturbance");
    s.read("magnitude", c.disturbance.magnitude);
    s.read("duration", c.disturbance.duration);
    s.read("mean_rate", c.disturbance.mean_rate);
    s.read("enabled", c.disturbance.enabled);
    s.finish();
  }
  if (top.has("sensors")) {
    Section s(top.at("sensors"), "sensors");
    s.read("noise_rel", c.sensors.noise_rel);
    s.read("corr_time", c.sensors.corr_time);
    s.read("force_rate", c.sensors.force_rate);
    s.read("imu_rate", c.sensors.imu_rate);
    s.read("position_rate", c.sensors.position_rate);
    s.read("observer_bandwidth", c.sensors.observer_bandwidth);
    s.finish();
  }
  if (top.has("control")) {
    Section s(top.at("control"), "control");
    s.read("reference_amplitude", c.control.reference.amplitude);
    s.read("reference_frequency", c.control.reference.f_ref);
    s.read("reference_offset", c.control.reference.offset);
    s.read("saturation", c.control.saturation);
    s.read("k0", c.control.k0);
    s.read("c0", c.control.c0);
    s.read("lever", c.control.lever);
    s.finish();
  }
  if (top.has("adaptation")) {
    Section s(top.at("adaptation"), "adaptation");
    s.read("delta_k", c.adaptation.delta_k);
    s.read("delta_c", c.adaptation.delta_c);
    s.read("eta", c.adaptation.eta);
    s.read("rho", c.adaptation.rho);
    s.read("window", c.adaptation.window);
    s.finish();
  }
  if (top.has("context")) {
    Section s(top.at("context"), "context");
    s.read("lag_thr", c.context.thresholds.lag_thr);
    s.read("dE_thr", c.context.thresholds.dE_thr);
    s.read("var_thr", c.context.thresholds.var_thr);
    s.read("smoothing", c.context.smoothing);
    s.read("baseline_window", c.context.baseline_window);
    s.read("policy_enabled", c.context.policy_enabled);
    if (s.has("policy")) {
      Section q(s.at("policy"), "context.policy");
      q.read("step_k", c.context.policy.step_k);
      q.read("step_c", c.context.policy.step_c);
      q.read("fatigued_k", c.context.policy.fatigued_k);
      q.read("fatigued_c", c.context.policy.fatigued_c);
      q.read("unstable_c", c.context.policy.unstable_c);
      q.finish();
    }
    s.finish();
  }
  if (top.has("schedule")) {
    const json& arr = top.at("schedule");
    if (!arr.is_array()) throw ConfigError("config: 'schedule' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section s(arr[i], "schedule[" + std::to_string(i) + "]");
      std::string mode = "stable";
      ScheduleEntry e;
      s.read("mode", mode);
      s.read("from", e.from);
      s.read("to", e.to);
      s.finish();
      try {
        e.mode = parse_mode(mode);
      } catch (const std::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
      }
      c.schedule.push_back(e);
    }
  }
  if (top.has("protocol")) {
    Section s(top.at("protocol"), "protocol");
    s.read("eval_start", c.protocol.eval_start);
    s.read("freeze_start", c.protocol.freeze_start);
    s.read("freeze_end", c.protocol.freeze_end);
    s.read("lead_drift", c.protocol.lead_drift);
    s.read("delay_arm", c.protocol.delay_arm);
    s.read("segment_cycles", c.protocol.segment_cycles);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  json j = to_json(config);
  j.erase("output_dir");  // where results land is not part of the experiment
  out << fnv1a64(j.dump());
  return out.str();
}

}  // namespace rehab
