#include "rehab/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rehab/adaptation.hpp"
#include "rehab/metrics.hpp"

namespace rehab {

namespace {

constexpr double kTickRate = 120.0;
constexpr double kTickDt = 1.0 / kTickRate;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double tail_mean(const std::vector<double>& v, int window) {
  const std::size_t n = std::min<std::size_t>(v.size(), static_cast<std::size_t>(window));
  return std::accumulate(v.end() - static_cast<long>(n), v.end(), 0.0) / static_cast<double>(n);
}

}  // namespace

const std::array<std::string, kTickCols>& tick_columns() {
  static const std::array<std::string, kTickCols> cols{
      "t",         "x",         "v",          "x_ref",           "v_ref",      "F_contact",
      "F_disturb", "u",         "k",          "c",               "sens_force", "sens_force_clean",
      "sens_accel", "sens_accel_clean", "sens_pos", "sens_pos_clean"};
  return cols;
}

const std::array<std::string, 14>& cycle_columns() {
  static const std::array<std::string, 14> cols{"index",      "E_cycle",  "E_diss",   "baseline",     "r",
                                                "moment_var", "traj_rms", "peak_force", "phase_lag", "k",
                                                "c",          "committed", "context_truth", "context_label"};
  return cols;
}

std::vector<PatientMode> mode_profile(const std::vector<ScheduleEntry>& schedule, int cycles) {
  std::vector<PatientMode> modes(static_cast<std::size_t>(cycles), PatientMode::Stable);
  for (const auto& e : schedule)
    for (int i = std::max(e.from, 0); i < std::min(e.to, cycles); ++i) modes[static_cast<std::size_t>(i)] = e.mode;
  return modes;
}

EpisodeLog run_episode(const ExperimentConfig& cfg, const EpisodeSpec& spec) {
  PlantConfig plant = cfg.plant;
  if (spec.dt_phys > 0.0) plant.dt_phys = spec.dt_phys;
  const double dt = plant.dt_phys;
  const int n_per = cfg.ticks_per_cycle();
  const long n_ticks = static_cast<long>(spec.cycles) * n_per;
  const double period = 1.0 / cfg.control.reference.f_ref;

  // patient
  PatientParams base = cfg.patient;
  base.X_amp = spec.x_amp;
  const auto modes = mode_profile(spec.schedule, spec.cycles);
  std::vector<double> sigma(static_cast<std::size_t>(spec.cycles) + 2);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const PatientMode m = modes[std::min(i, modes.size() - 1)];
    sigma[i] = !spec.jitter ? 0.0 : m == PatientMode::Unstable ? base.sigma_phase_unstable : base.sigma_phase;
  }
  IntendedTrajectory intent(base, Stream(spec.seed, "patient"));
  intent.set_sigma_profile(sigma);
  if (spec.lead_drift != 0.0 && spec.drift_end > spec.drift_start)
    intent.set_lead_drift({spec.drift_start * period, spec.drift_end * period, spec.lead_drift});

  DisturbanceConfig dist = cfg.disturbance;
  dist.enabled = spec.impulses;
  const ImpulseTrain impulses(dist, cfg.control.reference.f_ref, spec.cycles * period, Stream(spec.seed, "disturbance"));

  // sensing
  SensorSpec sf = cfg.sensors.force(), si = cfg.sensors.imu(), sp = cfg.sensors.position();
  if (!spec.noise) sf.noise_rel = si.noise_rel = sp.noise_rel = 0.0;
  SensorChannel force_ch(Channel::Force, sf, Stream(spec.seed, "sensors.force"));
  SensorChannel imu_ch(Channel::Accel, si, Stream(spec.seed, "sensors.imu"));
  SensorChannel pos_ch(Channel::Position, sp, Stream(spec.seed, "sensors.pos"));
  MotionObserver observer(cfg.sensors.observer_bandwidth, 1.0 / sp.rate, plant.x0, plant.v0);
  LatestFrames frames;

  // control and learning
  const ControlPreset preset = spec.preset == PresetKind::Rigid  ? ControlPreset::rigid()
                               : spec.preset == PresetKind::Soft ? ControlPreset::soft()
                                                                 : ControlPreset::adaptive(cfg.control.k0, cfg.control.c0);
  ImpedanceController ctrl(preset, cfg.control.saturation);
  const bool adaptive = spec.preset == PresetKind::Adaptive;
  const bool learning = adaptive && spec.learn;
  AdaptState learner;
  learner.theta_base = preset.params;
  learner.delta_k = cfg.adaptation.delta_k;
  learner.delta_c = cfg.adaptation.delta_c;
  learner.eta = cfg.adaptation.eta;
  learner.rho = cfg.adaptation.rho;
  learner.window = cfg.adaptation.window;
  Stream adapt_rng(spec.seed, "adaptation");
  Stream surrogate_rng(spec.seed, "adaptation.surrogate");

  // context
  std::vector<CycleTrace> recent;
  std::vector<double> stable_energy, stable_lag;

  EpisodeLog log;
  log.name = spec.name;
  log.arm = spec.arm;
  log.seed = spec.seed;
  log.ticks.resize(n_ticks, kTickCols);
  log.cycles.reserve(static_cast<std::size_t>(spec.cycles));

  Eigen::ArrayXd buf_f(n_per), buf_v(n_per);
  BodyState st{plant.x0, plant.v0, 0.0};
  double off_x = 0.0, off_v = 0.0;
  long s = 0;
  PatientParams eff = base;

  // force and position do not depend on the command; acceleration does
  auto sample_kinematics = [&](double limit, double force, double x) {
    while (force_ch.due(limit)) frames.push(force_ch.sample(force));
    while (pos_ch.due(limit)) {
      const SensorFrame fr = pos_ch.sample(x);
      frames.push(fr);
      observer.correct(fr.value);
    }
  };
  auto sample_accel = [&](double limit, double accel) {
    while (imu_ch.due(limit)) frames.push(imu_ch.sample(accel));
  };

  auto in_freeze = [&](long ci) { return ci >= spec.freeze_start && ci < spec.freeze_end; };

  auto finish_cycle = [&](long ci) {
    const double e_true_sensed = cycle_energy(buf_f, buf_v, kTickDt);
    double e_feedback = e_true_sensed;
    if (spec.surrogate) e_feedback = cycle_energy(phase_randomize(buf_f, surrogate_rng), buf_v, kTickDt);

    // context decision for the cycle just completed
    recent.push_back({buf_f, buf_v, e_true_sensed});
    while (static_cast<int>(recent.size()) > cfg.context.smoothing) recent.erase(recent.begin());
    const double raw_lag = xcorr_lag(buf_f, buf_v, n_per / 2) * kTickDt;
    DecisionRow decision;
    decision.window = ci;
    decision.decision.truth = modes[static_cast<std::size_t>(ci)];
    bool labelled = false;
    if (ci >= cfg.context.smoothing && !stable_energy.empty()) {
      decision.decision.features = extract_features(std::span<const CycleTrace>(recent),
                                                    tail_mean(stable_energy, cfg.context.baseline_window), kTickDt,
                                                    ci, tail_mean(stable_lag, cfg.context.baseline_window));
      if (decision.decision.features.valid) {
        decision.decision.label = classify(decision.decision.features, cfg.context.thresholds);
        labelled = true;
      }
    }
    // warm-up cycles are assumed Stable and seed the reference levels
    if (!labelled || decision.decision.label == PatientMode::Stable) {
      stable_energy.push_back(e_true_sensed);
      stable_lag.push_back(raw_lag);
    }

    CycleRow row;
    row.index = ci;
    row.baseline = kNaN;
    if (!learner.history.empty()) row.baseline = baseline(learner.history, learner.window);
    learner.frozen = in_freeze(ci);
    if (learning && !learner.history.empty()) {
      learner = update(learner, e_feedback, row.baseline);
    } else {
      learner.history.push_back(e_feedback);
      learner.last_committed = false;
    }
    row.committed = learner.last_committed ? 1 : 0;
    if (spec.policy && adaptive && labelled) {
      learner.theta_base = behavior_policy(decision.decision.label, learner.theta_base, cfg.context.policy);
    }
    decision.k_request = learner.theta_base.k;
    decision.c_request = learner.theta_base.c;
    row.context_truth = std::string(to_string(decision.decision.truth));
    row.context_label = labelled ? std::string(to_string(decision.decision.label)) : "none";
    log.cycles.push_back(row);
    if (labelled) log.decisions.push_back(decision);
  };

  for (long n = 0; n < n_ticks; ++n) {
    const double tick_t = static_cast<double>(n) / kTickRate;
    const long ci = n / n_per;
    const int phase_i = static_cast<int>(n % n_per);
    if (phase_i == 0) {
      if (ci > 0) finish_cycle(ci - 1);
      eff = apply_mode(base, modes[static_cast<std::size_t>(ci)]);
      eff.tau += spec.extra_delay;
      learner.frozen = in_freeze(ci);
      if (learning) {
        const ImpedanceParams p = perturb(learner, adapt_rng);
        ctrl.apply_params(p.k, p.c);
      } else if (adaptive) {
        ctrl.apply_params(learner.theta_base.k, learner.theta_base.c);
      }
    }

    const double next_tick = static_cast<double>(n + 1) / kTickRate;
    bool first = true;
    while (static_cast<double>(s) * dt < next_tick - 1e-9) {
      const double t = static_cast<double>(s) * dt;
      const ReferenceState ref = reference(t, cfg.control.reference);
      const PatientKinematics ip = intent(t - eff.tau);
      const double f_contact = contact_force(ip, st.x, st.v, eff);
      const double f_dist = impulses(t);

      if (first) {
        sample_kinematics(tick_t, f_contact, st.x);
        const FusedObservation obs = fuse(frames, tick_t);
        if (obs.valid) {
          // the fused estimate, carried between ticks by the actuator's incremental encoder
          off_x = observer.position() - st.x;
          off_v = observer.velocity() - st.v;
        }
        buf_f(phase_i) = obs.force;
        buf_v(phase_i) = observer.velocity();
      }
      sample_kinematics(t, f_contact, st.x);

      const double u = ctrl.command(st.x + off_x, st.v + off_v, ref);
      const double total = u + f_contact + f_dist;
      sample_accel(t, total / plant.m_eff);

      if (first) {
        auto row = log.ticks.row(n);
        row(kT) = tick_t;
        row(kX) = st.x;
        row(kV) = st.v;
        row(kXRef) = ref.x;
        row(kVRef) = ref.v;
        row(kFContact) = f_contact;
        row(kFDisturb) = f_dist;
        row(kU) = u;
        row(kK) = ctrl.params().k;
        row(kC) = ctrl.params().c;
        row(kSensForce) = frames.force ? frames.force->value : 0.0;
        row(kSensForceClean) = frames.force ? frames.force->clean_value : 0.0;
        row(kSensAccel) = frames.accel ? frames.accel->value : 0.0;
        row(kSensAccelClean) = frames.accel ? frames.accel->clean_value : 0.0;
        row(kSensPos) = frames.position ? frames.position->value : 0.0;
        row(kSensPosClean) = frames.position ? frames.position->clean_value : 0.0;
        first = false;
      }

      st = step(st, total, plant);
      st.t = static_cast<double>(s + 1) * dt;
      observer.propagate(frames.accel ? frames.accel->value : 0.0, dt);
      ++s;
    }
  }
  if (n_ticks > 0) finish_cycle(spec.cycles - 1);
  log.clamp_count = ctrl.clamp_count();
  compute_cycle_metrics(cfg, log);
  return log;
}

void compute_cycle_metrics(const ExperimentConfig& cfg, EpisodeLog& log) {
  const int n_per = cfg.ticks_per_cycle();
  const auto n_cycles = static_cast<long>(log.ticks.rows() / n_per);
  if (static_cast<long>(log.cycles.size()) != n_cycles) log.cycles.resize(static_cast<std::size_t>(n_cycles));
  for (long i = 0; i < n_cycles; ++i) {
    const auto block = log.ticks.middleRows(i * n_per, n_per);
    const Eigen::ArrayXd f = block.col(kFContact);
    const Eigen::ArrayXd v = block.col(kV);
    CycleRow& row = log.cycles[static_cast<std::size_t>(i)];
    row.index = i;
    row.E_cycle = cycle_energy(f, v, kTickDt);
    row.E_diss = dissipated_energy(v, block.col(kC), kTickDt);
    const auto r = force_velocity_correlation(f, v);
    row.r = r ? *r : kNaN;
    row.moment_var = moment_variance(block.col(kU), cfg.control.lever);
    row.traj_rms = trajectory_rms(block.col(kX), block.col(kXRef));
    row.peak_force = f.abs().maxCoeff();
    row.phase_lag = xcorr_lag(f, v, n_per / 2) * kTickDt;
    row.k = block(0, kK);
    row.c = block(0, kC);
  }
}

double calibration_peak_force(const ExperimentConfig& cfg, double x_amp) {
  EpisodeSpec spec;
  spec.name = "calibration";
  spec.arm = "calibration";
  spec.cycles = 6;
  spec.preset = PresetKind::Adaptive;
  spec.learn = false;
  spec.noise = false;
  spec.jitter = false;
  spec.impulses = false;
  spec.x_amp = x_amp;
  const EpisodeLog log = run_episode(cfg, spec);
  const int n_per = cfg.ticks_per_cycle();
  return log.ticks.col(kFContact).segment(n_per, 5 * n_per).abs().maxCoeff();
}

double calibrated_amplitude(const ExperimentConfig& cfg) {
  if (!cfg.calibration.enabled) return cfg.patient.X_amp;
  const double a = cfg.control.reference.amplitude;
  auto peak = [&](double x_amp) { return calibration_peak_force(cfg, x_amp); };
  // peak force is smallest where intent and reference agree best; bisect on the rising side
  double lo = cfg.calibration.lo * a;
  const double hi = cfg.calibration.hi * a;
  const int scan = 24;
  double best = peak(lo);
  for (int i = 1; i < scan; ++i) {
    const double x = cfg.calibration.lo * a + (hi - cfg.calibration.lo * a) * i / scan;
    const double p = peak(x);
    if (p >= best) break;
    best = p;
    lo = x;
  }
  return calibrate_amplitude(cfg.patient, peak, lo, hi);
}

}  // namespace rehab
