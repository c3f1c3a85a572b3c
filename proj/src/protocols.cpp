#include "rehab/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>

#include "rehab/adaptation.hpp"
#include "rehab/context.hpp"
#include "rehab/io.hpp"
#include "rehab/metrics.hpp"

namespace rehab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTickDt = 1.0 / 120.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Mean of a cycle field over [from, to), clipped to the available cycles.
double cycle_mean(const std::vector<CycleRow>& rows, long from, long to, double CycleRow::*field) {
  from = std::max(from, 0L);
  to = std::min(to, static_cast<long>(rows.size()));
  if (to <= from) return kNaN;
  double s = 0.0;
  for (long i = from; i < to; ++i) s += rows[static_cast<std::size_t>(i)].*field;
  return s / static_cast<double>(to - from);
}

// Per-cycle statistic of one tick column.
template <typename Fn>
std::vector<double> per_cycle(const EpisodeLog& log, int n_per, int col, Fn fn) {
  std::vector<double> out;
  for (long i = 0; i + n_per <= log.ticks.rows(); i += n_per) {
    const Eigen::ArrayXd seg = log.ticks.col(col).segment(i, n_per);
    out.push_back(fn(seg));
  }
  return out;
}

double range_mean(const std::vector<double>& v, long from, long to) {
  from = std::max(from, 0L);
  to = std::min(to, static_cast<long>(v.size()));
  if (to <= from) return kNaN;
  return std::accumulate(v.begin() + from, v.begin() + to, 0.0) / static_cast<double>(to - from);
}

json check(double value, const std::string& op, double threshold) {
  bool pass = false;
  if (op == "<=") pass = value <= threshold;
  if (op == "<") pass = value < threshold;
  if (op == ">=") pass = value >= threshold;
  if (op == ">") pass = value > threshold;
  return {{"value", value}, {"op", op}, {"threshold", threshold}, {"pass", pass}};
}

json check_band(double value, double lo, double hi) {
  return {{"value", value}, {"op", "in"}, {"threshold", {lo, hi}}, {"pass", value >= lo && value <= hi}};
}

// logs of one arm ordered as they were planned (by seed)
std::vector<const EpisodeLog*> arm(const std::vector<EpisodeLog>& logs, const std::string& name) {
  std::vector<const EpisodeLog*> out;
  for (const auto& l : logs)
    if (l.arm == name) out.push_back(&l);
  if (out.empty()) throw SchemaError("summary: no episodes for arm '" + name + "'");
  return out;
}

std::vector<double> median_curve(const std::vector<const EpisodeLog*>& logs, double CycleRow::*field) {
  std::size_t n = logs.front()->cycles.size();
  for (const auto* l : logs) n = std::min(n, l->cycles.size());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v;
    for (const auto* l : logs) v.push_back(l->cycles[i].*field);
    out[i] = median(v);
  }
  return out;
}

EpisodeSpec base_spec(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& arm, double x_amp) {
  EpisodeSpec s;
  s.arm = arm;
  s.name = arm + "_s" + std::to_string(seed);
  s.seed = seed;
  s.cycles = cfg.cycles;
  s.x_amp = x_amp;
  s.impulses = cfg.disturbance.enabled;
  s.schedule = cfg.schedule;
  return s;
}

// OLS slope of y against index with its t statistic.
std::pair<double, double> slope_t(const std::vector<double>& y) {
  const auto n = static_cast<double>(y.size());
  if (y.size() < 3) return {kNaN, kNaN};
  const double mx = (n - 1) / 2.0;
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxx += (static_cast<double>(i) - mx) * (static_cast<double>(i) - mx);
    sxy += (static_cast<double>(i) - mx) * (y[i] - my);
  }
  const double b = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - my - b * (static_cast<double>(i) - mx);
    sse += e * e;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  return {b, se > 0.0 ? b / se : 0.0};
}

}  // namespace

std::vector<std::uint64_t> seed_list(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.seed_count; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
  return seeds;
}

std::vector<ScheduleEntry> context_schedule(const ExperimentConfig& cfg) {
  if (!cfg.schedule.empty()) return cfg.schedule;
  static const PatientMode pattern[] = {PatientMode::Stable, PatientMode::Fatigued, PatientMode::Stable,
                                        PatientMode::Unstable};
  std::vector<ScheduleEntry> out;
  const int len = cfg.protocol.segment_cycles;
  for (int from = 0, i = 0; from < cfg.cycles; from += len, ++i)
    out.push_back({pattern[i % 4], from, std::min(from + len, cfg.cycles)});
  return out;
}

std::vector<EpisodeSpec> plan_episodes(const ExperimentConfig& cfg, double x_amp) {
  std::vector<EpisodeSpec> plan;
  const auto& sc = cfg.scenario;
  const auto& pr = cfg.protocol;
  for (const auto seed : seed_list(cfg)) {
    if (sc == "f1") {
      for (const auto kind : {PresetKind::Rigid, PresetKind::Soft, PresetKind::Adaptive}) {
        EpisodeSpec s = base_spec(cfg, seed, std::string(to_string(kind)), x_amp);
        s.preset = kind;
        plan.push_back(s);
      }
    } else if (sc == "f2") {
      plan.push_back(base_spec(cfg, seed, "adaptive", x_amp));
      EpisodeSpec s = base_spec(cfg, seed, "control", x_amp);
      s.surrogate = true;
      plan.push_back(s);
    } else if (sc == "f3") {
      EpisodeSpec s = base_spec(cfg, seed, "continuous", x_amp);
      s.lead_drift = pr.lead_drift;
      s.drift_start = pr.freeze_start;
      s.drift_end = pr.freeze_end;
      plan.push_back(s);
      s = base_spec(cfg, seed, "freeze", x_amp);
      s.lead_drift = pr.lead_drift;
      s.drift_start = pr.freeze_start;
      s.drift_end = pr.freeze_end;
      s.freeze_start = pr.freeze_start;
      s.freeze_end = pr.freeze_end;
      plan.push_back(s);
    } else if (sc == "f4") {
      plan.push_back(base_spec(cfg, seed, "adaptive", x_amp));
    } else if (sc == "f5") {
      EpisodeSpec s = base_spec(cfg, seed, "nominal", x_amp);
      s.impulses = true;
      plan.push_back(s);
      s = base_spec(cfg, seed, "delayed", x_amp);
      s.impulses = true;
      s.extra_delay = pr.delay_arm;
      plan.push_back(s);
      s = base_spec(cfg, seed, "noise_free", x_amp);
      s.impulses = true;
      s.noise = false;
      plan.push_back(s);
    } else if (sc == "f6") {
      EpisodeSpec s = base_spec(cfg, seed, "context", x_amp);
      s.schedule = context_schedule(cfg);
      s.policy = cfg.context.policy_enabled;
      plan.push_back(s);
    } else if (sc == "rate") {
      const std::pair<const char*, double> rates[] = {{"dt_120", 1.0 / 120.0}, {"dt_500", 1.0 / 500.0},
                                                      {"dt_1000", 1.0 / 1000.0}};
      for (const auto& [name, dt] : rates) {
        EpisodeSpec s = base_spec(cfg, seed, name, x_amp);
        s.learn = false;
        s.dt_phys = dt;
        plan.push_back(s);
      }
    } else {
      EpisodeSpec s = base_spec(cfg, seed, "custom", x_amp);
      s.preset = parse_preset(cfg.preset);
      plan.push_back(s);
    }
  }
  return plan;
}

RunResult run_protocol(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult run;
  run.config = cfg;
  run.x_amp = calibrated_amplitude(cfg);
  for (const auto& spec : plan_episodes(cfg, run.x_amp)) run.logs.push_back(run_episode(cfg, spec));
  run.summary = summarize(cfg, run.logs);
  return run;
}

Eigen::ArrayXd energy_deviations(const std::vector<double>& energy, int window, int from) {
  from = std::max(from, window);
  const long n = static_cast<long>(energy.size()) - from;
  Eigen::ArrayXd dev = Eigen::ArrayXd::Zero(std::max(n, 0L));
  for (long i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(from + i);
    double base = 0.0;
    for (std::size_t q = c - static_cast<std::size_t>(window); q < c; ++q) base += energy[q];
    base /= window;
    dev(i) = (energy[c] - base) / base;
  }
  return dev;
}

std::vector<double> stored_energy_per_cycle(const ExperimentConfig& cfg, const EpisodeLog& log) {
  const int n_per = cfg.ticks_per_cycle();
  const double m = cfg.plant.m_eff;
  std::vector<double> out;
  for (std::size_t c = 0; c < log.cycles.size(); ++c) {
    const double kp = apply_mode(cfg.patient, parse_mode(log.cycles[c].context_truth)).k_p;
    double sum = 0.0;
    const long i0 = static_cast<long>(c) * n_per;
    for (long i = i0; i < i0 + n_per && i < log.ticks.rows(); ++i) {
      const double v = log.ticks(i, kV), e_x = log.ticks(i, kX) - log.ticks(i, kXRef), f = log.ticks(i, kFContact);
      sum += 0.5 * m * v * v + 0.5 * log.ticks(i, kK) * e_x * e_x + f * f / (2.0 * kp);
    }
    out.push_back(sum / n_per);
  }
  return out;
}

ReturnTimes impulse_return_times(const ExperimentConfig& cfg, const EpisodeLog& log) {
  ReturnTimes out;
  const int n_per = cfg.ticks_per_cycle();
  const long n = log.ticks.rows();
  const double m = cfg.plant.m_eff;
  const double hold = 0.2, horizon = 3.0, band = 0.10;
  const long span = static_cast<long>(std::ceil((horizon + hold) / kTickDt)) + 1;
  const long guard = static_cast<long>(std::lround(0.5 / kTickDt));
  const int base_cycles = 5;

  std::vector<long> onsets;
  for (long i = 0; i < n; ++i) {
    const bool on = log.ticks(i, kFDisturb) != 0.0;
    const bool was_on = i > 0 && log.ticks(i - 1, kFDisturb) != 0.0;
    if (on && !was_on) onsets.push_back(i);
  }

  auto kp_at = [&](long tick) {
    const auto ci = static_cast<std::size_t>(tick / n_per);
    PatientMode mode = PatientMode::Stable;
    if (ci < log.cycles.size()) mode = parse_mode(log.cycles[ci].context_truth);
    return apply_mode(cfg.patient, mode).k_p;
  };

  for (std::size_t e = 0; e < onsets.size(); ++e) {
    const long i0 = onsets[e];
    const bool crowded = (e > 0 && i0 - onsets[e - 1] < guard) ||
                         (e + 1 < onsets.size() && onsets[e + 1] - i0 <= span);
    if (i0 < base_cycles * n_per || i0 + span > n || crowded) {
      ++out.skipped;
      continue;
    }
    const double kp = kp_at(i0);
    // level: mean stored interaction energy over the preceding cycles
    double level = 0.0;
    for (long i = i0 - base_cycles * n_per; i < i0; ++i) {
      const double v = log.ticks(i, kV), e_x = log.ticks(i, kX) - log.ticks(i, kXRef), f = log.ticks(i, kFContact);
      level += 0.5 * m * v * v + 0.5 * log.ticks(i, kK) * e_x * e_x + f * f / (2.0 * kp);
    }
    level /= static_cast<double>(base_cycles * n_per);

    // deviation from the phase-aligned median of the preceding cycles
    Eigen::ArrayXd rel(span);
    double xs[base_cycles], vs[base_cycles];
    for (long j = 0; j < span; ++j) {
      const long i = i0 + j;
      for (int q = 0; q < base_cycles; ++q) {
        xs[q] = log.ticks(i - (q + 1) * n_per, kX);
        vs[q] = log.ticks(i - (q + 1) * n_per, kV);
      }
      std::nth_element(xs, xs + base_cycles / 2, xs + base_cycles);
      std::nth_element(vs, vs + base_cycles / 2, vs + base_cycles);
      const double dx = log.ticks(i, kX) - xs[base_cycles / 2];
      const double dv = log.ticks(i, kV) - vs[base_cycles / 2];
      rel(j) = (0.5 * m * dv * dv + 0.5 * (log.ticks(i, kK) + kp) * dx * dx) / level;
    }
    const auto tau = return_time(rel, kTickDt, band, hold, horizon);
    if (tau) {
      out.values.push_back(*tau);
    } else {
      ++out.missing;
    }
  }
  return out;
}

json summarize(const ExperimentConfig& cfg, const std::vector<EpisodeLog>& logs) {
  json s;
  s["scenario"] = cfg.scenario;
  std::vector<std::uint64_t> seeds;
  for (const auto& l : logs)
    if (std::find(seeds.begin(), seeds.end(), l.seed) == seeds.end()) seeds.push_back(l.seed);
  s["seeds"] = seeds;
  s["config_hash"] = config_hash(cfg);
  json metrics = json::object();
  json acc = json::object();
  const int n_per = cfg.ticks_per_cycle();
  const long eval = cfg.protocol.eval_start;
  const auto& sc = cfg.scenario;

  if (sc == "f1") {
    std::map<std::string, std::vector<double>> ed, mv, p2p;
    std::vector<double> ed_ratio, mv_ratio, p2p_margin;
    const auto rig = arm(logs, "rigid"), sof = arm(logs, "soft"), ada = arm(logs, "adaptive");
    for (std::size_t i = 0; i < ada.size(); ++i) {
      double v_ed[3], v_mv[3], v_pp[3];
      const EpisodeLog* trio[3] = {rig[i], sof[i], ada[i]};
      for (int p = 0; p < 3; ++p) {
        const auto& rows = trio[p]->cycles;
        const long end = static_cast<long>(rows.size());
        v_ed[p] = cycle_mean(rows, eval, end, &CycleRow::E_diss);
        v_mv[p] = cycle_mean(rows, eval, end, &CycleRow::moment_var);
        const auto pp = per_cycle(*trio[p], n_per, kFContact,
                                  [](const Eigen::ArrayXd& f) { return f.maxCoeff() - f.minCoeff(); });
        v_pp[p] = range_mean(pp, eval, end);
        ed[trio[p]->arm].push_back(v_ed[p]);
        mv[trio[p]->arm].push_back(v_mv[p]);
        p2p[trio[p]->arm].push_back(v_pp[p]);
      }
      ed_ratio.push_back(v_ed[2] / std::min(v_ed[0], v_ed[1]));
      mv_ratio.push_back(v_mv[2] / v_mv[0]);
      p2p_margin.push_back(v_pp[0] / std::max(v_pp[1], v_pp[2]));
    }
    for (const char* name : {"rigid", "soft", "adaptive"}) {
      metrics[name] = {{"dissipated_energy_per_cycle", median(ed[name])},
                       {"moment_variance", median(mv[name])},
                       {"force_peak_to_peak", median(p2p[name])}};
      std::vector<double> rt;
      int missing = 0;
      for (const auto* l : arm(logs, name)) {
        const auto r = impulse_return_times(cfg, *l);
        rt.insert(rt.end(), r.values.begin(), r.values.end());
        missing += r.missing;
      }
      metrics[name]["return_time_median"] = median(rt);
      metrics[name]["return_time_events"] = rt.size();
      metrics[name]["return_time_missing"] = missing;
    }
    metrics["dissipation_ratio"] = median(ed_ratio);
    metrics["moment_variance_ratio"] = median(mv_ratio);
    metrics["rigid_peak_to_peak_margin"] = median(p2p_margin);
    acc["f1_dissipation_ratio"] = check(median(ed_ratio), "<=", 0.6);
    acc["f1_moment_variance_ratio"] = check(median(mv_ratio), "<=", 0.7);
    acc["f1_rigid_largest_peak_to_peak"] = check(median(p2p_margin), ">", 1.0);
  } else if (sc == "f2") {
    std::vector<double> dr, rf, drc, hf_early, hf_late;
    const auto main = arm(logs, "adaptive"), ctl = arm(logs, "control");
    for (std::size_t i = 0; i < main.size(); ++i) {
      const auto& m = main[i]->cycles;
      const long end = static_cast<long>(m.size());
      const double r0 = cycle_mean(m, 0, 5, &CycleRow::r), r1 = cycle_mean(m, end - 10, end, &CycleRow::r);
      dr.push_back(r1 - r0);
      rf.push_back(r1);
      const auto& c = ctl[i]->cycles;
      drc.push_back(cycle_mean(c, end - 10, end, &CycleRow::r) - cycle_mean(c, 0, 5, &CycleRow::r));
      const long span = std::min<long>(10L * n_per, main[i]->ticks.rows() / 2);
      const Eigen::ArrayXd acc_early = main[i]->ticks.col(kSensAccel).head(span);
      const Eigen::ArrayXd acc_late = main[i]->ticks.col(kSensAccel).tail(span);
      if (span >= 240) {
        const auto se = spectral_bands(acc_early, 120.0), sl = spectral_bands(acc_late, 120.0);
        hf_early.push_back(se.band_high / se.total);
        hf_late.push_back(sl.band_high / sl.total);
      }
    }
    metrics["r_first5"] = median(std::vector<double>([&] {
      std::vector<double> v;
      for (const auto* l : main) v.push_back(cycle_mean(l->cycles, 0, 5, &CycleRow::r));
      return v;
    }()));
    metrics["r_last10"] = median(rf);
    metrics["delta_r"] = median(dr);
    metrics["control_delta_r"] = median(drc);
    metrics["imu_high_band_fraction_early"] = median(hf_early);
    metrics["imu_high_band_fraction_late"] = median(hf_late);
    metrics["r_curve"] = median_curve(main, &CycleRow::r);
    metrics["control_r_curve"] = median_curve(ctl, &CycleRow::r);
    acc["f2_delta_r"] = check(median(dr), ">=", 0.2);
    acc["f2_final_r"] = check(median(rf), ">=", 0.75);
    acc["f2_control_delta_r"] = check(median(drc), "<", 0.05);
  } else if (sc == "f3") {
    std::vector<double> traj, fstd, gain, recov;
    const auto cont = arm(logs, "continuous"), frz = arm(logs, "freeze");
    const long fs0 = cfg.protocol.freeze_start, fe = cfg.protocol.freeze_end;
    for (std::size_t i = 0; i < cont.size(); ++i) {
      const auto& c = cont[i]->cycles;
      const long end = static_cast<long>(c.size());
      traj.push_back(cycle_mean(c, end - 10, end, &CycleRow::traj_rms) / cycle_mean(c, 0, 5, &CycleRow::traj_rms));
      const auto sd = per_cycle(*cont[i], n_per, kFContact,
                                [](const Eigen::ArrayXd& f) { return std::sqrt(population_variance(f)); });
      fstd.push_back(1.0 - range_mean(sd, end - 10, end) / range_mean(sd, 0, 5));
      const auto& f = frz[i]->cycles;
      gain.push_back(cycle_mean(f, fs0, fe, &CycleRow::E_cycle) / cycle_mean(f, fs0 - 10, fs0, &CycleRow::E_cycle));
      double rc = kNaN;
      for (long j = 0; fe + j + 5 <= end && j <= 30; ++j) {
        const double a = cycle_mean(f, fe + j, fe + j + 5, &CycleRow::E_cycle);
        const double b = cycle_mean(c, fe + j, fe + j + 5, &CycleRow::E_cycle);
        if (a <= 1.10 * b) {
          rc = static_cast<double>(j);
          break;
        }
      }
      recov.push_back(std::isnan(rc) ? 999.0 : rc);
    }
    metrics["traj_ratio"] = median(traj);
    metrics["force_std_reduction"] = median(fstd);
    metrics["freeze_energy_gain"] = median(gain);
    metrics["recovery_cycles"] = median(recov);
    metrics["traj_curve_mm"] = [&] {
      auto v = median_curve(cont, &CycleRow::traj_rms);
      for (auto& x : v) x *= 1000.0;
      return v;
    }();
    metrics["freeze_energy_curve"] = median_curve(frz, &CycleRow::E_cycle);
    metrics["continuous_energy_curve"] = median_curve(cont, &CycleRow::E_cycle);
    acc["f3_traj_ratio"] = check(median(traj), "<=", 0.5);
    acc["f3_force_std_reduction"] = check(median(fstd), ">=", 0.25);
    acc["f3_freeze_energy_gain"] = check(median(gain), ">=", 1.10);
    acc["f3_recovery_cycles"] = check(median(recov), "<=", 30.0);
  } else if (sc == "f4") {
    std::vector<double> ratio, early, slope, tstat, e0, e1;
    const auto ada = arm(logs, "adaptive");
    for (const auto* l : ada) {
      const auto& c = l->cycles;
      const long end = static_cast<long>(c.size());
      const double a = cycle_mean(c, 0, 5, &CycleRow::E_cycle), b = cycle_mean(c, end - 10, end, &CycleRow::E_cycle);
      e0.push_back(a);
      e1.push_back(b);
      ratio.push_back(b / a);
      early.push_back((a - cycle_mean(c, 10, 15, &CycleRow::E_cycle)) / (a - b));
      std::vector<double> tail;
      for (long i = std::max(0L, end - 20); i < end; ++i) tail.push_back(c[static_cast<std::size_t>(i)].E_cycle);
      const auto [b1, t1] = slope_t(tail);
      slope.push_back(b1);
      tstat.push_back(t1);
    }
    metrics["energy_first5"] = median(e0);
    metrics["energy_last10"] = median(e1);
    metrics["energy_ratio"] = median(ratio);
    metrics["early_fraction"] = median(early);
    metrics["tail_slope_per_cycle"] = median(slope);
    metrics["tail_slope_t"] = median(tstat);
    metrics["energy_curve"] = median_curve(ada, &CycleRow::E_cycle);
    metrics["k_curve"] = median_curve(ada, &CycleRow::k);
    metrics["c_curve"] = median_curve(ada, &CycleRow::c);
    acc["f4_energy_ratio"] = check_band(median(ratio), 0.4, 0.7);
    acc["f4_early_fraction"] = check(median(early), ">=", 0.5);
  } else if (sc == "f5") {
    for (const char* name : {"nominal", "delayed", "noise_free"}) {
      std::vector<double> rt, stab, stab_s;
      int missing = 0, skipped = 0;
      for (const auto* l : arm(logs, name)) {
        const auto r = impulse_return_times(cfg, *l);
        rt.push_back(median(r.values));
        missing += r.missing;
        skipped += r.skipped;
        std::vector<double> exchange;
        for (const auto& r : l->cycles) exchange.push_back(r.E_cycle);
        const auto dev = energy_deviations(exchange, 5, static_cast<int>(eval));
        stab.push_back(dev.size() >= 50 ? stability_rate(dev, 0.10) : kNaN);
        const auto dev_s = energy_deviations(stored_energy_per_cycle(cfg, *l), 5, static_cast<int>(eval));
        stab_s.push_back(dev_s.size() >= 50 ? stability_rate(dev_s, 0.10) : kNaN);
      }
      metrics[name] = {{"return_time_median", median(rt)},
                       {"stability_rate", median(stab)},
                       {"stored_energy_stability_rate", median(stab_s)},
                       {"events_missing", missing},
                       {"events_skipped", skipped}};
      if (std::string(name) == "noise_free") continue;
      acc[std::string("f5_") + name + "_return_time"] = check_band(median(rt), 0.15, 0.6);
      acc[std::string("f5_") + name + "_stability_rate"] = check(median(stab), ">=", 0.85);
    }
  } else if (sc == "f6") {
    std::vector<ContextDecision> decisions;
    std::vector<double> dforce, drop, dtraj;
    const int settle = cfg.context.smoothing;
    for (const auto* l : arm(logs, "context")) {
      double fs_sum = 0, ff_sum = 0, es = 0, ef = 0, ts = 0, tf = 0;
      int ns = 0, nf = 0;
      for (std::size_t i = 0; i < l->cycles.size(); ++i) {
        const auto& r = l->cycles[i];
        if (r.context_label != "none") {
          ContextDecision d;
          d.truth = parse_mode(r.context_truth);
          d.label = parse_mode(r.context_label);
          decisions.push_back(d);
        }
        // skip cycles right after a mode change
        bool settled = i >= static_cast<std::size_t>(settle);
        for (int q = 1; settled && q <= settle; ++q) settled = l->cycles[i - q].context_truth == r.context_truth;
        if (!settled) continue;
        if (r.context_truth == "stable") {
          fs_sum += r.peak_force, es += r.E_cycle, ts += r.traj_rms, ++ns;
        } else if (r.context_truth == "fatigued") {
          ff_sum += r.peak_force, ef += r.E_cycle, tf += r.traj_rms, ++nf;
        }
      }
      if (ns && nf) {
        dforce.push_back(fs_sum / ns - ff_sum / nf);
        drop.push_back(1.0 - (ef / nf) / (es / ns));
        dtraj.push_back(std::abs(tf / nf - ts / ns) * 1000.0);
      }
    }
    const auto a = evaluate_accuracy(decisions);
    metrics["accuracy"] = a.accuracy;
    metrics["accuracy_ci_half_width"] = a.ci_half_width;
    metrics["windows"] = a.n;
    metrics["underpowered"] = a.underpowered;
    metrics["fatigued_force_reduction"] = median(dforce);
    metrics["fatigued_energy_drop"] = median(drop);
    metrics["fatigued_traj_shift_mm"] = median(dtraj);
    acc["f6_accuracy"] = check(a.n >= 300 ? a.accuracy : 0.0, ">=", 0.88);
    acc["f6_fatigued_force_reduction"] = check_band(median(dforce), 0.8, 1.6);
    acc["f6_fatigued_energy_drop"] = check_band(median(drop), 0.05, 0.25);
    acc["f6_fatigued_traj_shift_mm"] = check(median(dtraj), "<=", 0.5);
  } else if (sc == "rate") {
    std::vector<double> dev120, dev500, dd120, dd500;
    const auto a120 = arm(logs, "dt_120"), a500 = arm(logs, "dt_500"), a1000 = arm(logs, "dt_1000");
    for (std::size_t i = 0; i < a1000.size(); ++i) {
      const long end = static_cast<long>(a1000[i]->cycles.size());
      auto e = [&](const EpisodeLog* l, double CycleRow::*f) { return cycle_mean(l->cycles, 0, end, f); };
      const double ref = e(a1000[i], &CycleRow::E_cycle), ref_d = e(a1000[i], &CycleRow::E_diss);
      dev120.push_back(std::abs(e(a120[i], &CycleRow::E_cycle) - ref) / std::abs(ref));
      dev500.push_back(std::abs(e(a500[i], &CycleRow::E_cycle) - ref) / std::abs(ref));
      dd120.push_back(std::abs(e(a120[i], &CycleRow::E_diss) - ref_d) / ref_d);
      dd500.push_back(std::abs(e(a500[i], &CycleRow::E_diss) - ref_d) / ref_d);
    }
    metrics["energy_deviation_120"] = median(dev120);
    metrics["energy_deviation_500"] = median(dev500);
    metrics["dissipation_deviation_120"] = median(dd120);
    metrics["dissipation_deviation_500"] = median(dd500);
    metrics["refinement_ordered"] = median(dev500) < median(dev120);
    acc["rate_energy_deviation_120"] = check(median(dev120), "<", 0.05);
    acc["rate_refinement_ordered_500"] = check(median(dev500), "<", median(dev120));
  } else {
    const auto l = arm(logs, "custom");
    std::vector<double> e, r, t, d;
    for (const auto* x : l) {
      const long end = static_cast<long>(x->cycles.size());
      e.push_back(cycle_mean(x->cycles, 0, end, &CycleRow::E_cycle));
      r.push_back(cycle_mean(x->cycles, 0, end, &CycleRow::r));
      t.push_back(cycle_mean(x->cycles, 0, end, &CycleRow::traj_rms));
      d.push_back(cycle_mean(x->cycles, 0, end, &CycleRow::E_diss));
    }
    metrics["energy_mean"] = median(e);
    metrics["r_mean"] = median(r);
    metrics["traj_rms_mean"] = median(t);
    metrics["dissipated_energy_mean"] = median(d);
  }
  s["metrics"] = metrics;
  s["acceptance"] = acc;
  return s;
}

bool all_passed(const json& summary) {
  for (const auto& item : summary.at("acceptance").items())
    if (!item.value().at("pass").get<bool>()) return false;
  return true;
}

namespace {

void write_curves(const RunResult& run, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::string> arms;
  for (const auto& l : run.logs)
    if (std::find(arms.begin(), arms.end(), l.arm) == arms.end()) arms.push_back(l.arm);
  for (const auto& a : arms) {
    const auto logs = arm(run.logs, a);
    std::vector<double> idx;
    const auto e = median_curve(logs, &CycleRow::E_cycle);
    for (std::size_t i = 0; i < e.size(); ++i) idx.push_back(static_cast<double>(i));
    write_columns_csv(dir + "/" + a + ".csv",
                      {"cycle", "E_cycle", "E_diss", "r", "traj_rms", "peak_force", "moment_var", "k", "c"},
                      {idx, e, median_curve(logs, &CycleRow::E_diss), median_curve(logs, &CycleRow::r),
                       median_curve(logs, &CycleRow::traj_rms), median_curve(logs, &CycleRow::peak_force),
                       median_curve(logs, &CycleRow::moment_var), median_curve(logs, &CycleRow::k),
                       median_curve(logs, &CycleRow::c)});
  }
}

}  // namespace

void write_run(const RunResult& run, const std::string& dir) {
  fs::create_directories(dir);
  write_json(dir + "/config.json", to_json(run.config));
  json manifest;
  manifest["config_hash"] = config_hash(run.config);
  manifest["x_amp"] = run.x_amp;
  manifest["episodes"] = json::array();
  for (const auto& l : run.logs) {
    manifest["episodes"].push_back({{"name", l.name}, {"arm", l.arm}, {"seed", l.seed}});
    const std::string ed = dir + "/" + l.name;
    fs::create_directories(ed);
    write_ticks_csv(ed + "/ticks.csv", l.ticks);
    write_cycles_csv(ed + "/cycles.csv", l.cycles);
    write_decisions_csv(ed + "/decisions.csv", l.decisions);
  }
  write_json(dir + "/manifest.json", manifest);
  write_json(dir + "/summary.json", run.summary);
  write_curves(run, dir + "/curves");
}

ReportResult report(const std::string& dir, bool allow_hash_mismatch) {
  const ExperimentConfig cfg = config_from_json(read_json(dir + "/config.json"));
  const json manifest = read_json(dir + "/manifest.json");
  const std::string recorded = manifest.at("config_hash").get<std::string>();
  ReportResult out;
  out.hash_ok = recorded == config_hash(cfg);
  if (!out.hash_ok && !allow_hash_mismatch)
    throw HashMismatch("report: config hash " + config_hash(cfg) + " does not match recorded " + recorded);

  RunResult run;
  run.config = cfg;
  run.x_amp = manifest.at("x_amp").get<double>();
  for (const auto& e : manifest.at("episodes")) {
    EpisodeLog l;
    l.name = e.at("name").get<std::string>();
    l.arm = e.at("arm").get<std::string>();
    l.seed = e.at("seed").get<std::uint64_t>();
    const std::string ed = dir + "/" + l.name;
    l.ticks = read_ticks_csv(ed + "/ticks.csv");
    l.cycles = read_cycles_csv(ed + "/cycles.csv");
    compute_cycle_metrics(cfg, l);
    run.logs.push_back(std::move(l));
  }
  out.summary = summarize(cfg, run.logs);
  run.summary = out.summary;
  if (fs::exists(dir + "/summary.json")) out.matches_stored = read_json(dir + "/summary.json") == out.summary;
  write_json(dir + "/report_summary.json", out.summary);
  write_curves(run, dir + "/curves");
  return out;
}

}  // namespace rehab
