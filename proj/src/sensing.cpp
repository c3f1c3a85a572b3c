#include "rehab/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace rehab {

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Force: return "force";
    case Channel::Accel: return "accel";
    case Channel::Position: return "position";
  }
  return "force";
}

void SensorSpec::validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("sensor: rate must be positive");
  if (noise_rel < 0.0 || noise_rel >= 0.5) throw std::invalid_argument("sensor: noise_rel must be in [0, 0.5)");
  if (!(corr_time > 0.0)) throw std::invalid_argument("sensor: corr_time must be positive");
}

std::pair<double, Ar1State> ar1_noise_factor(Stream& rng, const SensorSpec& spec, double dt, Ar1State prev) {
  const double eps = rng.normal() * spec.noise_rel;
  Ar1State next;
  next.primed = true;
  if (!prev.primed) {
    next.n = eps;
  } else {
    const double rho = std::exp(-dt / spec.corr_time);
    next.n = rho * prev.n + std::sqrt(1.0 - rho * rho) * eps;
  }
  return {1.0 + next.n, next};
}

SensorChannel::SensorChannel(Channel channel, const SensorSpec& spec, Stream stream)
    : channel_(channel), spec_(spec), stream_(stream) {
  spec_.validate();
}

double SensorChannel::next_time() const { return static_cast<double>(index_) / spec_.rate; }

bool SensorChannel::due(double t) const { return next_time() <= t + 1e-9; }

SensorFrame SensorChannel::sample(double true_value) {
  SensorFrame frame;
  frame.t = next_time();
  frame.channel = channel_;
  frame.clean_value = true_value;
  if (spec_.noise_rel == 0.0) {
    frame.value = true_value;
  } else {
    auto [factor, state] = ar1_noise_factor(stream_, spec_, 1.0 / spec_.rate, noise_);
    noise_ = state;
    frame.value = true_value * factor;
  }
  ++index_;
  return frame;
}

void LatestFrames::push(const SensorFrame& frame) {
  switch (frame.channel) {
    case Channel::Force: force = frame; break;
    case Channel::Accel: accel = frame; break;
    case Channel::Position:
      position_prev = position;
      position = frame;
      break;
  }
}

FusedObservation fuse(const LatestFrames& frames, double tick_t) {
  FusedObservation obs;
  obs.t = tick_t;
  if (!frames.force || !frames.accel || !frames.position) return obs;
  obs.valid = true;
  obs.force = frames.force->value;
  obs.accel = frames.accel->value;
  obs.position = frames.position->value;
  obs.stale_force = tick_t - frames.force->t;
  obs.stale_accel = tick_t - frames.accel->t;
  obs.stale_position = tick_t - frames.position->t;
  if (frames.position_prev) {
    const double dt = frames.position->t - frames.position_prev->t;
    obs.velocity_est = (frames.position->value - frames.position_prev->value) / dt;
  }
  return obs;
}

MotionObserver::MotionObserver(double bandwidth, double position_period, double x0, double v0)
    : gain_x_(2.0 * bandwidth * position_period),
      gain_v_(bandwidth * bandwidth * position_period),
      x_(x0),
      v_(v0) {}

void MotionObserver::correct(double measured_position) {
  const double residual = measured_position - x_;
  x_ += gain_x_ * residual;
  v_ += gain_v_ * residual;
}

void MotionObserver::propagate(double accel, double dt) {
  v_ += accel * dt;
  x_ += v_ * dt;
}

}  // namespace rehab
