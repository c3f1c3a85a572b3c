#pragma once

#include <optional>
#include <string_view>
#include <utility>

#include "rehab/rng.hpp"

namespace rehab {

enum class Channel { Force = 0, Accel = 1, Position = 2 };

std::string_view to_string(Channel channel);

struct SensorSpec {
  double rate = 1000.0;     // Hz
  double noise_rel = 0.05;  // relative std of the multiplicative factor
  double corr_time = 0.05;  // s

  void validate() const;
};

struct SensorFrame {
  double t = 0.0;
  Channel channel = Channel::Force;
  double value = 0.0;
  double clean_value = 0.0;
};

struct Ar1State {
  double n = 0.0;
  bool primed = false;
};

// One step of n' = rho n + sqrt(1 - rho^2) eps, eps ~ N(0, noise_rel^2),
// rho = exp(-dt / corr_time). The first call draws from the stationary law.
std::pair<double, Ar1State> ar1_noise_factor(Stream& rng, const SensorSpec& spec, double dt, Ar1State prev);

// A sensor emitting frames on its own grid t_j = j / rate.
class SensorChannel {
 public:
  SensorChannel(Channel channel, const SensorSpec& spec, Stream stream);

  bool due(double t) const;
  double next_time() const;
  SensorFrame sample(double true_value);

  Channel channel() const { return channel_; }
  const SensorSpec& spec() const { return spec_; }
  long frames_emitted() const { return index_; }

 private:
  Channel channel_;
  SensorSpec spec_;
  Stream stream_;
  Ar1State noise_;
  long index_ = 0;
};

struct LatestFrames {
  std::optional<SensorFrame> force;
  std::optional<SensorFrame> accel;
  std::optional<SensorFrame> position;
  std::optional<SensorFrame> position_prev;

  void push(const SensorFrame& frame);
};

struct FusedObservation {
  double t = 0.0;
  double force = 0.0;
  double accel = 0.0;
  double position = 0.0;
  double velocity_est = 0.0;
  double stale_force = 0.0;
  double stale_accel = 0.0;
  double stale_position = 0.0;
  bool valid = false;
};

// Zero-order hold of the newest frame per channel at tick_t. Frames stamped
// after tick_t are ignored by construction: the caller pushes only frames
// already emitted.
FusedObservation fuse(const LatestFrames& frames, double tick_t);

// Second-order complementary observer: camera positions correct the estimate,
// IMU acceleration propagates it between frames.
class MotionObserver {
 public:
  MotionObserver(double bandwidth, double position_period, double x0 = 0.0, double v0 = 0.0);

  void correct(double measured_position);
  void propagate(double accel, double dt);

  double position() const { return x_; }
  double velocity() const { return v_; }

 private:
  double gain_x_;
  double gain_v_;
  double x_;
  double v_;
};

}  // namespace rehab
