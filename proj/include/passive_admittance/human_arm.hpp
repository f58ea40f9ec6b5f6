#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "passive_admittance/core_types.hpp"

namespace passive_admittance {

struct Waypoint {
  double t = 0.0;
  DofVector x;
};

struct Sinusoid {
  DofVector amplitude;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
};

/// The operator grips harder: inside [t_start, t_end) the hand stiffness
/// becomes k_stiff.
struct StiffeningEvent {
  double t_start = 0.0;
  double t_end = 0.0;
  DofVector k_stiff;
};

/// Spring-damper stand-in for the operator's hand.
struct ArmModel {
  DofVector k_h;
  DofVector d_h;
  std::vector<Waypoint> waypoints;  ///< piecewise-linear intent, held at the ends
  std::optional<Sinusoid> sinusoid;
  std::vector<StiffeningEvent> stiffening;
  int sensor_delay = 0;             ///< control ticks
  double force_noise = 0.0;         ///< std-dev of additive force noise

  static ArmModel passive(std::size_t n);
};

void validate_arm(const ArmModel& arm, std::size_t n);

/// Intended hand pose at time t.
DofVector hand_target(const ArmModel& arm, double t);
DofVector hand_stiffness(const ArmModel& arm, double t);

/// F_ext = k_h(t) (x_h(t) − x) − d_h v for an already delayed robot state.
ForceSample arm_force(const ArmModel& arm, const RobotState& delayed, double t);

/// Holds the measurement delay line and noise source for one scenario.
class HumanArm {
 public:
  HumanArm(ArmModel model, const RobotState& initial, std::uint64_t seed);

  ForceSample sense(const RobotState& measured, double t);
  const ArmModel& model() const noexcept { return model_; }

 private:
  ArmModel model_;
  std::deque<RobotState> delay_line_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

}  // namespace passive_admittance
