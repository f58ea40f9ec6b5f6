#include "passive_admittance/human_arm.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace passive_admittance {

ArmModel ArmModel::passive(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  ArmModel arm;
  arm.k_h = DofVector::Zero(size);
  arm.d_h = DofVector::Zero(size);
  return arm;
}

namespace {

void require_size(const DofVector& v, std::size_t n, const std::string& field) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw ValidationError(field, "needs " + std::to_string(n) + " entries");
  }
}

void require_non_negative(const DofVector& v, const std::string& field) {
  if (!v.allFinite() || (v.array() < 0.0).any()) {
    throw ValidationError(field, "entries must be finite and non-negative");
  }
}

}  // namespace

void validate_arm(const ArmModel& arm, std::size_t n) {
  require_size(arm.k_h, n, "arm.stiffness");
  require_size(arm.d_h, n, "arm.damping");
  require_non_negative(arm.k_h, "arm.stiffness");
  require_non_negative(arm.d_h, "arm.damping");
  if (arm.sensor_delay < 0) throw ValidationError("arm.sensor_delay", "must be >= 0");
  if (!(arm.force_noise >= 0.0)) throw ValidationError("arm.force_noise", "must be >= 0");
  for (std::size_t i = 0; i < arm.waypoints.size(); ++i) {
    require_size(arm.waypoints[i].x, n, "arm.waypoints");
    if (i > 0 && !(arm.waypoints[i].t > arm.waypoints[i - 1].t)) {
      throw ValidationError("arm.waypoints", "times must be strictly increasing");
    }
  }
  if (arm.sinusoid) {
    require_size(arm.sinusoid->amplitude, n, "arm.sinusoid.amplitude");
    if (!(arm.sinusoid->frequency >= 0.0)) {
      throw ValidationError("arm.sinusoid.frequency", "must be >= 0");
    }
  }
  for (std::size_t i = 0; i < arm.stiffening.size(); ++i) {
    const auto& event = arm.stiffening[i];
    require_size(event.k_stiff, n, "arm.stiffening.stiffness");
    require_non_negative(event.k_stiff, "arm.stiffening.stiffness");
    if (!(event.t_end > event.t_start)) {
      throw ValidationError("arm.stiffening", "each interval needs end > start");
    }
    if (i > 0 && event.t_start < arm.stiffening[i - 1].t_end) {
      throw ValidationError("arm.stiffening", "intervals must be sorted and non-overlapping");
    }
  }
}

DofVector hand_target(const ArmModel& arm, double t) {
  const auto n = arm.k_h.size();
  DofVector target = DofVector::Zero(n);
  const auto& wp = arm.waypoints;
  if (!wp.empty()) {
    if (t <= wp.front().t) {
      target = wp.front().x;
    } else if (t >= wp.back().t) {
      target = wp.back().x;
    } else {
      std::size_t i = 1;
      while (wp[i].t < t) ++i;
      const double s = (t - wp[i - 1].t) / (wp[i].t - wp[i - 1].t);
      target = wp[i - 1].x + s * (wp[i].x - wp[i - 1].x);
    }
  }
  if (arm.sinusoid) {
    const auto& sine = *arm.sinusoid;
    target += sine.amplitude *
              std::sin(2.0 * std::numbers::pi * sine.frequency * t + sine.phase);
  }
  return target;
}

DofVector hand_stiffness(const ArmModel& arm, double t) {
  for (const auto& event : arm.stiffening) {
    if (t >= event.t_start && t < event.t_end) return event.k_stiff;
  }
  return arm.k_h;
}

ForceSample arm_force(const ArmModel& arm, const RobotState& delayed, double t) {
  const DofVector k = hand_stiffness(arm, t);
  ForceSample out;
  out.f = k.cwiseProduct(hand_target(arm, t) - delayed.x) - arm.d_h.cwiseProduct(delayed.v);
  out.t = t;
  return out;
}

HumanArm::HumanArm(ArmModel model, const RobotState& initial, std::uint64_t seed)
    : model_(std::move(model)), rng_(seed) {
  delay_line_.assign(static_cast<std::size_t>(model_.sensor_delay), initial);
}

ForceSample HumanArm::sense(const RobotState& measured, double t) {
  delay_line_.push_back(measured);
  const RobotState delayed = delay_line_.front();
  delay_line_.pop_front();
  ForceSample out = arm_force(model_, delayed, t);
  if (model_.force_noise > 0.0) {
    for (Eigen::Index j = 0; j < out.f.size(); ++j) {
      out.f[j] += model_.force_noise * noise_(rng_);
    }
  }
  return out;
}

}  // namespace passive_admittance
