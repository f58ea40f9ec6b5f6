#include "passive_admittance/deviation_detector.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace passive_admittance {

void validate_detector(const DetectorConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ValidationError("detector.epsilon", "must be positive");
  if (!(cfg.window > 0.0)) throw ValidationError("detector.window", "must be positive");
  if (!(cfg.accel_cutoff > 0.0)) {
    throw ValidationError("detector.accel_cutoff", "must be positive");
  }
}

std::size_t window_length(double window, double dt) {
  // 0.030 / 0.001 is 30.000000000000004 in binary floating point.
  const double ratio = window / dt;
  const auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  return n == 0 ? 1 : n;
}

double compute_psi(const ForceSample& f, const DofVector& a, const DofVector& v,
                   const AdmittanceParams& p) {
  return (f.f - p.m.cwiseProduct(a) - p.d.cwiseProduct(v)).norm();
}

DeviationDetector::DeviationDetector(const DetectorConfig& cfg, double dt, const DofVector& v0)
    : cfg_(cfg),
      dt_(dt),
      v_prev_(v0),
      accel_(DofVector::Zero(v0.size())),
      buffer_(window_length(cfg.window, dt), 0.0) {
  validate_detector(cfg);
  if (!(dt > 0.0)) throw std::invalid_argument("detector step must be positive");
  if (std::isinf(cfg.accel_cutoff)) {
    alpha_ = 1.0;
  } else {
    const double tau = 1.0 / (2.0 * std::numbers::pi * cfg.accel_cutoff);
    alpha_ = dt / (dt + tau);
  }
}

DofVector DeviationDetector::estimate_acceleration(const DofVector& v) {
  const DofVector raw = (v - v_prev_) / dt_;
  accel_ += alpha_ * (raw - accel_);
  v_prev_ = v;
  return accel_;
}

bool DeviationDetector::update(double psi, double t) {
  if (!(psi >= 0.0)) throw std::invalid_argument("psi must be non-negative");
  sum_ += psi - buffer_[head_];
  buffer_[head_] = psi;
  head_ = (head_ + 1) % buffer_.size();
  // Running sums drift; resynchronize once per full lap of the ring.
  if (head_ == 0) sum_ = std::accumulate(buffer_.begin(), buffer_.end(), 0.0);
  average_ = sum_ / static_cast<double>(buffer_.size());
  const bool raised = average_ > cfg_.epsilon;
  if (raised && !flag_) last_flag_time_ = t;
  flag_ = raised;
  return flag_;
}

std::vector<double> DeviationDetector::window_samples() const {
  std::vector<double> out;
  out.reserve(buffer_.size());
  for (std::size_t i = 0; i < buffer_.size(); ++i) {
    out.push_back(buffer_[(head_ + i) % buffer_.size()]);
  }
  return out;
}

}  // namespace passive_admittance
