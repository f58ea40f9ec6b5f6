#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "passive_admittance/core_types.hpp"

namespace passive_admittance {

struct DetectorConfig {
  double epsilon = 10.0;
  double window = 0.030;       // s
  double accel_cutoff = 20.0;  // Hz; +inf bypasses the filter
};

void validate_detector(const DetectorConfig& cfg);

/// Number of samples held by the moving-average window.
std::size_t window_length(double window, double dt);

/// Residual norm ‖F_ext − M_d a − D_d v‖ of the nominal mass-damper model.
double compute_psi(const ForceSample& f, const DofVector& a, const DofVector& v,
                   const AdmittanceParams& p);

/**
 * Flags deviations from the nominal mass-damper behavior.
 *
 * Acceleration is re-estimated from the measured velocity with a first-order
 * low-pass filtered finite difference, so the detector never sees the
 * model's own acceleration. The flag is true while the boxcar mean of ψ over
 * the window exceeds epsilon.
 */
class DeviationDetector {
 public:
  DeviationDetector(const DetectorConfig& cfg, double dt, const DofVector& v0);

  DofVector estimate_acceleration(const DofVector& v);
  bool update(double psi, double t);

  const DetectorConfig& config() const noexcept { return cfg_; }
  double moving_average() const noexcept { return average_; }
  bool flag() const noexcept { return flag_; }
  double last_flag_time() const noexcept { return last_flag_time_; }
  const DofVector& filtered_acceleration() const noexcept { return accel_; }
  /// Samples currently held, oldest first. Unfilled slots count as zero.
  std::vector<double> window_samples() const;
  std::size_t capacity() const noexcept { return buffer_.size(); }

 private:
  DetectorConfig cfg_;
  double dt_;
  double alpha_;
  DofVector v_prev_;
  DofVector accel_;
  std::vector<double> buffer_;
  std::size_t head_ = 0;
  double sum_ = 0.0;
  double average_ = 0.0;
  bool flag_ = false;
  double last_flag_time_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace passive_admittance
