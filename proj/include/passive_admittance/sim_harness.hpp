#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "passive_admittance/adaptation_policy.hpp"
#include "passive_admittance/admittance_controller.hpp"
#include "passive_admittance/core_types.hpp"
#include "passive_admittance/deviation_detector.hpp"
#include "passive_admittance/energy_tank.hpp"
#include "passive_admittance/human_arm.hpp"

namespace passive_admittance {

/// Second-order lag standing in for the low-level position loop. When
/// disabled the robot tracks the admittance reference exactly.
struct TrackingConfig {
  bool enabled = false;
  double natural_frequency = 80.0;  // rad/s
  double damping_ratio = 0.1;
};

struct Scenario {
  std::string name;
  DofLayout layout;
  IntegratorConfig integrator;
  AdmittanceParams params;
  DetectorConfig detector;
  SafetyLimits limits;
  double tank_initial = 2.0;  // J
  bool split_metering = false;
  AdaptationConfig adaptation;
  TrackingConfig tracking;
  ArmModel arm;
  double duration = 1.0;  // s
  std::uint64_t seed = 0;

  /// Defaults for every field on the given layout.
  static Scenario defaults(const DofLayout& layout = DofLayout{});
  std::size_t ticks() const;
};

void validate_scenario(const Scenario& sc);
bool operator==(const Scenario& a, const Scenario& b);

/// State of one control tick. x, v are the admittance reference (the port
/// variables); a_est is the detector's filtered estimate; tank quantities are
/// taken before the tank step so that
/// tank_T[k+1] = tank_T[k] + (phi p_d − gamma p_m) dt.
struct TraceRecord {
  double t = 0.0;
  DofVector x, v, a_est, f_ext;
  double psi = 0.0;
  double psi_avg = 0.0;
  bool flag = false;
  DofVector m, d;
  double tank_T = 0.0;
  int phi = 1;
  int gamma = 1;
  double p_d = 0.0;
  double p_m = 0.0;
  bool adapting = false;
};

struct Trace {
  std::size_t dofs = 0;
  double dt = 0.0;
  std::vector<TraceRecord> records;
};

struct ScenarioResult {
  Trace trace;
  std::vector<AdaptationEvent> adaptations;
  std::size_t clamp_events = 0;
  std::optional<std::string> abort_reason;  ///< set when the run diverged
};

ScenarioResult run_scenario(const Scenario& sc);

struct PassivityReport {
  double w0 = 0.0;          ///< H(0) + T(0)
  double tolerance = 0.0;   ///< tol_audit used
  double min_margin = 0.0;  ///< min over t of ∫₀ᵗ vᵀF dτ + W(0)
  double min_margin_time = 0.0;
  bool violated = false;
  std::vector<double> violation_times;
};

/// Trapezoidal ∫ vᵀ F_ext checked against −W(0) − tol at every record.
PassivityReport passivity_audit(const Trace& trace, double tol_audit);

struct CalibrationPoint {
  double stiffness = 0.0;  ///< largest entry of the stiffened vector
  bool unstable = false;
  std::optional<double> detection_latency;  ///< first flag after onset, s
  double compliant_psi_peak = 0.0;          ///< largest ψ average before onset
  double early_amplitude = 0.0;
  double late_amplitude = 0.0;
};

/**
 * Sweeps the first stiffening event's stiffness over a scale grid with
 * adaptation disabled. A point is unstable when the velocity oscillation in
 * the last quarter second of the first second after onset is larger than in
 * the second quarter, or when the velocity bound is hit.
 */
std::vector<CalibrationPoint> calibrate_stiffness(const Scenario& sc,
                                                  const std::vector<double>& scales);

}  // namespace passive_admittance
