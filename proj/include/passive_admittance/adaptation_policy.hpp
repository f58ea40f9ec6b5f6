#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "passive_admittance/core_types.hpp"
#include "passive_admittance/energy_tank.hpp"

namespace passive_admittance {

enum class AdaptationMode { kConservative, kTank };
enum class DampingMode { kConstantDamping, kConstantRatio };
/// kRise plans only on a rising flag edge; kLevel re-plans while the flag
/// stays raised, once per dwell period.
enum class TriggerMode { kRise, kLevel };

std::string_view to_string(AdaptationMode mode);
std::string_view to_string(DampingMode mode);
std::string_view to_string(TriggerMode mode);
AdaptationMode adaptation_mode_from_string(std::string_view text);
DampingMode damping_mode_from_string(std::string_view text);
TriggerMode trigger_mode_from_string(std::string_view text);

struct AdaptationConfig {
  bool enabled = true;
  AdaptationMode mode = AdaptationMode::kTank;
  DampingMode damping_mode = DampingMode::kConstantDamping;
  TriggerMode trigger = TriggerMode::kRise;
  double dt_adapt = 0.003;  // s, length of one inertia ramp
  DofVector delta_m_cap;    // per-DOF cap on one increment
  double dwell = 0.2;       // s, minimum spacing between ramp starts
};

void validate_adaptation(const AdaptationConfig& cfg, std::size_t n, double dt);

struct AdaptationPlan {
  DofVector delta_m;
  DofVector delta_d;
  DofVector m_dot;          ///< constant inertia rate of the ramp
  double e_reserved = 0.0;  ///< worst-case tank extraction over the ramp (J)
  double lambda_m = 0.0;    ///< largest inertia rate of the ramp (kg/s)

  bool empty() const { return delta_m.size() == 0 || delta_m.isZero(0.0); }
};

/// Largest increment allowed by ṁ_j ≤ 2 d_j over one ramp: Δm_j = 2 d_j Δt.
AdaptationPlan conservative_step(const AdmittanceParams& p, const AdaptationConfig& cfg);

/// Uncapped tank increment 2 (T − δ) / ‖ẋ_M‖² for the channels of one kind.
double raw_tank_increment(const TankState& tank, const SafetyLimits& lim,
                          const DofLayout& layout, DofKind kind);

/**
 * Tank-funded increment.
 *
 * Each DOF kind receives its raw increment, capped per DOF. The reserve is
 * the worst-case extraction ½ λ_M ‖ẋ_M‖² Δt of a constant-rate ramp, with
 * λ_M the largest rate over all channels; when it would exceed T − δ all
 * increments are scaled down by the same factor. Throws InsufficientEnergy if the reserve cannot be
 * drawn. Returns an empty plan when T = δ.
 */
AdaptationPlan tank_step(const TankState& tank, const SafetyLimits& lim, const DofLayout& layout,
                         const AdmittanceParams& p, const AdaptationConfig& cfg);

/// Parameters after step_index of steps_total ramp ticks, starting from the
/// pre-adaptation values in base.
AdmittanceParams apply_plan(const AdmittanceParams& base, const AdaptationPlan& plan,
                            const AdaptationConfig& cfg, std::size_t step_index,
                            std::size_t steps_total);

/// ṁ_j ≤ 2 d_j for every channel.
bool check_rate_bound(const DofVector& m_dot, const AdmittanceParams& p);

/// Worst-case reserve ½ max_j Δm_j ‖ẋ_M‖² of a constant-rate ramp.
double reserve_for(const DofVector& delta_m, const SafetyLimits& lim);

/// (T − δ) − max_j d_j ‖ẋ_M‖² Δt, minimized over DOF kinds. Positive iff
/// the tank admits a larger increment than the conservative rule on every
/// channel.
double tank_vs_conservative_margin(const TankState& tank, const AdmittanceParams& p,
                                   const SafetyLimits& lim, const DofLayout& layout,
                                   const AdaptationConfig& cfg);

struct AdaptationEvent {
  double t_start = 0.0;
  double tank_energy = 0.0;  ///< T(t_i)
  AdaptationMode mode_used = AdaptationMode::kConservative;
  AdaptationPlan plan;
};

struct PolicyTick {
  DofVector m_dot;              ///< inertia rate over this tick
  AdmittanceParams next;        ///< parameters at the end of this tick
  bool adapting = false;
  std::optional<AdaptationEvent> started;
};

/// Trigger, dwell, and ramp bookkeeping for one scenario.
class AdaptationPolicy {
 public:
  AdaptationPolicy(AdaptationConfig cfg, DofLayout layout, SafetyLimits limits, double dt);

  PolicyTick tick(double t, bool flag, const AdmittanceParams& current, const TankState& tank);

  const std::vector<AdaptationEvent>& events() const noexcept { return events_; }
  std::size_t ramp_ticks() const noexcept { return steps_total_; }
  bool ramp_active() const noexcept { return active_.has_value(); }

 private:
  struct Ramp {
    AdmittanceParams base;
    AdaptationPlan plan;
    std::size_t index = 0;
  };

  AdaptationEvent plan_for(double t, const AdmittanceParams& current, const TankState& tank) const;

  AdaptationConfig cfg_;
  DofLayout layout_;
  SafetyLimits limits_;
  double dt_;
  std::size_t steps_total_;
  bool previous_flag_ = false;
  std::optional<double> last_start_;
  std::optional<Ramp> active_;
  std::vector<AdaptationEvent> events_;
};

}  // namespace passive_admittance
