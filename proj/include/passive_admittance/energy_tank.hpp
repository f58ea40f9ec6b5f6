#pragma once

#include <cmath>

#include "passive_admittance/core_types.hpp"

namespace passive_admittance {

/// Power flows into and out of the tank.
struct PowerPair {
  double p_d = 0.0;  ///< damping dissipation vᵀ D_d v, never negative
  double p_m = 0.0;  ///< inertia variation ½ vᵀ Ṁ_d v
  /// Positive and non-positive parts of p_m (p_m_extract + p_m_inject == p_m).
  /// Only consulted with split metering.
  double p_m_extract = 0.0;
  double p_m_inject = 0.0;
};

PowerPair tank_powers(const DofVector& v, const AdmittanceParams& p, const DofVector& m_dot);

/**
 * Energy tank storing dissipated energy and paying for inertia increases.
 *
 * The energy T is integrated directly and the port state is derived as
 * z = √(2T). Storage is switched off (phi = 0) when a step would carry T
 * above the ceiling; extraction is always metered.
 */
struct TankState {
  double energy = 2.0;  // J
  SafetyLimits limits;
  int phi = 1;
  int gamma = 1;
  /// Meter the positive and negative parts of a mixed-sign Ṁ_d separately.
  bool split_metering = false;

  double z() const { return std::sqrt(2.0 * energy); }
};

TankState make_tank(double initial_energy, const SafetyLimits& lim, bool split_metering = false);

/// Advances the tank by one step. Throws TankUnderflow if the step would
/// carry T below the floor.
TankState step_tank(const TankState& tank, const PowerPair& pw, double dt);

/// True iff T − e_req ≥ δ.
bool can_extract(const TankState& tank, double e_req);

}  // namespace passive_admittance
