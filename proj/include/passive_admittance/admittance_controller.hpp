#pragma once

#include "passive_admittance/core_types.hpp"

namespace passive_admittance {

struct IntegratorConfig {
  double dt = 0.001;  // s
};

void validate_integrator(const IntegratorConfig& cfg);

/**
 * @brief One semi-implicit Euler step of M_d(t) a + D_d(t) v = F_ext.
 *
 * Velocity is updated first and the new velocity moves the pose. The model
 * acceleration used for the step is stored in a_est of the result.
 * Parameters are assumed valid; the caller checks them when they change.
 * Throws NonFiniteState if the new state is not finite.
 */
RobotState step_admittance(const RobotState& s, const AdmittanceParams& p,
                           const ForceSample& f, const IntegratorConfig& cfg);

/// Kinetic storage ½ vᵀ M_d v of the admittance model (J).
double storage_energy(const RobotState& s, const AdmittanceParams& p);
double storage_energy(const DofVector& v, const DofVector& m);

}  // namespace passive_admittance
