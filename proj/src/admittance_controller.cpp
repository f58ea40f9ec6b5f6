#include "passive_admittance/admittance_controller.hpp"

#include <cmath>
#include <string>

namespace passive_admittance {

void validate_integrator(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.dt > 0.01) {
    throw ValidationError("integrator.dt", "must lie in (0, 0.01] s");
  }
}

RobotState step_admittance(const RobotState& s, const AdmittanceParams& p,
                           const ForceSample& f, const IntegratorConfig& cfg) {
  RobotState next;
  next.a_est = (f.f - p.d.cwiseProduct(s.v)).cwiseQuotient(p.m);
  next.v = s.v + cfg.dt * next.a_est;
  next.x = s.x + cfg.dt * next.v;
  next.t = s.t + cfg.dt;
  if (!next.v.allFinite() || !next.x.allFinite()) {
    throw NonFiniteState("admittance state diverged at t=" + std::to_string(next.t));
  }
  return next;
}

double storage_energy(const DofVector& v, const DofVector& m) {
  return 0.5 * v.cwiseProduct(v).dot(m);
}

double storage_energy(const RobotState& s, const AdmittanceParams& p) {
  return storage_energy(s.v, p.m);
}

}  // namespace passive_admittance
