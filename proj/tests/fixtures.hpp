#pragma once
// Shared test traces.

#include <cstddef>

#include "passive_admittance/admittance_controller.hpp"
#include "passive_admittance/sim_harness.hpp"

namespace fixtures {

using namespace passive_admittance;

/**
 * One channel whose inertia grows at 50 kg/s with almost no damping while
 * the tank is never charged for it. A viscous environment F = −v drains the
 * port faster than the storage allows.
 */
inline Trace unmetered_inertia_growth(double duration = 5.0) {
  const double dt = 0.001;
  Trace trace;
  trace.dofs = 1;
  trace.dt = dt;
  RobotState s = RobotState::zero(1);
  s.v[0] = 1.0;
  AdmittanceParams p{DofVector::Constant(1, 1.0), DofVector::Constant(1, 0.01)};
  const auto ticks = static_cast<std::size_t>(duration / dt);
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    const ForceSample f{-s.v, t};
    TraceRecord rec;
    rec.t = t;
    rec.x = s.x;
    rec.v = s.v;
    rec.a_est = DofVector::Zero(1);
    rec.f_ext = f.f;
    rec.m = p.m;
    rec.d = p.d;
    rec.tank_T = 0.1;
    rec.p_d = s.v.dot(p.d.cwiseProduct(s.v));
    rec.p_m = 0.0;
    rec.adapting = true;
    trace.records.push_back(rec);
    s = step_admittance(s, p, f, {dt});
    p.m[0] += 50.0 * dt;
  }
  return trace;
}

}  // namespace fixtures
