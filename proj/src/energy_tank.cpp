#include "passive_admittance/energy_tank.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace passive_admittance {

namespace {
// Absolute slack for round-off when an extraction exactly meets the floor.
constexpr double kFloorSlack = 1e-12;
}  // namespace

PowerPair tank_powers(const DofVector& v, const AdmittanceParams& p, const DofVector& m_dot) {
  const DofVector v2 = v.cwiseProduct(v);
  PowerPair out;
  out.p_d = v2.dot(p.d);
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double part = 0.5 * m_dot[j] * v2[j];
    if (m_dot[j] > 0.0) {
      out.p_m_extract += part;
    } else {
      out.p_m_inject += part;
    }
  }
  out.p_m = out.p_m_extract + out.p_m_inject;
  return out;
}

TankState make_tank(double initial_energy, const SafetyLimits& lim, bool split_metering) {
  validate_limits(lim);
  if (!(initial_energy >= lim.delta) || !(initial_energy <= lim.t_bar)) {
    throw ValidationError("tank.initial_energy", "must lie within the tank bounds");
  }
  TankState tank;
  tank.energy = initial_energy;
  tank.limits = lim;
  tank.split_metering = split_metering;
  return tank;
}

TankState step_tank(const TankState& tank, const PowerPair& pw, double dt) {
  if (pw.p_d < 0.0) throw std::invalid_argument("dissipated power cannot be negative");
  TankState next = tank;
  const double ceiling = tank.limits.t_bar;

  // Storage is enabled when this step's net inflow keeps T at or below the
  // ceiling; with phi = 1 every branch of the gamma rule selects 1.
  double rate = 0.0;
  if (tank.split_metering) {
    rate = pw.p_d - pw.p_m_extract - pw.p_m_inject;
    if (tank.energy + rate * dt <= ceiling) {
      next.phi = 1;
      next.gamma = 1;
    } else {
      next.phi = 0;
      next.gamma = pw.p_m_extract > 0.0 ? 1 : 0;
      rate = -pw.p_m_extract;
    }
  } else {
    rate = pw.p_d - pw.p_m;
    if (tank.energy + rate * dt <= ceiling) {
      next.phi = 1;
      next.gamma = 1;
    } else {
      next.phi = 0;
      next.gamma = pw.p_m > 0.0 ? 1 : 0;
      rate = -next.gamma * pw.p_m;
    }
  }

  next.energy = tank.energy + rate * dt;
  if (next.energy < tank.limits.delta) {
    if (next.energy < tank.limits.delta - kFloorSlack) {
      throw TankUnderflow("tank energy would drop to " + std::to_string(next.energy) +
                          " J, below the floor");
    }
    next.energy = tank.limits.delta;
  }
  return next;
}

bool can_extract(const TankState& tank, double e_req) {
  if (e_req < 0.0) throw std::invalid_argument("requested energy must be non-negative");
  return tank.energy - e_req >= tank.limits.delta;
}

}  // namespace passive_admittance
