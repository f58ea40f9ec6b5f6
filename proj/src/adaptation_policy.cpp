#include "passive_admittance/adaptation_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace passive_admittance {

std::string_view to_string(AdaptationMode mode) {
  return mode == AdaptationMode::kTank ? "tank" : "conservative";
}

std::string_view to_string(DampingMode mode) {
  return mode == DampingMode::kConstantRatio ? "constant_ratio" : "constant_damping";
}

std::string_view to_string(TriggerMode mode) {
  return mode == TriggerMode::kLevel ? "level" : "rise";
}

AdaptationMode adaptation_mode_from_string(std::string_view text) {
  if (text == "tank") return AdaptationMode::kTank;
  if (text == "conservative") return AdaptationMode::kConservative;
  throw std::invalid_argument("unknown adaptation mode '" + std::string(text) + "'");
}

DampingMode damping_mode_from_string(std::string_view text) {
  if (text == "constant_damping" || text == "constant") return DampingMode::kConstantDamping;
  if (text == "constant_ratio" || text == "ratio") return DampingMode::kConstantRatio;
  throw std::invalid_argument("unknown damping mode '" + std::string(text) + "'");
}

TriggerMode trigger_mode_from_string(std::string_view text) {
  if (text == "rise") return TriggerMode::kRise;
  if (text == "level") return TriggerMode::kLevel;
  throw std::invalid_argument("unknown trigger mode '" + std::string(text) + "'");
}

namespace {

std::size_t ramp_steps(double dt_adapt, double dt) {
  return static_cast<std::size_t>(std::llround(dt_adapt / dt));
}

const DofKind kKinds[] = {DofKind::kTranslation, DofKind::kRotation};

}  // namespace

void validate_adaptation(const AdaptationConfig& cfg, std::size_t n, double dt) {
  if (!(cfg.dt_adapt > 0.0)) {
    throw ValidationError("adaptation.interval", "must be positive");
  }
  const std::size_t steps = ramp_steps(cfg.dt_adapt, dt);
  if (steps == 0 || std::abs(static_cast<double>(steps) * dt - cfg.dt_adapt) > 1e-9 * cfg.dt_adapt) {
    throw ValidationError("adaptation.interval", "must be a whole number of control periods");
  }
  if (static_cast<std::size_t>(cfg.delta_m_cap.size()) != n) {
    throw ValidationError("adaptation.inertia_cap", "needs one entry per DOF");
  }
  for (Eigen::Index j = 0; j < cfg.delta_m_cap.size(); ++j) {
    if (!(cfg.delta_m_cap[j] > 0.0) || !std::isfinite(cfg.delta_m_cap[j])) {
      throw ValidationError("adaptation.inertia_cap", "entries must be positive");
    }
  }
  if (!(cfg.dwell >= cfg.dt_adapt)) {
    throw ValidationError("adaptation.dwell", "must be at least the ramp interval");
  }
}

AdaptationPlan conservative_step(const AdmittanceParams& p, const AdaptationConfig& cfg) {
  AdaptationPlan plan;
  plan.delta_m = 2.0 * cfg.dt_adapt * p.d;
  plan.m_dot = 2.0 * p.d;
  if (cfg.damping_mode == DampingMode::kConstantRatio) {
    plan.delta_d = p.d.cwiseProduct(plan.delta_m).cwiseQuotient(p.m);
  } else {
    plan.delta_d = DofVector::Zero(p.d.size());
  }
  plan.e_reserved = 0.0;
  plan.lambda_m = cfg.dt_adapt > 0.0 ? plan.delta_m.maxCoeff() / cfg.dt_adapt : 0.0;
  return plan;
}

double raw_tank_increment(const TankState& tank, const SafetyLimits& lim, const DofLayout& layout,
                          DofKind kind) {
  const double bound2 = squared_norm(lim.v_max, layout, kind);
  if (bound2 <= 0.0) return 0.0;
  const double available = std::max(0.0, tank.energy - lim.delta);
  return 2.0 * available / bound2;
}

double reserve_for(const DofVector& delta_m, const SafetyLimits& lim) {
  if (delta_m.size() == 0) return 0.0;
  // λ_M Δt is the largest increment; the bound covers every channel.
  return 0.5 * std::max(0.0, delta_m.maxCoeff()) * lim.v_max.squaredNorm();
}

AdaptationPlan tank_step(const TankState& tank, const SafetyLimits& lim, const DofLayout& layout,
                         const AdmittanceParams& p, const AdaptationConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(layout.size());
  AdaptationPlan plan;
  plan.delta_m = DofVector::Zero(n);
  plan.delta_d = DofVector::Zero(n);
  plan.m_dot = DofVector::Zero(n);

  const double available = tank.energy - lim.delta;
  if (available <= 0.0) return plan;

  for (DofKind kind : kKinds) {
    const double raw = raw_tank_increment(tank, lim, layout, kind);
    for (std::size_t j : layout.indices(kind)) {
      const auto i = static_cast<Eigen::Index>(j);
      plan.delta_m[i] = std::min(raw, cfg.delta_m_cap[i]);
    }
  }

  double reserve = reserve_for(plan.delta_m, lim);
  if (reserve > available) {
    // Land a hair inside T − δ so that the bound survives round-off.
    plan.delta_m *= available / reserve * (1.0 - 1e-12);
    reserve = reserve_for(plan.delta_m, lim);
  }
  plan.e_reserved = reserve;
  plan.lambda_m = plan.delta_m.maxCoeff() / cfg.dt_adapt;
  if (!can_extract(tank, plan.e_reserved)) {
    throw InsufficientEnergy("tank cannot cover a reserve of " +
                             std::to_string(plan.e_reserved) + " J");
  }

  plan.m_dot = plan.delta_m / cfg.dt_adapt;
  if (cfg.damping_mode == DampingMode::kConstantRatio) {
    plan.delta_d = p.d.cwiseProduct(plan.delta_m).cwiseQuotient(p.m);
  }
  return plan;
}

AdmittanceParams apply_plan(const AdmittanceParams& base, const AdaptationPlan& plan,
                            const AdaptationConfig& cfg, std::size_t step_index,
                            std::size_t steps_total) {
  if (plan.empty() || steps_total == 0) return base;
  const double fraction =
      static_cast<double>(std::min(step_index, steps_total)) / static_cast<double>(steps_total);
  AdmittanceParams out = base;
  out.m = base.m + fraction * plan.delta_m;
  if (cfg.damping_mode == DampingMode::kConstantRatio) {
    out.d = out.m.cwiseProduct(base.d.cwiseQuotient(base.m));
  }
  return out;
}

bool check_rate_bound(const DofVector& m_dot, const AdmittanceParams& p) {
  for (Eigen::Index j = 0; j < m_dot.size(); ++j) {
    if (m_dot[j] > 2.0 * p.d[j]) return false;
  }
  return true;
}

double tank_vs_conservative_margin(const TankState& tank, const AdmittanceParams& p,
                                   const SafetyLimits& lim, const DofLayout& layout,
                                   const AdaptationConfig& cfg) {
  const double available = tank.energy - lim.delta;
  double margin = available;
  bool any = false;
  for (DofKind kind : kKinds) {
    const auto members = layout.indices(kind);
    if (members.empty()) continue;
    double largest_d = 0.0;
    for (std::size_t j : members) {
      largest_d = std::max(largest_d, p.d[static_cast<Eigen::Index>(j)]);
    }
    const double dissipated = largest_d * squared_norm(lim.v_max, layout, kind) * cfg.dt_adapt;
    margin = any ? std::min(margin, available - dissipated) : available - dissipated;
    any = true;
  }
  return margin;
}

AdaptationPolicy::AdaptationPolicy(AdaptationConfig cfg, DofLayout layout, SafetyLimits limits,
                                   double dt)
    : cfg_(std::move(cfg)),
      layout_(std::move(layout)),
      limits_(std::move(limits)),
      dt_(dt),
      steps_total_(ramp_steps(cfg_.dt_adapt, dt)) {
  validate_adaptation(cfg_, layout_.size(), dt_);
}

AdaptationEvent AdaptationPolicy::plan_for(double t, const AdmittanceParams& current,
                                           const TankState& tank) const {
  AdaptationEvent event;
  event.t_start = t;
  event.tank_energy = tank.energy;
  if (cfg_.mode == AdaptationMode::kTank) {
    try {
      event.plan = tank_step(tank, limits_, layout_, current, cfg_);
      event.mode_used = AdaptationMode::kTank;
      if (!event.plan.empty()) return event;
    } catch (const InsufficientEnergy&) {
    }
  }
  event.plan = conservative_step(current, cfg_);
  event.mode_used = AdaptationMode::kConservative;
  return event;
}

PolicyTick AdaptationPolicy::tick(double t, bool flag, const AdmittanceParams& current,
                                  const TankState& tank) {
  PolicyTick out;
  out.m_dot = DofVector::Zero(current.m.size());
  out.next = current;

  const bool rising = flag && !previous_flag_;
  previous_flag_ = flag;

  if (!active_ && cfg_.enabled && flag &&
      (cfg_.trigger == TriggerMode::kLevel || rising)) {
    // Half a tick of slack keeps dwell comparisons robust to t = k * dt.
    const bool dwell_elapsed = !last_start_ || t - *last_start_ >= cfg_.dwell - 0.5 * dt_;
    if (dwell_elapsed) {
      AdaptationEvent event = plan_for(t, current, tank);
      last_start_ = t;
      if (!event.plan.empty()) {
        active_ = Ramp{current, event.plan, 0};
      }
      events_.push_back(event);
      out.started = std::move(event);
    }
  }

  if (active_) {
    Ramp& ramp = *active_;
    ramp.index += 1;
    out.m_dot = ramp.plan.m_dot;
    out.adapting = true;
    out.next = apply_plan(ramp.base, ramp.plan, cfg_, ramp.index, steps_total_);
    if (ramp.index >= steps_total_) active_.reset();
  }
  return out;
}

}  // namespace passive_admittance
