#include "passive_admittance/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace passive_admittance {

namespace {

// Fills translational and rotational channels with separate values.
DofVector by_kind(const DofLayout& layout, double translation, double rotation) {
  DofVector out(static_cast<Eigen::Index>(layout.size()));
  for (std::size_t j = 0; j < layout.size(); ++j) {
    out[static_cast<Eigen::Index>(j)] =
        layout.kind(j) == DofKind::kTranslation ? translation : rotation;
  }
  return out;
}

void require_size(const DofVector& v, std::size_t n, const char* field) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw ValidationError(field, "needs one entry per DOF");
  }
}

bool same(const DofVector& a, const DofVector& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

}  // namespace

Scenario Scenario::defaults(const DofLayout& layout) {
  const std::size_t n = layout.size();
  Scenario sc;
  sc.name = "unnamed";
  sc.layout = layout;
  sc.params.m = by_kind(layout, 2.0, 0.5);
  sc.params.d = by_kind(layout, 30.0, 3.0);
  sc.limits.v_max = by_kind(layout, 1.3, 0.9);
  if (n >= 2 && layout.kind(1) == DofKind::kTranslation) sc.limits.v_max[1] = 1.5;
  sc.limits.delta = 0.1;
  sc.limits.t_bar = 5.0;
  sc.adaptation.delta_m_cap = by_kind(layout, 1.5, 0.15);
  sc.arm = ArmModel::passive(n);
  return sc;
}

std::size_t Scenario::ticks() const {
  return static_cast<std::size_t>(std::llround(duration / integrator.dt));
}

void validate_scenario(const Scenario& sc) {
  const std::size_t n = sc.layout.size();
  validate_integrator(sc.integrator);
  require_size(sc.params.m, n, "params.inertia");
  require_size(sc.params.d, n, "params.damping");
  try {
    validate_params(sc.params);
  } catch (const NonPositiveParameter& e) {
    throw ValidationError(e.which() == "m" ? "params.inertia" : "params.damping", e.what());
  }
  validate_detector(sc.detector);
  require_size(sc.limits.v_max, n, "limits.velocity");
  validate_limits(sc.limits);
  if (!(sc.tank_initial >= sc.limits.delta) || !(sc.tank_initial <= sc.limits.t_bar)) {
    throw ValidationError("tank.initial_energy", "must lie within the tank bounds");
  }
  validate_adaptation(sc.adaptation, n, sc.integrator.dt);
  if (sc.tracking.enabled &&
      (!(sc.tracking.natural_frequency > 0.0) || !(sc.tracking.damping_ratio >= 0.0))) {
    throw ValidationError("tracking", "needs a positive frequency and non-negative damping");
  }
  validate_arm(sc.arm, n);
  if (!(sc.duration > 0.0)) throw ValidationError("duration", "must be positive");
}

bool operator==(const Scenario& a, const Scenario& b) {
  auto same_waypoints = [](const ArmModel& x, const ArmModel& y) {
    if (x.waypoints.size() != y.waypoints.size()) return false;
    for (std::size_t i = 0; i < x.waypoints.size(); ++i) {
      if (x.waypoints[i].t != y.waypoints[i].t || !same(x.waypoints[i].x, y.waypoints[i].x)) {
        return false;
      }
    }
    return true;
  };
  auto same_stiffening = [](const ArmModel& x, const ArmModel& y) {
    if (x.stiffening.size() != y.stiffening.size()) return false;
    for (std::size_t i = 0; i < x.stiffening.size(); ++i) {
      const auto& p = x.stiffening[i];
      const auto& q = y.stiffening[i];
      if (p.t_start != q.t_start || p.t_end != q.t_end || !same(p.k_stiff, q.k_stiff)) return false;
    }
    return true;
  };
  auto same_sinusoid = [](const ArmModel& x, const ArmModel& y) {
    if (x.sinusoid.has_value() != y.sinusoid.has_value()) return false;
    if (!x.sinusoid) return true;
    return same(x.sinusoid->amplitude, y.sinusoid->amplitude) &&
           x.sinusoid->frequency == y.sinusoid->frequency && x.sinusoid->phase == y.sinusoid->phase;
  };
  const auto& ad = a.adaptation;
  const auto& bd = b.adaptation;
  return a.name == b.name && a.layout == b.layout && a.integrator.dt == b.integrator.dt &&
         same(a.params.m, b.params.m) && same(a.params.d, b.params.d) &&
         a.detector.epsilon == b.detector.epsilon && a.detector.window == b.detector.window &&
         a.detector.accel_cutoff == b.detector.accel_cutoff &&
         same(a.limits.v_max, b.limits.v_max) && a.limits.delta == b.limits.delta &&
         a.limits.t_bar == b.limits.t_bar && a.tank_initial == b.tank_initial &&
         a.split_metering == b.split_metering && ad.enabled == bd.enabled &&
         ad.mode == bd.mode && ad.damping_mode == bd.damping_mode && ad.trigger == bd.trigger &&
         ad.dt_adapt == bd.dt_adapt && same(ad.delta_m_cap, bd.delta_m_cap) &&
         ad.dwell == bd.dwell && a.tracking.enabled == b.tracking.enabled &&
         a.tracking.natural_frequency == b.tracking.natural_frequency &&
         a.tracking.damping_ratio == b.tracking.damping_ratio && same(a.arm.k_h, b.arm.k_h) &&
         same(a.arm.d_h, b.arm.d_h) && a.arm.sensor_delay == b.arm.sensor_delay &&
         a.arm.force_noise == b.arm.force_noise && same_waypoints(a.arm, b.arm) &&
         same_sinusoid(a.arm, b.arm) && same_stiffening(a.arm, b.arm) &&
         a.duration == b.duration && a.seed == b.seed;
}

ScenarioResult run_scenario(const Scenario& sc) {
  validate_scenario(sc);
  const std::size_t n = sc.layout.size();
  const double dt = sc.integrator.dt;
  const std::size_t ticks = sc.ticks();

  ScenarioResult result;
  result.trace.dofs = n;
  result.trace.dt = dt;
  result.trace.records.reserve(ticks);

  RobotState reference = RobotState::zero(n);
  RobotState actual = reference;
  AdmittanceParams params = sc.params;
  TankState tank = make_tank(sc.tank_initial, sc.limits, sc.split_metering);
  DeviationDetector detector(sc.detector, dt, reference.v);
  AdaptationPolicy policy(sc.adaptation, sc.layout, sc.limits, dt);
  HumanArm arm(sc.arm, reference, sc.seed);

  const double wn = sc.tracking.natural_frequency;
  const double zeta = sc.tracking.damping_ratio;

  try {
    for (std::size_t k = 0; k < ticks; ++k) {
      const double t = static_cast<double>(k) * dt;
      reference.t = t;
      actual.t = t;
      const RobotState& measured = sc.tracking.enabled ? actual : reference;

      const ForceSample force = arm.sense(measured, t);
      const DofVector accel = detector.estimate_acceleration(measured.v);
      const double psi = compute_psi(force, accel, measured.v, params);
      const bool flag = detector.update(psi, t);

      PolicyTick decision = policy.tick(t, flag, params, tank);
      const PowerPair power = tank_powers(reference.v, params, decision.m_dot);
      const TankState next_tank = step_tank(tank, power, dt);

      TraceRecord rec;
      rec.t = t;
      rec.x = reference.x;
      rec.v = reference.v;
      rec.a_est = accel;
      rec.f_ext = force.f;
      rec.psi = psi;
      rec.psi_avg = detector.moving_average();
      rec.flag = flag;
      rec.m = params.m;
      rec.d = params.d;
      rec.tank_T = tank.energy;
      rec.phi = next_tank.phi;
      rec.gamma = next_tank.gamma;
      rec.p_d = power.p_d;
      rec.p_m = power.p_m;
      rec.adapting = decision.adapting;
      result.trace.records.push_back(std::move(rec));

      RobotState stepped = step_admittance(reference, params, force, sc.integrator);
      ClampResult clamp = clamp_velocity(stepped.v, sc.limits);
      if (clamp.clamped) {
        ++result.clamp_events;
        stepped.x = reference.x + dt * clamp.v;
        stepped.v = clamp.v;
      }
      reference = std::move(stepped);

      if (sc.tracking.enabled) {
        const DofVector acc =
            wn * wn * (reference.x - actual.x) - 2.0 * zeta * wn * actual.v;
        actual.a_est = acc;
        actual.v += dt * acc;
        actual.x += dt * actual.v;
        if (!actual.v.allFinite() || !actual.x.allFinite()) {
          throw NonFiniteState("tracking loop diverged at t=" + std::to_string(t));
        }
      } else {
        actual = reference;
      }

      tank = next_tank;
      if (decision.next.m != params.m || decision.next.d != params.d) {
        validate_params(decision.next);
        params = std::move(decision.next);
      }
    }
  } catch (const NonFiniteState& e) {
    result.abort_reason = e.what();
  }
  result.adaptations = policy.events();
  return result;
}

PassivityReport passivity_audit(const Trace& trace, double tol_audit) {
  PassivityReport report;
  report.tolerance = tol_audit;
  if (trace.records.empty()) return report;
  const auto& first = trace.records.front();
  report.w0 = storage_energy(first.v, first.m) + first.tank_T;
  report.min_margin = report.w0;
  report.min_margin_time = first.t;

  double integral = 0.0;
  double previous_power = first.v.dot(first.f_ext);
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const auto& rec = trace.records[k];
    const double power = rec.v.dot(rec.f_ext);
    integral += 0.5 * (rec.t - trace.records[k - 1].t) * (power + previous_power);
    previous_power = power;
    const double margin = integral + report.w0;
    if (margin < report.min_margin) {
      report.min_margin = margin;
      report.min_margin_time = rec.t;
    }
    if (margin < -tol_audit) report.violation_times.push_back(rec.t);
  }
  report.violated = !report.violation_times.empty();
  return report;
}

namespace {

double peak_abs(const Trace& trace, std::size_t channel, double from, double to) {
  double peak = 0.0;
  for (const auto& rec : trace.records) {
    if (rec.t >= from && rec.t < to) {
      peak = std::max(peak, std::abs(rec.v[static_cast<Eigen::Index>(channel)]));
    }
  }
  return peak;
}

}  // namespace

std::vector<CalibrationPoint> calibrate_stiffness(const Scenario& sc,
                                                  const std::vector<double>& scales) {
  if (sc.arm.stiffening.empty()) {
    throw ValidationError("arm.stiffening", "calibration needs a stiffening event");
  }
  const StiffeningEvent& event = sc.arm.stiffening.front();
  Eigen::Index channel = 0;
  event.k_stiff.maxCoeff(&channel);
  const double onset = event.t_start;

  std::vector<CalibrationPoint> points;
  for (double scale : scales) {
    Scenario trial = sc;
    trial.adaptation.enabled = false;
    trial.arm.stiffening.front().k_stiff = event.k_stiff * scale;
    trial.duration = std::max(sc.duration, onset + 1.0);
    const ScenarioResult run = run_scenario(trial);

    CalibrationPoint point;
    point.stiffness = event.k_stiff.maxCoeff() * scale;
    for (const auto& rec : run.trace.records) {
      if (rec.t < onset) {
        point.compliant_psi_peak = std::max(point.compliant_psi_peak, rec.psi_avg);
      } else if (rec.flag && !point.detection_latency) {
        point.detection_latency = rec.t - onset;
      }
    }
    const auto c = static_cast<std::size_t>(channel);
    point.early_amplitude = peak_abs(run.trace, c, onset + 0.25, onset + 0.5);
    point.late_amplitude = peak_abs(run.trace, c, onset + 0.75, onset + 1.0);
    bool clamped_after_onset = false;
    for (const auto& rec : run.trace.records) {
      if (rec.t >= onset && rec.t < onset + 1.0 &&
          std::abs(rec.v[channel]) >= sc.limits.v_max[channel]) {
        clamped_after_onset = true;
        break;
      }
    }
    point.unstable = run.abort_reason.has_value() || clamped_after_onset ||
                     point.late_amplitude > point.early_amplitude;
    points.push_back(point);
  }
  return points;
}

}  // namespace passive_admittance
