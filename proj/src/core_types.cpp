#include "passive_admittance/core_types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace passive_admittance {

std::string_view to_string(DofKind kind) {
  return kind == DofKind::kTranslation ? "translation" : "rotation";
}

DofKind dof_kind_from_string(std::string_view text) {
  if (text == "translation") return DofKind::kTranslation;
  if (text == "rotation") return DofKind::kRotation;
  throw std::invalid_argument("unknown DOF kind '" + std::string(text) + "'");
}

DofLayout::DofLayout()
    : kinds_{DofKind::kTranslation, DofKind::kTranslation, DofKind::kTranslation,
             DofKind::kRotation,    DofKind::kRotation,    DofKind::kRotation} {}

DofLayout::DofLayout(std::vector<DofKind> kinds) : kinds_(std::move(kinds)) {
  if (kinds_.empty()) {
    throw std::invalid_argument("a DOF layout needs at least one channel");
  }
}

std::vector<std::size_t> DofLayout::indices(DofKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < kinds_.size(); ++j) {
    if (kinds_[j] == kind) out.push_back(j);
  }
  return out;
}

RobotState RobotState::zero(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return RobotState{DofVector::Zero(size), DofVector::Zero(size), DofVector::Zero(size), 0.0};
}

namespace {

void check_positive(const DofVector& values, const char* which) {
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double value = values[j];
    if (!std::isfinite(value) || value <= 0.0) {
      throw NonPositiveParameter(which, static_cast<std::size_t>(j));
    }
  }
}

}  // namespace

void validate_params(const AdmittanceParams& p) {
  if (p.m.size() != p.d.size()) {
    throw std::invalid_argument("inertia and damping vectors differ in length");
  }
  check_positive(p.m, "m");
  check_positive(p.d, "d");
}

bool params_valid(const AdmittanceParams& p) noexcept {
  if (p.m.size() != p.d.size()) return false;
  for (Eigen::Index j = 0; j < p.m.size(); ++j) {
    if (!std::isfinite(p.m[j]) || p.m[j] <= 0.0) return false;
    if (!std::isfinite(p.d[j]) || p.d[j] <= 0.0) return false;
  }
  return true;
}

void validate_limits(const SafetyLimits& lim) {
  for (Eigen::Index j = 0; j < lim.v_max.size(); ++j) {
    if (!std::isfinite(lim.v_max[j]) || lim.v_max[j] <= 0.0) {
      throw ValidationError("limits.velocity", "entries must be positive");
    }
  }
  if (!(lim.delta > 0.0) || !(lim.delta < lim.t_bar) || !std::isfinite(lim.t_bar)) {
    throw ValidationError("limits", "tank bounds need 0 < floor < ceiling");
  }
}

ClampResult clamp_velocity(const DofVector& v, const SafetyLimits& lim) {
  if (v.size() != lim.v_max.size()) {
    throw std::invalid_argument("velocity and bound vectors differ in length");
  }
  ClampResult out{v, false};
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double bound = lim.v_max[j];
    if (out.v[j] > bound) {
      out.v[j] = bound;
      out.clamped = true;
    } else if (out.v[j] < -bound) {
      out.v[j] = -bound;
      out.clamped = true;
    }
  }
  return out;
}

bool all_finite(const DofVector& v) noexcept { return v.allFinite(); }

double squared_norm(const DofVector& v, const DofLayout& layout, DofKind kind) {
  double sum = 0.0;
  for (std::size_t j : layout.indices(kind)) {
    const double value = v[static_cast<Eigen::Index>(j)];
    sum += value * value;
  }
  return sum;
}

}  // namespace passive_admittance
