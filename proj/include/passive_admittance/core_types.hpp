#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

#include "passive_admittance/errors.hpp"

namespace passive_admittance {

/// Per-DOF vector. Translational entries are in SI linear units (m, N, kg),
/// rotational entries in angular units (rad, N·m, kg·m²).
using DofVector = Eigen::VectorXd;

enum class DofKind { kTranslation, kRotation };

std::string_view to_string(DofKind kind);
DofKind dof_kind_from_string(std::string_view text);

/// Number and kind of the decoupled Cartesian channels.
class DofLayout {
 public:
  /// Three translations followed by three rotations.
  DofLayout();
  explicit DofLayout(std::vector<DofKind> kinds);

  std::size_t size() const noexcept { return kinds_.size(); }
  DofKind kind(std::size_t j) const { return kinds_.at(j); }
  const std::vector<DofKind>& kinds() const noexcept { return kinds_; }

  /// Indices of all channels of the given kind, in ascending order.
  std::vector<std::size_t> indices(DofKind kind) const;

  bool operator==(const DofLayout&) const = default;

 private:
  std::vector<DofKind> kinds_;
};

/// Diagonal inertia and damping of the admittance model.
struct AdmittanceParams {
  DofVector m;
  DofVector d;

  std::size_t size() const noexcept { return static_cast<std::size_t>(m.size()); }
};

struct RobotState {
  DofVector x;
  DofVector v;
  DofVector a_est;
  double t = 0.0;

  static RobotState zero(std::size_t n);
};

struct ForceSample {
  DofVector f;
  double t = 0.0;
};

struct SafetyLimits {
  DofVector v_max;
  double delta = 0.1;
  double t_bar = 5.0;
};

/// Throws NonPositiveParameter naming the first entry that is not finite and
/// strictly positive.
void validate_params(const AdmittanceParams& p);
bool params_valid(const AdmittanceParams& p) noexcept;

void validate_limits(const SafetyLimits& lim);

struct ClampResult {
  DofVector v;
  bool clamped = false;
};

ClampResult clamp_velocity(const DofVector& v, const SafetyLimits& lim);

bool all_finite(const DofVector& v) noexcept;

/// Sum of squares of v over the channels of one kind.
double squared_norm(const DofVector& v, const DofLayout& layout, DofKind kind);

}  // namespace passive_admittance
