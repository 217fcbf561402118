#pragma once

#include "pdpap/grid.hpp"

#include <optional>
#include <string_view>

namespace pdpap {

enum class PdeFamily {
  ScalarReaction,    ///< -lap u + c u = 0, unknown scalar c
  DiffusionReaction, ///< -div(a grad u) + c u = 0, unknown nodal a and scalar c
};

std::string_view to_string(PdeFamily family);

/// Element of the control space: an optional nodal diffusion field and a scalar
/// reaction coefficient. The same shape carries controls, gradients and
/// directions, so the space operations live here.
struct ControlVector {
  std::optional<GridFunction> a;
  double c = 0.0;

  static ControlVector scalar(double c) { return ControlVector{std::nullopt, c}; }
  static ControlVector field(GridFunction a, double c) { return ControlVector{std::move(a), c}; }
  /// Zero element with the shape required by `family` on `grid`.
  static ControlVector zeros(PdeFamily family, const GridSpec& grid);

  bool has_field() const noexcept { return a.has_value(); }
  bool same_shape(const ControlVector& other) const noexcept;

  double dot(const ControlVector& other) const;
  double squared_norm() const { return dot(*this); }
  double norm() const;

  ControlVector& operator+=(const ControlVector& other);
  ControlVector& operator-=(const ControlVector& other);
  ControlVector& operator*=(double s);
  bool operator==(const ControlVector&) const = default;
};

ControlVector operator+(ControlVector lhs, const ControlVector& rhs);
ControlVector operator-(ControlVector lhs, const ControlVector& rhs);
ControlVector operator*(double s, ControlVector v);

using ControlParam = ControlVector;
using ControlGradient = ControlVector;

/// Throws ConfigError when the control does not fit the family.
void check_family(PdeFamily family, const ControlParam& x);

} // namespace pdpap
