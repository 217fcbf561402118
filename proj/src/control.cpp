#include "pdpap/control.hpp"

#include "pdpap/error.hpp"

#include <cmath>

namespace pdpap {

std::string_view to_string(PdeFamily family) {
  switch (family) {
  case PdeFamily::ScalarReaction:
    return "scalar_reaction";
  case PdeFamily::DiffusionReaction:
    return "diffusion_reaction";
  }
  return "unknown";
}

ControlVector ControlVector::zeros(PdeFamily family, const GridSpec& grid) {
  if (family == PdeFamily::DiffusionReaction)
    return field(GridFunction::Zero(grid.node_count()), 0.0);
  return scalar(0.0);
}

bool ControlVector::same_shape(const ControlVector& other) const noexcept {
  if (has_field() != other.has_field())
    return false;
  return !has_field() || a->size() == other.a->size();
}

double ControlVector::dot(const ControlVector& other) const {
  if (!same_shape(other))
    throw SizeMismatch("control vectors differ in shape");
  double s = c * other.c;
  if (has_field())
    s += a->dot(*other.a);
  return s;
}

double ControlVector::norm() const { return std::sqrt(squared_norm()); }

ControlVector& ControlVector::operator+=(const ControlVector& other) {
  if (!same_shape(other))
    throw SizeMismatch("control vectors differ in shape");
  c += other.c;
  if (has_field())
    *a += *other.a;
  return *this;
}

ControlVector& ControlVector::operator-=(const ControlVector& other) {
  if (!same_shape(other))
    throw SizeMismatch("control vectors differ in shape");
  c -= other.c;
  if (has_field())
    *a -= *other.a;
  return *this;
}

ControlVector& ControlVector::operator*=(double s) {
  c *= s;
  if (has_field())
    *a *= s;
  return *this;
}

ControlVector operator+(ControlVector lhs, const ControlVector& rhs) { return lhs += rhs; }
ControlVector operator-(ControlVector lhs, const ControlVector& rhs) { return lhs -= rhs; }
ControlVector operator*(double s, ControlVector v) { return v *= s; }

void check_family(PdeFamily family, const ControlParam& x) {
  const bool want_field = family == PdeFamily::DiffusionReaction;
  if (x.has_field() != want_field)
    throw ConfigError(std::string("control does not match family ") +
                      std::string(to_string(family)));
}

} // namespace pdpap
