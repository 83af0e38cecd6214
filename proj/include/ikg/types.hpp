#pragma once

#include <Eigen/Dense>

#include <functional>
#include <utility>

namespace ikg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A positive function on the domain together with its spatial gradient.
// Used for the per-alternative sampling noise and sampling cost.
struct ScalarField {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;

  static ScalarField constant(double c) {
    return {[c](const Vector&) { return c; },
            [](const Vector& x) { return Vector::Zero(x.size()).eval(); }};
  }

  // Multiplies both value and gradient by `factor`.
  ScalarField scaled(double factor) const {
    return {[f = value, factor](const Vector& x) { return factor * f(x); },
            [g = gradient, factor](const Vector& x) { return (factor * g(x)).eval(); }};
  }

  double operator()(const Vector& x) const { return value(x); }
};

}  // namespace ikg
