#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ikg/types.hpp"

namespace ikg {

enum class KernelFamily { SquaredExponential, Matern32, Matern52 };

std::string_view to_string(KernelFamily family);
// Accepts "se", "matern32", "matern52".
KernelFamily parse_kernel_family(std::string_view name);

/*
  Stationary prior covariance k(x, x') = tau_sq * rho(r), where

    r(x, x') = sqrt(sum_j alpha_j (x_j - x'_j)^2)

  and alpha holds per-dimension inverse-square length scales.

    SquaredExponential:  rho(r) = exp(-r^2)
    Matern32:            rho(r) = (1 + sqrt(3) r) exp(-sqrt(3) r)
    Matern52:            rho(r) = (1 + sqrt(5) r + 5/3 r^2) exp(-sqrt(5) r)

  Parameters are fixed at construction; all members are const and thread safe.
*/
class Kernel {
 public:
  Kernel(KernelFamily family, double tau_sq, Vector alpha);

  // tau_sq * exp(-||x - x'||^2 / d): the default prior of the benchmark suite.
  static Kernel isotropic_se(int dim, double tau_sq = 1.0);

  KernelFamily family() const noexcept { return family_; }
  double tau_sq() const noexcept { return tau_sq_; }
  const Vector& alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return static_cast<int>(alpha_.size()); }

  double scaled_distance(const Vector& x, const Vector& x_prime) const;

  double operator()(const Vector& x, const Vector& x_prime) const;

  Matrix matrix(std::span<const Vector> rows, std::span<const Vector> cols) const;
  // k(point, cols[q]) for every q.
  Vector row(const Vector& point, std::span<const Vector> cols) const;

  // d k(v, x) / d x = alpha .* (x - v) * gradient_coefficient(v, x).
  Vector grad_x(const Vector& v, const Vector& x) const;

  // The scalar a with d k(v, x)/dx = diag(alpha) (x - v) a. Finite at r = 0 for
  // every supported family.
  double gradient_coefficient(const Vector& v, const Vector& x) const;

  // Validates that x has the kernel's dimension and finite coordinates.
  void check_point(const Vector& x) const;

 private:
  double unchecked_eval(const Vector& x, const Vector& x_prime) const;
  double coefficient_from_r(double r) const;
  double value_from_r(double r) const;

  KernelFamily family_;
  double tau_sq_;
  Vector alpha_;
};

}  // namespace ikg
