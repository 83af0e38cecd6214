#include "ikg/kernel.hpp"

#include <cmath>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kSqrt5 = 2.2360679774997896964;

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "se";
    case KernelFamily::Matern32:
      return "matern32";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "se") return KernelFamily::SquaredExponential;
  if (name == "matern32") return KernelFamily::Matern32;
  if (name == "matern52") return KernelFamily::Matern52;
  throw InputError("unknown kernel family '" + std::string(name) +
                   "' (expected se, matern32 or matern52)");
}

Kernel::Kernel(KernelFamily family, double tau_sq, Vector alpha)
    : family_(family), tau_sq_(tau_sq), alpha_(std::move(alpha)) {
  if (!(tau_sq_ > 0.0) || !std::isfinite(tau_sq_)) {
    throw InputError("kernel tau_sq must be positive and finite");
  }
  if (alpha_.size() < 1) {
    throw InputError("kernel alpha must have at least one component");
  }
  for (Eigen::Index j = 0; j < alpha_.size(); ++j) {
    if (!(alpha_[j] > 0.0) || !std::isfinite(alpha_[j])) {
      throw InputError("kernel alpha[" + std::to_string(j) + "] must be positive and finite");
    }
  }
}

Kernel Kernel::isotropic_se(int dim, double tau_sq) {
  return Kernel(KernelFamily::SquaredExponential, tau_sq,
                Vector::Constant(dim, 1.0 / static_cast<double>(dim)));
}

void Kernel::check_point(const Vector& x) const {
  if (x.size() != alpha_.size()) {
    throw InputError("point has dimension " + std::to_string(x.size()) + ", kernel expects " +
                     std::to_string(alpha_.size()));
  }
  if (!x.allFinite()) {
    throw InputError("point has non-finite coordinates");
  }
}

double Kernel::scaled_distance(const Vector& x, const Vector& x_prime) const {
  check_point(x);
  check_point(x_prime);
  return std::sqrt((alpha_.array() * (x - x_prime).array().square()).sum());
}

double Kernel::value_from_r(double r) const {
  switch (family_) {
    case KernelFamily::SquaredExponential:
      return tau_sq_ * std::exp(-r * r);
    case KernelFamily::Matern32: {
      const double s = kSqrt3 * r;
      return tau_sq_ * (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::Matern52: {
      const double s = kSqrt5 * r;
      return tau_sq_ * (1.0 + s + (5.0 / 3.0) * r * r) * std::exp(-s);
    }
  }
  return 0.0;
}

// Simplified forms of the published coefficients:
//   SE:       -2 k(r)
//   Matern32: sqrt3/r [tau^2 e^{-sqrt3 r} - k(r)]                 = -3 tau^2 e^{-sqrt3 r}
//   Matern52: (sqrt5/r + 10/3) tau^2 e^{-sqrt5 r} - sqrt5/r k(r)  = -5/3 tau^2 (1 + sqrt5 r) e^{-sqrt5 r}
// The right-hand sides carry no 1/r, so the coincident limit needs no branch.
double Kernel::coefficient_from_r(double r) const {
  switch (family_) {
    case KernelFamily::SquaredExponential:
      return -2.0 * tau_sq_ * std::exp(-r * r);
    case KernelFamily::Matern32:
      return -3.0 * tau_sq_ * std::exp(-kSqrt3 * r);
    case KernelFamily::Matern52: {
      const double s = kSqrt5 * r;
      return -(5.0 / 3.0) * tau_sq_ * (1.0 + s) * std::exp(-s);
    }
  }
  return 0.0;
}

double Kernel::unchecked_eval(const Vector& x, const Vector& x_prime) const {
  double r2 = 0.0;
  for (Eigen::Index j = 0; j < alpha_.size(); ++j) {
    const double diff = x[j] - x_prime[j];
    r2 += alpha_[j] * diff * diff;
  }
  if (family_ == KernelFamily::SquaredExponential) return tau_sq_ * std::exp(-r2);
  return value_from_r(std::sqrt(r2));
}

double Kernel::operator()(const Vector& x, const Vector& x_prime) const {
  check_point(x);
  check_point(x_prime);
  return unchecked_eval(x, x_prime);
}

Matrix Kernel::matrix(std::span<const Vector> rows, std::span<const Vector> cols) const {
  for (const auto& p : rows) check_point(p);
  for (const auto& p : cols) check_point(p);
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t p = 0; p < rows.size(); ++p) {
    for (std::size_t q = 0; q < cols.size(); ++q) {
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
          unchecked_eval(rows[p], cols[q]);
    }
  }
  return out;
}

Vector Kernel::row(const Vector& point, std::span<const Vector> cols) const {
  check_point(point);
  Vector out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t q = 0; q < cols.size(); ++q) {
    out[static_cast<Eigen::Index>(q)] = unchecked_eval(point, cols[q]);
  }
  return out;
}

double Kernel::gradient_coefficient(const Vector& v, const Vector& x) const {
  return coefficient_from_r(scaled_distance(v, x));
}

Vector Kernel::grad_x(const Vector& v, const Vector& x) const {
  const double a = gradient_coefficient(v, x);
  return (alpha_.array() * (x - v).array() * a).matrix();
}

}  // namespace ikg
