#pragma once

#include <memory>
#include <vector>

#include "ikg/domain.hpp"
#include "ikg/kernel.hpp"
#include "ikg/rng.hpp"
#include "ikg/types.hpp"

namespace ikg {

struct Problem;

// Latin hypercube design of `count` points: each coordinate visits every one
// of `count` equal strata once, under an independent random permutation.
// Centered designs put each point at its stratum midpoint; otherwise the
// point is uniform within its stratum.
std::vector<Vector> latin_hypercube(std::size_t count, const BoxDomain& domain, Rng& rng,
                                    bool centered = true);

// Surface of sampling variances from replicated runs at design points,
// interpolated by noiseless kriging with a fixed prior:
//   lambda_hat(x) = mu0 + k0(x, X) k0(X, X)^{-1} (s^2 - mu0),
// clamped below at `floor`.
class VarianceModel {
 public:
  static VarianceModel from_sample_variances(std::vector<Vector> design_points,
                                             Vector sample_variances, Kernel kernel,
                                             double prior_mean = 0.0, double floor = 1e-6);

  const std::vector<Vector>& design_points() const noexcept { return design_points_; }
  const Vector& sample_variances() const noexcept { return sample_variances_; }
  double floor() const noexcept { return floor_; }

  double raw_prediction(const Vector& x) const;
  double predict(const Vector& x) const;
  Vector predict_gradient(const Vector& x) const;

  ScalarField as_field() const;

 private:
  VarianceModel(std::vector<Vector> design_points, Vector sample_variances, Kernel kernel,
                double prior_mean, double floor);

  std::vector<Vector> design_points_;
  Vector sample_variances_;
  Kernel kernel_;
  double prior_mean_;
  double floor_;
  Vector weights_;
};

// Runs `replications` noisy samples of alternative `alternative` (0-based) at
// every design point, then fits the kriging surface to their sample variances.
VarianceModel fit_variance_model(std::vector<Vector> design_points, std::size_t replications,
                                 const Problem& problem, std::size_t alternative, Rng& rng,
                                 double floor = 1e-6);

}  // namespace ikg
