#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ikg/kernel.hpp"
#include "ikg/types.hpp"

namespace ikg {

// Prior mean function mu^0. Constant means are serializable; custom ones are not.
class PriorMean {
 public:
  static PriorMean constant(double value);
  static PriorMean custom(std::function<double(const Vector&)> fn);

  double operator()(const Vector& x) const { return fn_(x); }
  const std::optional<double>& constant_value() const noexcept { return constant_; }

 private:
  PriorMean(std::function<double(const Vector&)> fn, std::optional<double> constant)
      : fn_(std::move(fn)), constant_(constant) {}

  std::function<double(const Vector&)> fn_;
  std::optional<double> constant_;
};

struct Observation {
  Vector location;
  double value = 0.0;
  double noise = 0.0;  // sampling variance lambda(location), must be > 0
};

struct GpOptions {
  // Added to the Gram diagonal before factorization. Off unless asked for.
  double jitter = 0.0;
};

struct PosteriorCovGrad {
  Vector dk_vx;  // d k^n(v, x) / dx
  Vector dk_xx;  // d k^n(x, x) / dx
};

// Everything about the posterior that depends only on the candidate sampling
// location x. Built once per x so that many integration points can be
// processed in O(n d) each.
struct CandidateCache {
  Vector x;
  Vector prior_cross;     // k0(V, x)
  Vector weights;         // K^{-1} k0(V, x)
  double variance = 0.0;  // k^n(x, x), clamped at 0
  double noise = 0.0;     // lambda(x)
  double predictive_sd = 0.0;  // sqrt(k^n(x, x) + lambda(x))
  bool with_gradient = false;
  Matrix gradient_solve;  // K^{-1} D^T, where D's columns are alpha .* (x - v_l) a_l
  Vector variance_grad;   // d k^n(x, x) / dx
  Vector noise_grad;      // d lambda(x) / dx
};

struct Innovation {
  double sigma_tilde = 0.0;  // k^n(xi, x) / sqrt(k^n(x, x) + lambda(x))
  Vector gradient;           // d sigma_tilde / dx, empty unless requested
};

/*
  Exact GP posterior for one alternative under heteroscedastic Gaussian noise.

    mu^n(x)    = mu^0(x) + k0(x, V) [k0(V, V) + diag(lambda)]^{-1} (y - mu^0(V))
    k^n(x, x') = k0(x, x') - k0(x, V) [k0(V, V) + diag(lambda)]^{-1} k0(V, x')

  The Gram matrix is refactorized from scratch on every update. Values are
  immutable apart from update_in_place; concurrent reads are safe.
*/
class GpPosterior {
 public:
  GpPosterior(Kernel kernel, PriorMean prior_mean, GpOptions options = {});

  // Posterior from a batch of data in the order given.
  static GpPosterior from_data(Kernel kernel, PriorMean prior_mean,
                               std::vector<Observation> observations, GpOptions options = {});

  const Kernel& kernel() const noexcept { return kernel_; }
  const PriorMean& prior_mean() const noexcept { return prior_mean_; }
  const GpOptions& options() const noexcept { return options_; }
  int dim() const noexcept { return kernel_.dim(); }
  std::size_t size() const noexcept { return locations_.size(); }
  const std::vector<Vector>& locations() const noexcept { return locations_; }
  const Vector& observations() const noexcept { return observations_; }
  const Vector& noise_values() const noexcept { return noise_values_; }
  // [K + diag(lambda)]^{-1} (y - mu^0(V))
  const Vector& alpha_weights() const noexcept { return alpha_weights_; }

  double mean(const Vector& x) const;
  double cov(const Vector& x, const Vector& x_prime) const;
  double variance(const Vector& x) const;

  // k^n(x, v) / sqrt(k^n(v, v) + noise_at_v).
  double sigma_tilde(const Vector& x, const Vector& v, double noise_at_v) const;

  GpPosterior updated(const Observation& obs) const;
  void update_in_place(const Observation& obs);

  PosteriorCovGrad posterior_cov_grad(const Vector& v, const Vector& x) const;

  // Gradient in x of sigma_tilde(v, x) with noise lambda(x) and its gradient.
  Vector sigma_tilde_grad(const Vector& v, const Vector& x, double noise_at_x,
                          const Vector& noise_grad_at_x) const;

  // `noise_grad` may be null when no gradient is wanted.
  CandidateCache prepare_candidate(const Vector& x, double noise_at_x,
                                   const Vector* noise_grad) const;
  // Fast path for sigma_tilde(xi, x) and optionally its x-gradient.
  Innovation innovation(const CandidateCache& cache, const Vector& xi) const;

  // K^{-1} b for the current Gram matrix.
  Vector solve(const Vector& b) const;

 private:
  void refactorize();
  double clamp_variance(double raw) const;

  Kernel kernel_;
  PriorMean prior_mean_;
  GpOptions options_;
  std::vector<Vector> locations_;
  Vector observations_;
  Vector noise_values_;
  Eigen::LLT<Matrix> gram_factor_;
  Vector alpha_weights_;
};

}  // namespace ikg
