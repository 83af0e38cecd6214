#include "ikg/gp_posterior.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

namespace {

constexpr double kVarianceClampTolerance = 1e-8;

void check_noise(double noise, const char* what) {
  if (!(noise > 0.0) || !std::isfinite(noise)) {
    throw InputError(std::string(what) + " must be positive and finite");
  }
}

double condition_estimate(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0) return 1.0;
  return ev.maxCoeff() / ev.minCoeff();
}

}  // namespace

PriorMean PriorMean::constant(double value) {
  return PriorMean([value](const Vector&) { return value; }, value);
}

PriorMean PriorMean::custom(std::function<double(const Vector&)> fn) {
  return PriorMean(std::move(fn), std::nullopt);
}

GpPosterior::GpPosterior(Kernel kernel, PriorMean prior_mean, GpOptions options)
    : kernel_(std::move(kernel)),
      prior_mean_(std::move(prior_mean)),
      options_(options),
      observations_(0),
      noise_values_(0),
      alpha_weights_(0) {
  if (options_.jitter < 0.0) throw InputError("gp jitter must be nonnegative");
}

GpPosterior GpPosterior::from_data(Kernel kernel, PriorMean prior_mean,
                                   std::vector<Observation> observations, GpOptions options) {
  GpPosterior gp(std::move(kernel), std::move(prior_mean), options);
  const auto n = static_cast<Eigen::Index>(observations.size());
  gp.observations_.resize(n);
  gp.noise_values_.resize(n);
  gp.locations_.reserve(observations.size());
  for (Eigen::Index l = 0; l < n; ++l) {
    auto& obs = observations[static_cast<std::size_t>(l)];
    gp.kernel_.check_point(obs.location);
    check_noise(obs.noise, "observation noise");
    if (!std::isfinite(obs.value)) throw NumericalError("non-finite observation value");
    gp.locations_.push_back(std::move(obs.location));
    gp.observations_[l] = obs.value;
    gp.noise_values_[l] = obs.noise;
  }
  gp.refactorize();
  return gp;
}

void GpPosterior::refactorize() {
  const auto n = static_cast<Eigen::Index>(locations_.size());
  if (n == 0) {
    alpha_weights_.resize(0);
    return;
  }
  Matrix gram = kernel_.matrix(locations_, locations_);
  gram.diagonal() += noise_values_;
  if (options_.jitter > 0.0) gram.diagonal().array() += options_.jitter;
  gram_factor_.compute(gram);
  if (gram_factor_.info() != Eigen::Success) {
    throw NumericalError("Gram matrix factorization failed (n = " + std::to_string(n) +
                         ", condition estimate " + std::to_string(condition_estimate(gram)) + ")");
  }
  Vector residual(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    residual[l] = observations_[l] - prior_mean_(locations_[static_cast<std::size_t>(l)]);
  }
  alpha_weights_ = gram_factor_.solve(residual);
}

Vector GpPosterior::solve(const Vector& b) const {
  if (locations_.empty()) return Vector(0);
  return gram_factor_.solve(b);
}

double GpPosterior::clamp_variance(double raw) const {
  if (raw >= 0.0) return raw;
  if (raw > -kVarianceClampTolerance) {
    spdlog::debug("posterior variance {} clamped to 0", raw);
  } else {
    spdlog::warn("posterior variance {} below clamp tolerance, clamped to 0", raw);
  }
  return 0.0;
}

double GpPosterior::mean(const Vector& x) const {
  kernel_.check_point(x);
  if (locations_.empty()) return prior_mean_(x);
  return prior_mean_(x) + kernel_.row(x, locations_).dot(alpha_weights_);
}

double GpPosterior::cov(const Vector& x, const Vector& x_prime) const {
  const double prior = kernel_(x, x_prime);
  if (locations_.empty()) return prior;
  const Vector kx = kernel_.row(x, locations_);
  const Vector kxp = kernel_.row(x_prime, locations_);
  return prior - kx.dot(gram_factor_.solve(kxp));
}

double GpPosterior::variance(const Vector& x) const {
  const double prior = kernel_(x, x);
  if (locations_.empty()) return prior;
  const Vector kx = kernel_.row(x, locations_);
  return clamp_variance(prior - kx.dot(gram_factor_.solve(kx)));
}

double GpPosterior::sigma_tilde(const Vector& x, const Vector& v, double noise_at_v) const {
  check_noise(noise_at_v, "noise at the sampling location");
  return cov(x, v) / std::sqrt(variance(v) + noise_at_v);
}

GpPosterior GpPosterior::updated(const Observation& obs) const {
  GpPosterior next = *this;
  next.update_in_place(obs);
  return next;
}

void GpPosterior::update_in_place(const Observation& obs) {
  kernel_.check_point(obs.location);
  check_noise(obs.noise, "observation noise");
  if (!std::isfinite(obs.value)) throw NumericalError("non-finite observation value");
  const auto n = observations_.size();
  locations_.push_back(obs.location);
  observations_.conservativeResize(n + 1);
  observations_[n] = obs.value;
  noise_values_.conservativeResize(n + 1);
  noise_values_[n] = obs.noise;
  refactorize();
}

CandidateCache GpPosterior::prepare_candidate(const Vector& x, double noise_at_x,
                                              const Vector* noise_grad) const {
  kernel_.check_point(x);
  check_noise(noise_at_x, "noise at the sampling location");
  CandidateCache cache;
  cache.x = x;
  cache.noise = noise_at_x;
  const auto n = static_cast<Eigen::Index>(locations_.size());
  const int d = kernel_.dim();
  if (n > 0) {
    cache.prior_cross = kernel_.row(x, locations_);
    cache.weights = gram_factor_.solve(cache.prior_cross);
    cache.variance = clamp_variance(kernel_.tau_sq() - cache.prior_cross.dot(cache.weights));
  } else {
    cache.prior_cross.resize(0);
    cache.weights.resize(0);
    cache.variance = kernel_.tau_sq();
  }
  cache.predictive_sd = std::sqrt(cache.variance + noise_at_x);

  if (noise_grad != nullptr) {
    if (noise_grad->size() != d) throw InputError("noise gradient dimension mismatch");
    cache.with_gradient = true;
    cache.noise_grad = *noise_grad;
    cache.variance_grad = Vector::Zero(d);
    if (n > 0) {
      Matrix spread(d, n);
      for (Eigen::Index l = 0; l < n; ++l) {
        const Vector& v = locations_[static_cast<std::size_t>(l)];
        spread.col(l) = kernel_.alpha().cwiseProduct(x - v) * kernel_.gradient_coefficient(v, x);
      }
      cache.gradient_solve = gram_factor_.solve(spread.transpose());
      cache.variance_grad = -2.0 * spread * cache.weights;
    } else {
      cache.gradient_solve.resize(0, d);
    }
  }
  return cache;
}

Innovation GpPosterior::innovation(const CandidateCache& cache, const Vector& xi) const {
  Innovation out;
  double cross = kernel_(xi, cache.x);
  Vector kxi;
  if (!locations_.empty()) {
    kxi = kernel_.row(xi, locations_);
    cross -= kxi.dot(cache.weights);
  }
  out.sigma_tilde = cross / cache.predictive_sd;
  if (cache.with_gradient) {
    Vector dk_vx = kernel_.alpha().cwiseProduct(cache.x - xi) *
                   kernel_.gradient_coefficient(xi, cache.x);
    if (!locations_.empty()) dk_vx -= cache.gradient_solve.transpose() * kxi;
    const double sd = cache.predictive_sd;
    out.gradient = dk_vx / sd - (0.5 * cross / (sd * sd * sd)) *
                                    (cache.variance_grad + cache.noise_grad);
  }
  return out;
}

PosteriorCovGrad GpPosterior::posterior_cov_grad(const Vector& v, const Vector& x) const {
  kernel_.check_point(v);
  kernel_.check_point(x);
  const int d = kernel_.dim();
  PosteriorCovGrad out;
  out.dk_vx = kernel_.grad_x(v, x);
  out.dk_xx = Vector::Zero(d);
  const auto n = static_cast<Eigen::Index>(locations_.size());
  if (n == 0) return out;
  Matrix spread(d, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const Vector& vl = locations_[static_cast<std::size_t>(l)];
    spread.col(l) = kernel_.alpha().cwiseProduct(x - vl) * kernel_.gradient_coefficient(vl, x);
  }
  out.dk_vx -= spread * gram_factor_.solve(kernel_.row(v, locations_));
  out.dk_xx = -2.0 * spread * gram_factor_.solve(kernel_.row(x, locations_));
  return out;
}

Vector GpPosterior::sigma_tilde_grad(const Vector& v, const Vector& x, double noise_at_x,
                                     const Vector& noise_grad_at_x) const {
  const CandidateCache cache = prepare_candidate(x, noise_at_x, &noise_grad_at_x);
  return innovation(cache, v).gradient;
}

}  // namespace ikg
