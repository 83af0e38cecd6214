#include "ikg/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ikg/errors.hpp"
#include "ikg/normal.hpp"

namespace ikg {

namespace {

constexpr double kMillsCrossover = 20.0;
// Largest log1p argument magnitude; u r < 1 analytically.
constexpr double kLog1pFloor = -(1.0 - 1e-16);
constexpr double kExactMillsLimit = 26.0;

// 1 - u Phi(-u)/phi(u), accurate over the whole range.
double tail_factor(double u) {
  if (u < kExactMillsLimit) return std::max(0.0, 1.0 - u * normal::mills_ratio(u));
  const double w = 1.0 / (u * u);
  return w * (1.0 + w * (-3.0 + w * (15.0 - 105.0 * w)));
}

void check_index(const BeliefState& state, std::size_t i) {
  if (i >= state.num_alternatives()) {
    throw InputError("alternative index " + std::to_string(i) + " out of range");
  }
}

double checked_cost(const ScalarField& cost, const Vector& x) {
  const double c = cost(x);
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("sampling cost must be positive at x");
  return c;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double g_func(double s, double t) {
  if (!(s >= 0.0)) throw InputError("g_func requires s >= 0");
  if (!(t >= 0.0)) throw InputError("g_func requires t >= 0");
  if (t == 0.0) return 0.0;
  const double u = s / t;
  return t * normal::pdf(u) * tail_factor(u);
}

double delta_from_means(const Vector& means, std::size_t i) {
  const auto idx = static_cast<Eigen::Index>(i);
  double best_other = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < means.size(); ++a) {
    if (a != idx) best_other = std::max(best_other, means[a]);
  }
  return means[idx] - best_other;
}

double delta(const BeliefState& state, std::size_t i, const Vector& v) {
  check_index(state, i);
  return delta_from_means(state.means(v), i);
}

double h_integrand(const BeliefState& state, std::size_t i, const Vector& v, const Vector& x,
                   double noise_at_x) {
  check_index(state, i);
  const double d = delta(state, i, v);
  const double st = state.posterior(i).sigma_tilde(v, x, noise_at_x);
  return g_func(std::abs(d), std::abs(st));
}

CovariateBatch make_batch(const BeliefState& state, std::vector<Vector> points) {
  CovariateBatch batch;
  batch.points = std::move(points);
  const auto m = static_cast<Eigen::Index>(state.num_alternatives());
  batch.means.resize(m, static_cast<Eigen::Index>(batch.points.size()));
  for (std::size_t j = 0; j < batch.points.size(); ++j) {
    batch.means.col(static_cast<Eigen::Index>(j)) = state.means(batch.points[j]);
  }
  return batch;
}

AcquisitionSample log_ikg_estimate(const BeliefState& state, std::size_t i, const Vector& x,
                                   const CovariateBatch& batch, const ScalarField& noise,
                                   const ScalarField& cost, bool with_gradient) {
  check_index(state, i);
  if (batch.size() < 1) throw InputError("log_ikg_estimate needs at least one integration point");
  const double c = checked_cost(cost, x);
  const GpPosterior& gp = state.posterior(i);
  const Vector noise_grad = with_gradient ? noise.gradient(x) : Vector();
  const CandidateCache cache =
      gp.prepare_candidate(x, noise(x), with_gradient ? &noise_grad : nullptr);

  const double count = static_cast<double>(batch.size());
  const double log_norm = normal::kLogSqrt2Pi + std::log(count);
  std::vector<double> terms;
  terms.reserve(batch.size());
  Vector dh_sum = Vector::Zero(x.size());
  double h_sum = 0.0;

  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Innovation inn = gp.innovation(cache, batch.points[j]);
    const double abs_st = std::abs(inn.sigma_tilde);
    if (!(abs_st > 0.0)) continue;
    const double d = delta_from_means(batch.means.col(static_cast<Eigen::Index>(j)), i);
    const double u = std::abs(d) / abs_st;
    const double r =
        u < kMillsCrossover ? normal::mills_ratio(u) : normal::mills_ratio_asymptotic(u);
    const double arg = std::max(-u * r, kLog1pFloor);
    const double term = std::log(abs_st) - log_norm - 0.5 * u * u + std::log1p(arg);
    // Only u^2 overflow produces a non-finite term; its exponential is 0.
    if (std::isfinite(term)) terms.push_back(term);
    if (with_gradient) {
      const double phi_u = normal::pdf(u);
      h_sum += abs_st * phi_u * tail_factor(u);
      dh_sum += (sign(inn.sigma_tilde) * phi_u) * inn.gradient;
    }
  }

  AcquisitionSample out;
  if (!terms.empty()) {
    const double peak = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double g : terms) acc += std::exp(g - peak);
    out.log_value = peak + std::log(acc) - std::log(c);
  }
  if (with_gradient) {
    const Vector dc = cost.gradient(x);
    out.gradient = ((dh_sum / count) * c - (h_sum / count) * dc) / (c * c);
  }
  return out;
}

AcquisitionSample log_ikg_estimate(const BeliefState& state, std::size_t i, const Vector& x,
                                   std::span<const Vector> xi_points, const ScalarField& noise,
                                   const ScalarField& cost) {
  return log_ikg_estimate(state, i, x,
                          make_batch(state, std::vector<Vector>(xi_points.begin(), xi_points.end())),
                          noise, cost);
}

Vector ikg_gradient_mean(const BeliefState& state, std::size_t i, const CovariateBatch& batch,
                         const Vector& x, const ScalarField& noise, const ScalarField& cost) {
  check_index(state, i);
  if (batch.size() < 1) throw InputError("gradient batch must not be empty");
  const double c = checked_cost(cost, x);
  const GpPosterior& gp = state.posterior(i);
  const Vector noise_grad = noise.gradient(x);
  const CandidateCache cache = gp.prepare_candidate(x, noise(x), &noise_grad);

  Vector dh_sum = Vector::Zero(x.size());
  double h_sum = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Innovation inn = gp.innovation(cache, batch.points[j]);
    if (inn.sigma_tilde == 0.0) continue;
    const double abs_st = std::abs(inn.sigma_tilde);
    const double d = delta_from_means(batch.means.col(static_cast<Eigen::Index>(j)), i);
    const double u = std::abs(d) / abs_st;
    const double phi_u = normal::pdf(u);
    h_sum += abs_st * phi_u * tail_factor(u);
    dh_sum += (sign(inn.sigma_tilde) * phi_u) * inn.gradient;
  }
  const double count = static_cast<double>(batch.size());
  const Vector dc = cost.gradient(x);
  return ((dh_sum / count) * c - (h_sum / count) * dc) / (c * c);
}

Vector ikg_gradient_sample(const BeliefState& state, std::size_t i, const Vector& xi,
                           const Vector& x, const ScalarField& noise, const ScalarField& cost) {
  return ikg_gradient_mean(state, i, make_batch(state, {xi}), x, noise, cost);
}

double ikg_quadrature_reference(const BeliefState& state, std::size_t i, const Vector& x,
                                const CovariateDensity& density, const ScalarField& noise,
                                const ScalarField& cost, int grid_size) {
  check_index(state, i);
  if (state.dim() != 1 || density.domain().dim() != 1) {
    throw UnsupportedError("quadrature reference is implemented for d = 1 only");
  }
  if (grid_size < 101) throw InputError("quadrature grid_size must be at least 101");
  const double c = checked_cost(cost, x);
  const double noise_x = noise(x);
  const double lo = density.domain().lower()[0];
  const double hi = density.domain().upper()[0];
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  double acc = 0.0;
  Vector v(1);
  for (int k = 0; k < grid_size; ++k) {
    v[0] = k == grid_size - 1 ? hi : lo + step * k;
    const double weight = (k == 0 || k == grid_size - 1) ? 0.5 : 1.0;
    acc += weight * h_integrand(state, i, v, x, noise_x) * density.pdf(v);
  }
  return acc * step / c;
}

}  // namespace ikg
