#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ikg/belief_state.hpp"
#include "ikg/domain.hpp"
#include "ikg/types.hpp"

namespace ikg {

// g(s, t) = t phi(s/t) - s Phi(-s/t) for s >= 0, t >= 0, with g(s, 0) = 0.
// Positive, decreasing in s and increasing in t.
double g_func(double s, double t);

// Delta_i(v) = mu_i(v) - max_{a != i} mu_a(v), from a vector of all M means.
double delta_from_means(const Vector& means, std::size_t i);
double delta(const BeliefState& state, std::size_t i, const Vector& v);

// Integrand of the IKG integral: g(|Delta_i(v)|, |sigma_tilde_i(v, x)|).
double h_integrand(const BeliefState& state, std::size_t i, const Vector& v, const Vector& x,
                   double noise_at_x);

// Integration points with the posterior means of all alternatives at each
// point evaluated once. Row a of `means` holds mu_a at every point.
struct CovariateBatch {
  std::vector<Vector> points;
  Matrix means;

  std::size_t size() const noexcept { return points.size(); }
};

CovariateBatch make_batch(const BeliefState& state, std::vector<Vector> points);

struct AcquisitionSample {
  // log of the sample-average IKG; -inf when every integrand term vanished.
  double log_value = -std::numeric_limits<double>::infinity();
  // Gradient in x of the (linear-domain) sample-average IKG, when requested.
  std::optional<Vector> gradient;
};

/*
  Log of the sample-average IKG estimate

    IKG_hat(i, x) = 1 / (c_i(x) J) sum_j h_i(xi_j, x)

  evaluated term by term in the log domain:

    u   = |Delta| / |sigma_tilde|
    r   = Phi(-u) / phi(u)        if u < 20,   u / (u^2 + 1) otherwise
    g_j = log(|sigma_tilde| / (sqrt(2 pi) J)) - u^2 / 2 + log1p(-u r)

  followed by a max-shifted log-sum-exp and subtraction of log c_i(x). Terms
  with sigma_tilde == 0 are skipped.
*/
AcquisitionSample log_ikg_estimate(const BeliefState& state, std::size_t i, const Vector& x,
                                   const CovariateBatch& batch, const ScalarField& noise,
                                   const ScalarField& cost, bool with_gradient = false);

AcquisitionSample log_ikg_estimate(const BeliefState& state, std::size_t i, const Vector& x,
                                   std::span<const Vector> xi_points, const ScalarField& noise,
                                   const ScalarField& cost);

// d/dx [h_i(xi, x) / c_i(x)] for a single integration point xi.
Vector ikg_gradient_sample(const BeliefState& state, std::size_t i, const Vector& xi,
                           const Vector& x, const ScalarField& noise, const ScalarField& cost);

// Average of ikg_gradient_sample over the batch, sharing the per-x work.
Vector ikg_gradient_mean(const BeliefState& state, std::size_t i, const CovariateBatch& batch,
                         const Vector& x, const ScalarField& noise, const ScalarField& cost);

// Trapezoid quadrature of the IKG integral (d = 1 only), for testing.
double ikg_quadrature_reference(const BeliefState& state, std::size_t i, const Vector& x,
                                const CovariateDensity& density, const ScalarField& noise,
                                const ScalarField& cost, int grid_size);

}  // namespace ikg
