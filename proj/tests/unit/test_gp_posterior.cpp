#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ikg/errors.hpp"
#include "ikg/gp_posterior.hpp"

namespace {

using ikg::GpPosterior;
using ikg::Kernel;
using ikg::KernelFamily;
using ikg::Observation;
using ikg::PriorMean;
using ikg::Vector;

Vector scalar(double x) { return Vector::Constant(1, x); }

Kernel unit_se() { return Kernel(KernelFamily::SquaredExponential, 1.0, scalar(1.0)); }

GpPosterior two_point_posterior() {
  return GpPosterior::from_data(unit_se(), PriorMean::constant(0.5),
                                {{scalar(0.0), 1.0, 0.01}, {scalar(1.0), -1.0, 0.02}});
}

std::vector<Observation> random_observations(int dim, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::normal_distribution<double> z;
  std::vector<Observation> out;
  for (std::size_t l = 0; l < n; ++l) {
    Vector v(dim);
    for (int j = 0; j < dim; ++j) v[j] = u(rng);
    out.push_back({v, std::cos(v.sum()) + 0.1 * z(rng), 0.01 + 0.01 * static_cast<double>(l % 3)});
  }
  return out;
}

TEST(GpPosterior, PriorOnly) {
  const GpPosterior gp(unit_se(), PriorMean::constant(0.25));
  EXPECT_EQ(gp.size(), 0u);
  EXPECT_DOUBLE_EQ(gp.mean(scalar(3.0)), 0.25);
  EXPECT_DOUBLE_EQ(gp.variance(scalar(3.0)), 1.0);
  EXPECT_NEAR(gp.cov(scalar(0.0), scalar(1.0)), std::exp(-1.0), 1e-15);
}

TEST(GpPosterior, SingleObservationClosedForm) {
  const GpPosterior gp =
      GpPosterior::from_data(unit_se(), PriorMean::constant(0.0), {{scalar(0.0), 1.0, 0.01}});
  EXPECT_NEAR(gp.mean(scalar(0.5)), 0.77108988422911372, 1e-14);
  EXPECT_NEAR(gp.variance(scalar(0.5)), 0.39947459434392731, 1e-14);
}

TEST(GpPosterior, TwoObservationsHeteroscedastic) {
  const GpPosterior gp = two_point_posterior();
  EXPECT_NEAR(gp.mean(scalar(0.2)), 0.63895574493643740, 1e-13);
  EXPECT_NEAR(gp.variance(scalar(0.2)), 0.050528667879156524, 1e-13);
  EXPECT_NEAR(gp.cov(scalar(0.2), scalar(0.7)), 0.057759281824047335, 1e-13);
  EXPECT_NEAR(gp.sigma_tilde(scalar(0.7), scalar(0.2), 0.03), 0.20353848008399629, 1e-13);
}

TEST(GpPosterior, CovIsSymmetric) {
  const GpPosterior gp = GpPosterior::from_data(
      Kernel(KernelFamily::Matern52, 1.0, Vector::Constant(2, 0.5)), PriorMean::constant(0.0),
      random_observations(2, 8, 3));
  Vector a(2), b(2);
  a << 1.0, 2.0;
  b << 3.5, 0.5;
  EXPECT_NEAR(gp.cov(a, b), gp.cov(b, a), 1e-15);
}

class BatchVsSequential : public ::testing::TestWithParam<std::size_t> {};

TEST_P(BatchVsSequential, Agree) {
  const std::size_t n = GetParam();
  const Kernel k(KernelFamily::Matern32, 1.2, Vector::Constant(2, 0.4));
  const auto data = random_observations(2, n, 11 + n);
  const GpPosterior batch = GpPosterior::from_data(k, PriorMean::constant(0.1), data);
  GpPosterior seq(k, PriorMean::constant(0.1));
  GpPosterior chained(k, PriorMean::constant(0.1));
  for (const auto& obs : data) {
    seq.update_in_place(obs);
    chained = chained.updated(obs);
  }
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 20; ++t) {
    Vector x(2), y(2);
    x << u(rng), u(rng);
    y << u(rng), u(rng);
    EXPECT_NEAR(batch.mean(x), seq.mean(x), 1e-8);
    EXPECT_NEAR(batch.cov(x, y), seq.cov(x, y), 1e-8);
    EXPECT_NEAR(batch.mean(x), chained.mean(x), 1e-8);
    EXPECT_NEAR(batch.variance(x), chained.variance(x), 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, BatchVsSequential, ::testing::Values(1u, 5u, 20u));

TEST(GpPosterior, UpdatedLeavesOriginalUntouched) {
  const GpPosterior gp(unit_se(), PriorMean::constant(0.0));
  const GpPosterior next = gp.updated({scalar(1.0), 2.0, 0.01});
  EXPECT_EQ(gp.size(), 0u);
  EXPECT_EQ(next.size(), 1u);
}

TEST(GpPosterior, VarianceNeverIncreasesWithData) {
  const Kernel k = Kernel::isotropic_se(2);
  GpPosterior gp(k, PriorMean::constant(0.0));
  const auto data = random_observations(2, 25, 5);
  Vector probe(2);
  probe << 2.0, 2.0;
  double previous = gp.variance(probe);
  for (const auto& obs : data) {
    gp.update_in_place(obs);
    const double now = gp.variance(probe);
    EXPECT_LE(now, previous + 1e-12);
    EXPECT_GE(now, 0.0);
    previous = now;
  }
}

TEST(GpPosterior, SigmaTildeBoundedByPosteriorSd) {
  const GpPosterior gp = GpPosterior::from_data(Kernel::isotropic_se(2), PriorMean::constant(0.0),
                                                random_observations(2, 10, 8));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    Vector x(2), v(2);
    x << u(rng), u(rng);
    v << u(rng), u(rng);
    EXPECT_LE(std::abs(gp.sigma_tilde(v, x, 0.01)), std::sqrt(gp.variance(v)) + 1e-12);
  }
}

TEST(GpPosterior, PosteriorCovGradMatchesFiniteDifferences) {
  const GpPosterior gp = GpPosterior::from_data(
      Kernel(KernelFamily::Matern52, 1.0, Vector::Constant(2, 0.3)), PriorMean::constant(0.0),
      random_observations(2, 6, 21));
  Vector v(2), x(2);
  v << 1.0, 3.0;
  x << 2.2, 1.4;
  const auto g = gp.posterior_cov_grad(v, x);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    EXPECT_NEAR(g.dk_vx[j], (gp.cov(v, hi) - gp.cov(v, lo)) / (2 * h), 1e-7);
    EXPECT_NEAR(g.dk_xx[j], (gp.variance(hi) - gp.variance(lo)) / (2 * h), 1e-7);
  }
}

TEST(GpPosterior, SigmaTildeGradientWithHeteroscedasticNoise) {
  const GpPosterior gp = GpPosterior::from_data(Kernel::isotropic_se(2), PriorMean::constant(0.0),
                                                random_observations(2, 7, 17));
  auto noise = [](const Vector& p) { return 0.02 + 0.005 * p[0] * p[0]; };
  Vector v(2), x(2);
  v << 2.5, 2.0;
  x << 1.5, 3.0;
  Vector noise_grad(2);
  noise_grad << 0.01 * x[0], 0.0;
  const Vector g = gp.sigma_tilde_grad(v, x, noise(x), noise_grad);
  const auto cache = gp.prepare_candidate(x, noise(x), &noise_grad);
  const auto inn = gp.innovation(cache, v);
  EXPECT_NEAR(inn.sigma_tilde, gp.sigma_tilde(v, x, noise(x)), 1e-14);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    const double fd =
        (gp.sigma_tilde(v, hi, noise(hi)) - gp.sigma_tilde(v, lo, noise(lo))) / (2 * h);
    EXPECT_NEAR(g[j], fd, 1e-7);
    EXPECT_NEAR(inn.gradient[j], fd, 1e-7);
  }
}

TEST(GpPosterior, SolveInvertsTheGram) {
  const GpPosterior gp = two_point_posterior();
  Vector b(2);
  b << 1.0, -2.0;
  const Vector s = gp.solve(b);
  ikg::Matrix K = unit_se().matrix(gp.locations(), gp.locations());
  K.diagonal() += gp.noise_values();
  EXPECT_NEAR((K * s - b).norm(), 0.0, 1e-13);
}

TEST(GpPosterior, RejectsBadObservations) {
  GpPosterior gp(unit_se(), PriorMean::constant(0.0));
  EXPECT_THROW(gp.update_in_place({scalar(0.0), 1.0, 0.0}), ikg::InputError);
  EXPECT_THROW(gp.update_in_place({scalar(0.0), NAN, 0.01}), ikg::NumericalError);
  EXPECT_THROW(gp.update_in_place({Vector::Zero(2), 1.0, 0.01}), ikg::InputError);
}

TEST(GpPosterior, CustomPriorMean) {
  const GpPosterior gp(unit_se(), PriorMean::custom([](const Vector& x) { return 2.0 * x[0]; }));
  EXPECT_DOUBLE_EQ(gp.mean(scalar(1.5)), 3.0);
  EXPECT_FALSE(gp.prior_mean().constant_value().has_value());
}

}  // namespace
