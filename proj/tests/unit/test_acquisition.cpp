#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ikg/acquisition.hpp"
#include "ikg/errors.hpp"
#include "ikg/normal.hpp"
#include "ikg/problem.hpp"

namespace {

using namespace ikg;

Vector scalar(double x) { return Vector::Constant(1, x); }

BeliefState prior_state(std::vector<double> means, int dim = 1) {
  std::vector<GpPosterior> gps;
  for (double m : means) gps.emplace_back(Kernel::isotropic_se(dim), PriorMean::constant(m));
  return BeliefState(std::move(gps));
}

BeliefState fitted_state() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> z;
  std::vector<GpPosterior> gps;
  for (int i = 0; i < 3; ++i) {
    std::vector<Observation> obs;
    for (int l = 0; l < 4 + i; ++l) {
      const double x = u(rng);
      obs.push_back({scalar(x), griewank_truth(i + 1, scalar(x)) + 0.1 * z(rng), 0.01});
    }
    gps.push_back(GpPosterior::from_data(Kernel::isotropic_se(1), PriorMean::constant(0.0), obs));
  }
  return BeliefState(std::move(gps));
}

const ScalarField kNoise = ScalarField::constant(0.01);
const ScalarField kUnitCost = ScalarField::constant(1.0);

TEST(GFunc, FrozenValues) {
  EXPECT_NEAR(g_func(0.0, 1.0), 0.39894228040143268, 1e-16);
  EXPECT_NEAR(g_func(1.0, 1.0), 0.083315470587686298, 1e-15);
  EXPECT_NEAR(g_func(0.5, 2.0), 0.57268939644716028, 1e-15);
  EXPECT_EQ(g_func(3.0, 0.0), 0.0);
}

TEST(GFunc, DeepTailStaysPositiveAndTiny) {
  const double g = g_func(30.0, 1.0);
  EXPECT_GT(g, 0.0);
  EXPECT_LT(g, 1e-190);
}

TEST(GFunc, Monotone) {
  double prev = g_func(0.0, 0.7);
  for (double s = 0.1; s < 8.0; s += 0.1) {
    const double g = g_func(s, 0.7);
    EXPECT_LT(g, prev);
    prev = g;
  }
  prev = 0.0;
  for (double t = 0.05; t < 5.0; t += 0.05) {
    const double g = g_func(0.4, t);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(GFunc, RejectsNegativeArguments) {
  EXPECT_THROW(g_func(-1.0, 1.0), InputError);
  EXPECT_THROW(g_func(1.0, -1.0), InputError);
}

TEST(Mills, ExactAgainstReferenceAndAsymptoticAtCrossover) {
  EXPECT_NEAR(normal::mills_ratio(0.0), 1.2533141373155003, 1e-14);
  EXPECT_NEAR(normal::mills_ratio(20.0), 0.049875925981836784, 1e-15);
  const double exact = normal::mills_ratio(20.0);
  EXPECT_LT(std::abs(normal::mills_ratio_asymptotic(20.0) - exact) / exact, 1e-4);
}

TEST(Delta, AgainstBestOtherAlternative) {
  Vector means(3);
  means << 1.0, 3.0, 2.0;
  EXPECT_DOUBLE_EQ(delta_from_means(means, 0), -2.0);
  EXPECT_DOUBLE_EQ(delta_from_means(means, 1), 1.0);
  EXPECT_DOUBLE_EQ(delta_from_means(means, 2), -1.0);
}

TEST(HIntegrand, PriorClosedForm) {
  const BeliefState state = prior_state({0.0, 0.0});
  const double h = h_integrand(state, 0, scalar(2.0), scalar(3.0), 0.01);
  EXPECT_NEAR(h, normal::kInvSqrt2Pi * std::exp(-1.0) / std::sqrt(1.01), 1e-15);
}

TEST(HIntegrand, NonNegative) {
  const BeliefState state = fitted_state();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 500; ++t) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(h_integrand(state, i, scalar(u(rng)), scalar(u(rng)), 0.01), 0.0);
    }
  }
}

TEST(Quadrature, PriorOracleOnUniformBox) {
  // (1/10) int_0^10 phi(0) exp(-(v - x)^2) / sqrt(1.01) dv
  const BeliefState state = prior_state({0.0, 0.0});
  const auto density = CovariateDensity::uniform(BoxDomain::cube(1, 0.0, 10.0));
  EXPECT_NEAR(ikg_quadrature_reference(state, 0, scalar(5.0), density, kNoise, kUnitCost, 4001),
              0.070359754472921010, 1e-7);
  EXPECT_NEAR(ikg_quadrature_reference(state, 1, scalar(0.0), density, kNoise, kUnitCost, 4001),
              0.035179877236514593, 1e-7);
  EXPECT_THROW(ikg_quadrature_reference(state, 0, scalar(5.0), density, kNoise, kUnitCost, 50),
               InputError);
}

TEST(Quadrature, OnlyOneDimensional) {
  const BeliefState state = prior_state({0.0, 0.0}, 2);
  const auto density = CovariateDensity::uniform(BoxDomain::cube(2, 0.0, 10.0));
  EXPECT_THROW(ikg_quadrature_reference(state, 0, Vector::Zero(2), density, kNoise, kUnitCost, 201),
               UnsupportedError);
}

TEST(LogIkg, SaaMatchesPriorOracle) {
  const BeliefState state = prior_state({0.0, 0.0});
  const auto density = CovariateDensity::uniform(BoxDomain::cube(1, 0.0, 10.0));
  Rng rng(3);
  const auto pts = density.sample(50000, rng);
  const double v = std::exp(log_ikg_estimate(state, 0, scalar(5.0), pts, kNoise, kUnitCost).log_value);
  EXPECT_NEAR(v, 0.070359754472921010, 0.003);
}

TEST(LogIkg, MatchesNaiveAverage) {
  const BeliefState state = fitted_state();
  const auto density = CovariateDensity::uniform(BoxDomain::cube(1, 0.0, 10.0));
  Rng rng(5);
  const auto pts = density.sample(300, rng);
  const ScalarField cost = location_cost(2, 1);
  for (double x : {0.5, 3.0, 7.5}) {
    for (std::size_t i = 0; i < 3; ++i) {
      double naive = 0.0;
      for (const auto& p : pts) naive += h_integrand(state, i, p, scalar(x), 0.01);
      naive /= 300.0 * cost(scalar(x));
      const double logged = log_ikg_estimate(state, i, scalar(x), pts, kNoise, cost).log_value;
      EXPECT_NEAR(std::exp(logged) / naive, 1.0, 1e-10);
    }
  }
}

TEST(LogIkg, FiniteWhereTheNaiveSumUnderflows) {
  const BeliefState state = prior_state({100.0, 0.0});
  const std::vector<Vector> pts{scalar(4.0)};
  EXPECT_EQ(h_integrand(state, 1, pts[0], scalar(4.0), 0.01), 0.0);
  const double logged = log_ikg_estimate(state, 1, scalar(4.0), pts, kNoise, kUnitCost).log_value;
  EXPECT_TRUE(std::isfinite(logged));
  EXPECT_NEAR(logged, -5060.1445013282994, 1e-3);
}

TEST(LogIkg, EmptyTermSetIsMinusInfinity) {
  // Integration points so far away that every sigma_tilde is exactly zero.
  const BeliefState state = prior_state({0.0, 0.0});
  const std::vector<Vector> pts{scalar(1e4), scalar(2e4)};
  const double logged = log_ikg_estimate(state, 0, scalar(0.0), pts, kNoise, kUnitCost).log_value;
  EXPECT_EQ(logged, -std::numeric_limits<double>::infinity());
}

TEST(LogIkg, CostShiftsTheLogByItsLog) {
  const BeliefState state = fitted_state();
  const auto density = CovariateDensity::uniform(BoxDomain::cube(1, 0.0, 10.0));
  Rng rng(6);
  const CovariateBatch batch = make_batch(state, density.sample(200, rng));
  const double base = log_ikg_estimate(state, 1, scalar(2.0), batch, kNoise, kUnitCost).log_value;
  const double scaled =
      log_ikg_estimate(state, 1, scalar(2.0), batch, kNoise, ScalarField::constant(4.0)).log_value;
  EXPECT_NEAR(base - scaled, std::log(4.0), 1e-12);
}

TEST(IkgGradient, SampleMatchesFiniteDifferenceOfQuotient) {
  const BeliefState state = fitted_state();
  const ScalarField cost = location_cost(1, 1);
  const double h = 1e-6;
  for (double xi : {1.0, 4.0, 8.5}) {
    for (double x : {2.0, 6.0}) {
      for (std::size_t i = 0; i < 3; ++i) {
        auto f = [&](double p) {
          return h_integrand(state, i, scalar(xi), scalar(p), 0.01) / cost(scalar(p));
        };
        const double fd = (f(x + h) - f(x - h)) / (2 * h);
        const Vector g = ikg_gradient_sample(state, i, scalar(xi), scalar(x), kNoise, cost);
        EXPECT_NEAR(g[0], fd, 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(IkgGradient, MeanIsTheAverageOfSamples) {
  const BeliefState state = fitted_state();
  const ScalarField cost = location_cost(3, 1);
  std::vector<Vector> pts{scalar(0.5), scalar(2.5), scalar(9.0), scalar(6.0)};
  const CovariateBatch batch = make_batch(state, pts);
  Vector avg = Vector::Zero(1);
  for (const auto& p : pts) avg += ikg_gradient_sample(state, 2, p, scalar(3.3), kNoise, cost);
  avg /= 4.0;
  EXPECT_NEAR(ikg_gradient_mean(state, 2, batch, scalar(3.3), kNoise, cost)[0], avg[0], 1e-14);
  const auto with = log_ikg_estimate(state, 2, scalar(3.3), batch, kNoise, cost, true);
  ASSERT_TRUE(with.gradient.has_value());
  EXPECT_NEAR((*with.gradient)[0], avg[0], 1e-14);
}

TEST(IkgGradient, RejectsBadInputs) {
  const BeliefState state = prior_state({0.0, 0.0});
  const CovariateBatch batch = make_batch(state, {scalar(1.0)});
  EXPECT_THROW(ikg_gradient_mean(state, 5, batch, scalar(1.0), kNoise, kUnitCost), InputError);
  EXPECT_THROW(ikg_gradient_mean(state, 0, batch, scalar(1.0), kNoise, ScalarField::constant(0.0)),
               InputError);
  EXPECT_THROW(ikg_gradient_mean(state, 0, make_batch(state, {}), scalar(1.0), kNoise, kUnitCost),
               InputError);
}

}  // namespace
