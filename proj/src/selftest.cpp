#include "ikg/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "ikg/acquisition.hpp"
#include "ikg/belief_state.hpp"
#include "ikg/gp_posterior.hpp"
#include "ikg/normal.hpp"
#include "ikg/problem.hpp"
#include "ikg/rng.hpp"

namespace ikg {

namespace {

constexpr double kFdStep = 1e-5;

std::string describe(const char* label, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %.3e", label, value);
  return buf;
}

Vector uniform_point(int dim, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector x(dim);
  for (int j = 0; j < dim; ++j) x[j] = u(rng);
  return x;
}

std::vector<Kernel> test_kernels(int dim) {
  Vector alpha(dim);
  for (int j = 0; j < dim; ++j) alpha[j] = 0.3 + 0.4 * j;
  return {Kernel(KernelFamily::SquaredExponential, 1.3, alpha),
          Kernel(KernelFamily::Matern32, 0.8, alpha), Kernel(KernelFamily::Matern52, 2.0, alpha)};
}

// lambda(x) = 0.01 (1 + 0.1 ||x||^2), smooth and heteroscedastic.
ScalarField test_noise() {
  return ScalarField{[](const Vector& x) { return 0.01 * (1.0 + 0.1 * x.squaredNorm()); },
                     [](const Vector& x) -> Vector { return 0.002 * x; }};
}

std::vector<Observation> random_data(int dim, std::size_t n, Rng& rng) {
  std::normal_distribution<double> z;
  const ScalarField noise = test_noise();
  std::vector<Observation> out;
  for (std::size_t l = 0; l < n; ++l) {
    Vector v = uniform_point(dim, 0.0, 4.0, rng);
    const double y = std::sin(v.sum()) + 0.1 * z(rng);
    const double lam = noise(v);
    out.push_back({std::move(v), y, lam});
  }
  return out;
}

BeliefState random_belief(const Kernel& kernel, std::size_t alternatives, std::size_t n, Rng& rng) {
  std::vector<GpPosterior> gps;
  for (std::size_t i = 0; i < alternatives; ++i) {
    auto data = random_data(kernel.dim(), n + i, rng);
    for (auto& obs : data) obs.value += 0.2 * static_cast<double>(i);
    gps.push_back(GpPosterior::from_data(kernel, PriorMean::constant(0.1), std::move(data)));
  }
  return BeliefState(std::move(gps));
}

double relative_gap(const Vector& a, const Vector& b, double floor) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector hi = x;
    Vector lo = x;
    hi[j] += kFdStep;
    lo[j] -= kFdStep;
    g[j] = (f(hi) - f(lo)) / (2.0 * kFdStep);
  }
  return g;
}

PropertyResult finish(std::string name, double worst, double tolerance, const char* label) {
  return {std::move(name), worst <= tolerance, describe(label, worst)};
}

}  // namespace

PropertyResult check_kernel_gradient(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("kernel_gradient")}));
  double worst = 0.0;
  for (int dim : {1, 3}) {
    for (const Kernel& k : test_kernels(dim)) {
      for (int trial = 0; trial < 20; ++trial) {
        const Vector v = uniform_point(dim, 0.0, 3.0, rng);
        const Vector x = uniform_point(dim, 0.0, 3.0, rng);
        const Vector analytic =
            options.kernel_gradient ? options.kernel_gradient(k, v, x) : k.grad_x(v, x);
        const Vector fd = central_difference([&](const Vector& p) { return k(v, p); }, x);
        worst = std::max(worst, relative_gap(analytic, fd, 1e-6));
      }
    }
  }
  return finish("kernel gradient matches finite differences", worst, 1e-5, "max rel err");
}

PropertyResult check_kernel_symmetry_psd(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("kernel_psd")}));
  double asym = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (const Kernel& k : test_kernels(2)) {
    std::vector<Vector> pts;
    for (int l = 0; l < 25; ++l) pts.push_back(uniform_point(2, 0.0, 5.0, rng));
    const Matrix K = k.matrix(pts, pts);
    asym = std::max(asym, (K - K.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff() / k.tau_sq());
  }
  const bool ok = asym == 0.0 && min_eig >= -1e-10;
  return {"kernel Gram matrices are symmetric and PSD", ok,
          describe("asymmetry", asym) + ", " + describe("min eigenvalue", min_eig)};
}

PropertyResult check_batch_vs_sequential(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("batch_sequential")}));
  double worst = 0.0;
  for (std::size_t n : {1u, 5u, 20u}) {
    const Kernel k = test_kernels(2)[n % 3];
    const auto data = random_data(2, n, rng);
    const GpPosterior batch = GpPosterior::from_data(k, PriorMean::constant(0.3), data);
    GpPosterior seq(k, PriorMean::constant(0.3));
    for (const auto& obs : data) seq.update_in_place(obs);
    for (int t = 0; t < 10; ++t) {
      const Vector x = uniform_point(2, 0.0, 4.0, rng);
      const Vector y = uniform_point(2, 0.0, 4.0, rng);
      worst = std::max(worst, std::abs(batch.mean(x) - seq.mean(x)));
      worst = std::max(worst, std::abs(batch.cov(x, y) - seq.cov(x, y)));
    }
  }
  return finish("batch and sequential posteriors agree", worst, 1e-8, "max abs diff");
}

PropertyResult check_variance_monotone(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("variance_monotone")}));
  const Kernel k = test_kernels(2)[0];
  const auto data = random_data(2, 15, rng);
  std::vector<Vector> probes;
  for (int t = 0; t < 20; ++t) probes.push_back(uniform_point(2, 0.0, 4.0, rng));
  GpPosterior gp(k, PriorMean::constant(0.0));
  std::vector<double> previous;
  for (const auto& x : probes) previous.push_back(gp.variance(x));
  double worst = 0.0;
  for (const auto& obs : data) {
    gp.update_in_place(obs);
    for (std::size_t t = 0; t < probes.size(); ++t) {
      const double now = gp.variance(probes[t]);
      worst = std::max(worst, now - previous[t]);
      previous[t] = now;
    }
  }
  return finish("posterior variance never increases", worst, 1e-12, "max increase");
}

PropertyResult check_sigma_tilde_bound(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("sigma_bound")}));
  const ScalarField noise = test_noise();
  double worst = -1.0;
  for (const Kernel& k : test_kernels(2)) {
    const GpPosterior gp = GpPosterior::from_data(k, PriorMean::constant(0.0), random_data(2, 8, rng));
    for (int t = 0; t < 50; ++t) {
      const Vector v = uniform_point(2, 0.0, 4.0, rng);
      const Vector x = uniform_point(2, 0.0, 4.0, rng);
      const double st = std::abs(gp.sigma_tilde(v, x, noise(x)));
      worst = std::max(worst, st - std::sqrt(gp.variance(v)));
    }
  }
  return finish("|sigma_tilde(v, x)| <= posterior sd at v", worst, 1e-12, "max excess");
}

PropertyResult check_sigma_tilde_gradient(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("sigma_gradient")}));
  const ScalarField noise = test_noise();
  double worst = 0.0;
  for (const Kernel& k : test_kernels(2)) {
    const GpPosterior gp = GpPosterior::from_data(k, PriorMean::constant(0.0), random_data(2, 6, rng));
    for (int t = 0; t < 10; ++t) {
      const Vector v = uniform_point(2, 0.0, 4.0, rng);
      const Vector x = uniform_point(2, 0.0, 4.0, rng);
      const Vector fd =
          central_difference([&](const Vector& p) { return gp.sigma_tilde(v, p, noise(p)); }, x);
      const Vector direct = gp.sigma_tilde_grad(v, x, noise(x), noise.gradient(x));
      const Vector ng = noise.gradient(x);
      const Vector cached = gp.innovation(gp.prepare_candidate(x, noise(x), &ng), v).gradient;
      worst = std::max({worst, relative_gap(direct, fd, 1e-6), relative_gap(cached, fd, 1e-6)});
    }
  }
  return finish("sigma_tilde gradient matches finite differences", worst, 1e-5, "max rel err");
}

PropertyResult check_g_func_shape(const SelftestOptions&) {
  bool ok = true;
  std::string detail = "ok";
  auto fail = [&](const std::string& why) {
    if (ok) detail = why;
    ok = false;
  };
  const std::vector<double> grid{0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0};
  for (double t : {0.05, 0.3, 1.0, 3.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double s : grid) {
      const double g = g_func(s, t);
      if (!(g >= 0.0)) fail("negative value");
      if (s / t < 20.0 && !(g > 0.0)) fail("zero away from the tail");
      if (g > prev) fail("not decreasing in s");
      prev = g;
    }
  }
  for (double s : {0.0, 0.2, 1.0}) {
    double prev = 0.0;
    for (double t : {0.01, 0.1, 0.5, 1.0, 4.0}) {
      const double g = g_func(s, t);
      if (g < prev) fail("not increasing in t");
      prev = g;
    }
  }
  if (g_func(1.0, 0.0) != 0.0) fail("g(s, 0) != 0");
  if (std::abs(g_func(0.0, 2.0) - 2.0 * normal::kInvSqrt2Pi) > 1e-15) fail("g(0, t) != t phi(0)");
  if (g_func(100.0, 1.0) > 1e-300) fail("g does not vanish as s grows");
  return {"g_func is positive, decreasing in s, increasing in t, with the right limits", ok,
          detail};
}

PropertyResult check_h_nonnegative(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("h_nonnegative")}));
  const ScalarField noise = test_noise();
  const BeliefState state = random_belief(test_kernels(1)[2], 3, 5, rng);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Vector v = uniform_point(1, 0.0, 6.0, rng);
    const Vector x = uniform_point(1, 0.0, 6.0, rng);
    for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
      worst = std::min(worst, h_integrand(state, i, v, x, noise(x)));
    }
  }
  return {"h integrand is nonnegative", worst >= 0.0, describe("min value", worst)};
}

PropertyResult check_log_vs_naive(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("log_naive")}));
  const ScalarField noise = test_noise();
  const ScalarField cost = location_cost(2, 2);
  double worst = 0.0;
  for (const Kernel& k : test_kernels(2)) {
    const BeliefState state = random_belief(k, 3, 4, rng);
    std::vector<Vector> pts;
    for (int j = 0; j < 200; ++j) pts.push_back(uniform_point(2, 0.0, 4.0, rng));
    const CovariateBatch batch = make_batch(state, pts);
    for (int t = 0; t < 5; ++t) {
      const Vector x = uniform_point(2, 0.0, 4.0, rng);
      for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
        double naive = 0.0;
        for (const auto& v : pts) naive += h_integrand(state, i, v, x, noise(x));
        naive /= static_cast<double>(pts.size()) * cost(x);
        const double logged = std::exp(log_ikg_estimate(state, i, x, batch, noise, cost).log_value);
        worst = std::max(worst, std::abs(logged - naive) / naive);
      }
    }
  }
  return finish("log-domain IKG matches the naive average", worst, 1e-10, "max rel err");
}

PropertyResult check_mills_branches(const SelftestOptions&) {
  const double exact = normal::mills_ratio(20.0);
  const double asym = normal::mills_ratio_asymptotic(20.0);
  const double gap = std::abs(exact - asym) / exact;
  return finish("Mills ratio branches agree at u = 20", gap, 1e-4, "rel err");
}

PropertyResult check_ikg_gradient(const SelftestOptions& options) {
  Rng rng(derive_seed(options.seed, {hash_tag("ikg_gradient")}));
  const ScalarField noise = test_noise();
  const ScalarField cost = location_cost(1, 2);
  double worst = 0.0;
  for (const Kernel& k : test_kernels(2)) {
    const BeliefState state = random_belief(k, 3, 4, rng);
    std::vector<Vector> pts;
    for (int j = 0; j < 50; ++j) pts.push_back(uniform_point(2, 0.0, 4.0, rng));
    const CovariateBatch batch = make_batch(state, pts);
    for (int t = 0; t < 3; ++t) {
      const Vector x = uniform_point(2, 0.5, 3.5, rng);
      for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
        const Vector analytic = ikg_gradient_mean(state, i, batch, x, noise, cost);
        const Vector fd = central_difference(
            [&](const Vector& p) {
              return std::exp(log_ikg_estimate(state, i, p, batch, noise, cost).log_value);
            },
            x);
        worst = std::max(worst, relative_gap(analytic, fd, 1e-8));
      }
    }
  }
  return finish("IKG gradient matches finite differences", worst, 1e-5, "max rel err");
}

std::vector<PropertyResult> run_selftest(const SelftestOptions& options) {
  return {check_kernel_symmetry_psd(options), check_kernel_gradient(options),
          check_batch_vs_sequential(options), check_variance_monotone(options),
          check_sigma_tilde_bound(options),   check_sigma_tilde_gradient(options),
          check_g_func_shape(options),        check_h_nonnegative(options),
          check_log_vs_naive(options),        check_mills_branches(options),
          check_ikg_gradient(options)};
}

}  // namespace ikg
