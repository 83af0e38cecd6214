#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ikg/domain.hpp"
#include "ikg/rng.hpp"
#include "ikg/types.hpp"

namespace ikg {

/*
  Projected mini-batch stochastic gradient ascent

    x_{k+1} = Proj[x_k + b_k g(x_k)],   b_k = step_scale / k^step_exponent,

  for k = 1..K, reporting the Polyak-Ruppert average of x_{K0}..x_{K+1}.
  step_exponent must lie in (0.5, 1] so that sum b_k diverges and sum b_k^2
  converges. max_iters = 0 is accepted and returns the initial point.
*/
struct SgaConfig {
  int max_iters = 100;
  int averaging_start = 25;
  double step_scale = 200.0;
  double step_exponent = 0.7;
  int batch_size = 20;
  // Starting point; drawn uniformly from the box when empty.
  std::optional<Vector> init;
  bool keep_trace = false;

  // K = 100d, K0 = floor(K/4), b_k = 200d / k^0.7, m = 20d.
  static SgaConfig defaults_for_dim(int dim);

  void validate() const;
  double step(int k) const;
};

struct SgaResult {
  Vector solution;
  Vector init_point;
  std::vector<Vector> iterate_trace;  // x_1..x_{K+1} when keep_trace is set
};

// Returns the mini-batch mean gradient at x; draws its own integration points
// from the supplied stream.
using GradientOracle = std::function<Vector(const Vector& x, Rng& rng)>;

SgaResult optimize(const GradientOracle& grad, const BoxDomain& domain, const SgaConfig& cfg,
                   Rng& rng);

// Deterministic objective with gradient, for the pure-SAA comparison mode.
struct SaaObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct SaaOptions {
  int multistart = 1;
  // First start; the remaining starts are uniform over the box.
  std::optional<Vector> init;
  int max_iters = 200;
  double initial_step = 1.0;
  double armijo = 1e-4;
  int max_halvings = 50;
  double tolerance = 1e-10;
};

struct SaaResult {
  Vector solution;
  double value = 0.0;
};

// Multistart projected gradient ascent with Armijo backtracking by halving.
// Starts are drawn in a fixed order, so more starts never give a worse result.
SaaResult optimize_saa(const SaaObjective& objective, const BoxDomain& domain,
                       const SaaOptions& options, Rng& rng);

}  // namespace ikg
