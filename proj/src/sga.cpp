#include "ikg/sga.hpp"

#include <cmath>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

SgaConfig SgaConfig::defaults_for_dim(int dim) {
  SgaConfig cfg;
  cfg.max_iters = 100 * dim;
  cfg.averaging_start = std::max(1, cfg.max_iters / 4);
  cfg.step_scale = 200.0 * dim;
  cfg.step_exponent = 0.7;
  cfg.batch_size = 20 * dim;
  return cfg;
}

void SgaConfig::validate() const {
  if (max_iters < 0) throw ConfigError("sga.K", "must be nonnegative");
  if (max_iters > 0 && (averaging_start < 1 || averaging_start > max_iters)) {
    throw ConfigError("sga.K0", "must lie in [1, K]");
  }
  if (!(step_scale > 0.0) || !std::isfinite(step_scale)) {
    throw ConfigError("sga.step_scale", "must be positive");
  }
  if (!(step_exponent > 0.5 && step_exponent <= 1.0)) {
    throw ConfigError("sga.step_exponent", "must lie in (0.5, 1]");
  }
  if (batch_size < 1) throw ConfigError("sga.batch_size", "must be at least 1");
}

double SgaConfig::step(int k) const {
  return step_scale / std::pow(static_cast<double>(k), step_exponent);
}

SgaResult optimize(const GradientOracle& grad, const BoxDomain& domain, const SgaConfig& cfg,
                   Rng& rng) {
  cfg.validate();
  SgaResult result;
  if (cfg.init) {
    if (cfg.init->size() != domain.dim()) throw InputError("SGA init dimension mismatch");
    result.init_point = domain.project(*cfg.init);
  } else {
    result.init_point = domain.sample_uniform(rng);
  }
  if (cfg.keep_trace) result.iterate_trace.push_back(result.init_point);
  if (cfg.max_iters == 0) {
    result.solution = result.init_point;
    return result;
  }

  Vector x = result.init_point;
  Vector sum = Vector::Zero(domain.dim());
  int averaged = 0;
  if (cfg.averaging_start == 1) {
    sum += x;
    ++averaged;
  }
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vector g = grad(x, rng);
    if (g.size() != domain.dim() || !g.allFinite()) {
      throw NumericalError("non-finite SGA gradient at iteration " + std::to_string(k));
    }
    x = domain.project(x + cfg.step(k) * g);
    if (cfg.keep_trace) result.iterate_trace.push_back(x);
    // x now holds x_{k+1}.
    if (k + 1 >= cfg.averaging_start) {
      sum += x;
      ++averaged;
    }
  }
  result.solution = domain.project(sum / static_cast<double>(averaged));
  return result;
}

namespace {

SaaResult ascend(const SaaObjective& objective, const BoxDomain& domain, const SaaOptions& options,
                 Vector x) {
  double fx = objective.value(x);
  for (int it = 0; it < options.max_iters; ++it) {
    const Vector g = objective.gradient(x);
    if (!g.allFinite() || g.squaredNorm() == 0.0) break;
    double t = options.initial_step;
    bool accepted = false;
    Vector candidate;
    double fc = 0.0;
    for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
      candidate = domain.project(x + t * g);
      fc = objective.value(candidate);
      if (fc >= fx + options.armijo * g.dot(candidate - x) && fc >= fx) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = (candidate - x).norm();
    x = candidate;
    fx = fc;
    if (moved < options.tolerance) break;
  }
  return {x, fx};
}

}  // namespace

SaaResult optimize_saa(const SaaObjective& objective, const BoxDomain& domain,
                       const SaaOptions& options, Rng& rng) {
  if (options.multistart < 1) throw InputError("multistart must be at least 1");
  SaaResult best;
  bool have = false;
  for (int s = 0; s < options.multistart; ++s) {
    Vector start = (s == 0 && options.init) ? domain.project(*options.init)
                                            : domain.sample_uniform(rng);
    SaaResult r = ascend(objective, domain, options, std::move(start));
    if (!have || r.value > best.value) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace ikg
