#include "ikg/problem.hpp"

#include <cmath>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

double griewank_truth(int alternative_number, const Vector& x) {
  const auto d = static_cast<int>(x.size());
  double quad = 0.0;
  double prod = 1.0;
  for (int j = 0; j < d; ++j) {
    quad += x[j] * x[j] / 4000.0;
    prod *= std::cos(x[j] / std::sqrt(static_cast<double>(alternative_number) * (j + 1)));
  }
  return quad - std::pow(1.5, d - 1) * prod;
}

Vector griewank_gradient(int alternative_number, const Vector& x) {
  const auto d = static_cast<int>(x.size());
  const double amp = std::pow(1.5, d - 1);
  Vector g(d);
  for (int j = 0; j < d; ++j) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(alternative_number) * (j + 1));
    double others = 1.0;
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      others *= std::cos(x[k] / std::sqrt(static_cast<double>(alternative_number) * (k + 1)));
    }
    g[j] = x[j] / 2000.0 + amp * scale * std::sin(x[j] * scale) * others;
  }
  return g;
}

ScalarField location_cost(int alternative_number, int dim) {
  const double factor = std::pow(2.0, 3 - alternative_number);
  const double denom = 10.0 * dim;
  return {[factor, denom](const Vector& x) {
            return factor * (1.0 + (x.array() - 5.0).square().sum() / denom);
          },
          [factor, denom](const Vector& x) {
            return (factor * 2.0 * (x.array() - 5.0) / denom).matrix().eval();
          }};
}

std::string Problem::id() const { return spec.name + "_d" + std::to_string(dim()); }

Problem make_problem(const ProblemSpec& spec) {
  if (spec.dim < 1) throw ConfigError("problem.d", "must be at least 1");
  if (spec.num_alternatives < 2) throw ConfigError("problem.M", "must be at least 2");
  if (!(spec.noise > 0.0)) throw ConfigError("problem.noise", "must be positive");
  if (spec.name != "P1" && spec.name != "P2" && spec.name != "P3") {
    throw ConfigError("problem.name", "unknown problem '" + spec.name + "' (expected P1, P2, P3)");
  }
  if (spec.noise_profile != "constant" && spec.noise_profile != "griewank") {
    throw ConfigError("problem.noise_profile", "expected constant or griewank");
  }
  if (spec.noise_model != "known" && spec.noise_model != "estimated") {
    throw ConfigError("problem.noise_model", "expected known or estimated");
  }
  if (spec.cost_model != "truthful" && spec.cost_model != "unit") {
    throw ConfigError("problem.cost_model", "expected truthful or unit");
  }

  BoxDomain domain = [&] {
    try {
      return BoxDomain::cube(spec.dim, spec.lower, spec.upper);
    } catch (const InputError& e) {
      throw ConfigError("problem.domain", e.what());
    }
  }();
  CovariateDensity density =
      spec.name == "P2"
          ? CovariateDensity::truncated_normal(domain, Vector::Zero(spec.dim), spec.density_scale)
          : CovariateDensity::uniform(domain);

  Kernel prior = spec.kernel ? *spec.kernel : Kernel::isotropic_se(spec.dim);
  if (prior.dim() != spec.dim) {
    throw ConfigError("problem.kernel.alpha", "length must equal problem.d");
  }

  Environment env;
  const double amp = std::pow(1.5, spec.dim - 1);
  for (int i = 1; i <= spec.num_alternatives; ++i) {
    env.truth.emplace_back([i](const Vector& x) { return griewank_truth(i, x); });
    if (spec.noise_profile == "constant") {
      env.noise.push_back(ScalarField::constant(spec.noise));
    } else {
      const double scale = spec.noise;
      const double floor = 1e-4 * scale;
      env.noise.push_back(
          {[i, scale, amp, floor](const Vector& x) {
             return std::max(floor, scale * (amp + griewank_truth(i, x)));
           },
           [i, scale, amp, floor](const Vector& x) -> Vector {
             if (scale * (amp + griewank_truth(i, x)) <= floor) return Vector::Zero(x.size());
             return scale * griewank_gradient(i, x);
           }});
    }
    env.cost.push_back(spec.name == "P3" ? location_cost(i, spec.dim) : ScalarField::constant(1.0));
  }
  return Problem{spec, std::move(domain), std::move(density), std::move(env), std::move(prior)};
}

BeliefState prior_belief(const Problem& problem) {
  std::vector<GpPosterior> posteriors;
  for (std::size_t i = 0; i < problem.num_alternatives(); ++i) {
    posteriors.emplace_back(problem.prior_kernel, PriorMean::constant(problem.spec.prior_mean),
                            GpOptions{problem.spec.jitter});
  }
  return BeliefState(std::move(posteriors));
}

double estimate_oc(const BeliefState& state, const Problem& problem,
                   std::span<const Vector> eval_points) {
  if (eval_points.empty()) throw InputError("estimate_oc needs at least one evaluation point");
  double total = 0.0;
  for (const Vector& x : eval_points) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& theta : problem.env.truth) best = std::max(best, theta(x));
    const std::size_t chosen = learned_decision_rule(state, x);
    total += best - problem.env.truth[chosen](x);
  }
  return total / static_cast<double>(eval_points.size());
}

}  // namespace ikg
