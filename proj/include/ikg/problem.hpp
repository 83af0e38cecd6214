#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ikg/belief_state.hpp"
#include "ikg/domain.hpp"
#include "ikg/kernel.hpp"
#include "ikg/policies.hpp"

namespace ikg {

// theta_i(x) = sum_j x_j^2 / 4000 - 1.5^{d-1} prod_j cos(x_j / sqrt(i j)),
// with i the 1-based alternative number and j the 1-based coordinate.
double griewank_truth(int alternative_number, const Vector& x);
Vector griewank_gradient(int alternative_number, const Vector& x);

// c_i(x) = 2^{3-i} (1 + ||x - 5||^2 / (10 d)), i 1-based.
ScalarField location_cost(int alternative_number, int dim);

struct KrigingSettings {
  std::size_t design_points = 10;
  std::size_t replications = 50;
  bool centered = true;
  double floor = 1e-6;
};

struct ProblemSpec {
  std::string name = "P1";  // P1 uniform, P2 truncated normal, P3 uniform + location cost
  int dim = 1;
  int num_alternatives = 5;
  double noise = 0.01;
  std::string noise_profile = "constant";  // or "griewank": noise * (1.5^{d-1} + theta_i(x))
  std::string noise_model = "known";       // or "estimated" (kriged sample variances)
  std::string cost_model = "truthful";     // or "unit": policy assumes c = 1
  KrigingSettings variance;
  double density_scale = 4.0;
  double lower = 0.0;
  double upper = 10.0;
  std::optional<Kernel> kernel;  // prior; exp(-||x - x'||^2 / d) when empty
  double prior_mean = 0.0;
  double jitter = 0.0;
};

struct Problem {
  ProblemSpec spec;
  BoxDomain domain;
  CovariateDensity density;
  Environment env;
  Kernel prior_kernel;

  std::size_t num_alternatives() const noexcept { return env.truth.size(); }
  int dim() const noexcept { return domain.dim(); }
  std::string id() const;
};

Problem make_problem(const ProblemSpec& spec);

BeliefState prior_belief(const Problem& problem);

// Average gap between the best true value and the true value of the
// alternative picked by the learned rule, over the supplied points.
double estimate_oc(const BeliefState& state, const Problem& problem,
                   std::span<const Vector> eval_points);

}  // namespace ikg
