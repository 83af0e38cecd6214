#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ikg/acquisition.hpp"
#include "ikg/belief_state.hpp"
#include "ikg/domain.hpp"
#include "ikg/sga.hpp"

namespace ikg {

struct SamplingDecision {
  std::size_t alternative = 0;  // 0-based
  Vector location;
};

// What a policy knows about the problem. Noise and cost are the policy's
// beliefs, which may differ from the ground truth charged by the ledger.
struct PolicyContext {
  BoxDomain domain;
  CovariateDensity density;
  std::vector<ScalarField> noise;
  std::vector<ScalarField> cost;
  SgaConfig sga;
  std::size_t saa_batch = 500;  // J
  std::uint64_t seed = 0;       // decision streams derive from (seed, step, ...)
  // Give every alternative the same SGA stream instead of one stream each, so
  // alternatives with identical beliefs get identical candidates.
  bool common_sga_streams = false;
};

struct IkgDiagnostics {
  std::vector<Vector> candidates;   // optimized location per alternative
  std::vector<Vector> init_points;  // SGA starting point per alternative
  std::vector<double> log_values;   // log-IKG at each candidate (shared batch)
};

struct IkgDecision {
  SamplingDecision decision;
  IkgDiagnostics diagnostics;
};

// Lowest index among the maxima; -inf entries never win unless all are -inf.
std::size_t argmax_lowest(const std::vector<double>& values);

// SGA on each alternative, then one shared SAA comparison of the candidates.
IkgDecision ikg_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step);
// Same comparison, but at the SGA starting points instead of the optimized ones.
IkgDecision ikgwrc_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step);

struct SaaModeOptions {
  std::size_t sample_size = 500;  // N_saa, frozen per alternative and decision
  int multistart = 1;
};
// Pure-SAA variant: step (i) is a deterministic optimization of a frozen batch.
IkgDecision ikg_saa_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step,
                           const SaaModeOptions& options);

SamplingDecision prs_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step);

/*
  Binned successive elimination. The box is cut into m equal slabs per
  coordinate; each bin keeps its own active set and sample means. Within a
  bin the active arm with the fewest local samples is pulled (lowest index on
  ties), and arm i is dropped when

    max_j mean_j - mean_i > threshold_scale * sqrt(2 log(B M) / T_i).

  The bin's best arm is never dropped, so active sets stay nonempty.
*/
class BseState {
 public:
  BseState(BoxDomain domain, std::size_t num_alternatives, int bins_per_dim, double budget,
           double threshold_scale = 2.0);

  std::size_t bin_index(const Vector& x) const;
  std::size_t choose(const Vector& x) const;
  void observe(const Vector& x, std::size_t arm, double y);

  bool is_active(std::size_t bin, std::size_t arm) const;
  std::size_t count(std::size_t bin, std::size_t arm) const;
  double confidence_radius(std::size_t samples) const;

 private:
  struct Bin {
    std::vector<bool> active;
    std::vector<std::size_t> counts;
    std::vector<double> sums;
  };
  Bin& bin_at(std::size_t index);
  const Bin* find_bin(std::size_t index) const;

  BoxDomain domain_;
  std::size_t num_alternatives_;
  int bins_per_dim_;
  double budget_;
  double threshold_scale_;
  std::map<std::size_t, Bin> bins_;
};

SamplingDecision bse_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step,
                            const BseState& bse);

// argmax_i mu_i(x), lowest index on ties.
std::size_t learned_decision_rule(const BeliefState& state, const Vector& x);

// Policy object used by the budget loop.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view id() const = 0;
  virtual SamplingDecision decide(const BeliefState& state, const PolicyContext& ctx,
                                  std::size_t step) = 0;
  virtual void observe(const SamplingDecision&, double /*y*/) {}
};

struct PolicySpec {
  std::string name = "ikg";  // ikg, ikgwrc, bse, prs, ikg_saa
  int bse_bins = 2;
  double bse_threshold_scale = 2.0;
  SaaModeOptions saa;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const PolicyContext& ctx,
                                    std::size_t num_alternatives, double budget);

// Ground truth seen by the budget loop.
struct Environment {
  std::vector<std::function<double(const Vector&)>> truth;
  std::vector<ScalarField> noise;  // true sampling variance
  std::vector<ScalarField> cost;   // true sampling cost
};

struct DecisionRecord {
  SamplingDecision decision;
  double observation = 0.0;
  double cost = 0.0;
  double wall_ms = 0.0;
};

struct Checkpoint {
  double budget_point = 0.0;
  std::size_t n_samples = 0;
  double spent = 0.0;
  double wall_ms = 0.0;  // cumulative decision time
  std::vector<std::size_t> sample_counts;
};

struct BudgetRun {
  std::vector<DecisionRecord> decisions;
  std::vector<Checkpoint> checkpoints;
  double spent = 0.0;
};

/*
  Sampling continues while the cumulative charged cost is below B; the sample
  that brings it to B or beyond is taken and paid for. With unit costs and
  integer B that is exactly B samples. A checkpoint fires the first time the spend
  reaches each grid point, after the belief has absorbed that sample.
*/
BudgetRun run_budget_loop(Policy& policy, const Environment& env, const PolicyContext& ctx,
                          BeliefState& state, double budget, std::vector<double> grid,
                          Rng& observation_rng,
                          const std::function<void(const Checkpoint&, const BeliefState&)>&
                              on_checkpoint = {});

}  // namespace ikg
