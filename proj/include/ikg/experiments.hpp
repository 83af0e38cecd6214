#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ikg/policies.hpp"
#include "ikg/problem.hpp"
#include "ikg/sga.hpp"

namespace ikg {

struct BudgetSpec {
  double budget = 100.0;
  std::vector<double> grid;  // explicit grid; {B/10, 2B/10, ..., B} when empty
  int grid_points = 10;
  std::size_t replications = 30;
  std::optional<std::size_t> oc_points;  // J'; 1000 d^2 when empty
};

struct OutputSpec {
  std::string dir = "out";
  // Wall-clock columns make the results nondeterministic, so they are opt-in.
  bool timing = false;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<PolicySpec> policies{PolicySpec{}};
  SgaConfig sga = SgaConfig::defaults_for_dim(1);
  bool common_sga_streams = false;
  std::size_t saa_batch = 500;  // J
  BudgetSpec budget;
  OutputSpec output;
  std::uint64_t seed = 1;
};

std::vector<double> budget_grid(const BudgetSpec& spec);
std::size_t oc_points(const ExperimentConfig& config);
std::string policy_label(const PolicySpec& spec);

struct ResultRow {
  std::string problem;
  std::string policy;
  int dim = 0;
  std::size_t replication = 0;
  double budget = 0.0;
  double oc = 0.0;
  double wall_ms = 0.0;
  std::size_t n_samples = 0;
};

struct SummaryRow {
  std::string problem;
  std::string policy;
  int dim = 0;
  double budget = 0.0;
  double mean_oc = 0.0;
  double half_width = 0.0;  // 99% normal-approximation band
  std::size_t replications = 0;
};

struct ReplicationFailure {
  std::string policy;
  std::size_t replication = 0;
  std::string message;
};

struct TimingRow {
  std::string policy;
  std::size_t replication = 0;
  std::size_t decision = 0;
  double wall_ms = 0.0;
};

struct ReplicationResult {
  std::vector<ResultRow> rows;
  std::vector<TimingRow> timings;
  std::vector<std::vector<std::size_t>> final_counts;  // per checkpoint
  double spent = 0.0;
  double last_cost = 0.0;
  std::size_t decisions = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<ReplicationFailure> failures;
  std::vector<TimingRow> timings;
};

// Build the policy context a replication uses. `noise` overrides the
// problem's true noise when the policy works with an estimate.
PolicyContext make_context(const Problem& problem, const ExperimentConfig& config,
                           std::uint64_t decision_seed,
                           std::optional<std::vector<ScalarField>> noise = std::nullopt);

// One (policy, replication) run through the budget grid. Replication numbers
// start at 1 and the result depends only on (config, seed, policy, replication).
ReplicationResult run_replication(const Problem& problem, const ExperimentConfig& config,
                                  const PolicySpec& policy, std::size_t replication);

using ProgressFn = std::function<void(const std::string& policy, std::size_t replication)>;

// Every (policy, replication) job, scheduled over `workers` threads. Output
// order is fixed regardless of the worker count. Failed replications are
// reported and the rest continue.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1,
                                const ProgressFn& progress = {});

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

// "problem,policy,d,replication,budget,oc,wall_ms,n_samples"
std::string results_csv(const std::vector<ResultRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string timing_csv(const std::vector<TimingRow>& rows);

}  // namespace ikg
