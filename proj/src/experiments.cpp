#include "ikg/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ikg/errors.hpp"
#include "ikg/variance_model.hpp"

namespace ikg {

namespace {

constexpr double kZ99 = 2.5758293035489004;

constexpr std::uint64_t kDecideStream = hash_tag("decide");
constexpr std::uint64_t kObservationStream = hash_tag("obs");
constexpr std::uint64_t kOcStream = hash_tag("oc");
constexpr std::uint64_t kVarianceStream = hash_tag("variance");

std::string format_number(double v, const char* fmt = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::vector<double> budget_grid(const BudgetSpec& spec) {
  if (!spec.grid.empty()) return spec.grid;
  std::vector<double> grid;
  for (int k = 1; k <= spec.grid_points; ++k) {
    grid.push_back(spec.budget * k / spec.grid_points);
  }
  return grid;
}

std::size_t oc_points(const ExperimentConfig& config) {
  if (config.budget.oc_points) return *config.budget.oc_points;
  const auto d = static_cast<std::size_t>(config.problem.dim);
  return 1000 * d * d;
}

std::string policy_label(const PolicySpec& spec) {
  if (spec.name == "bse") return "bse_m" + std::to_string(spec.bse_bins);
  return spec.name;
}

PolicyContext make_context(const Problem& problem, const ExperimentConfig& config,
                           std::uint64_t decision_seed,
                           std::optional<std::vector<ScalarField>> noise) {
  std::vector<ScalarField> cost;
  for (std::size_t i = 0; i < problem.num_alternatives(); ++i) {
    cost.push_back(config.problem.cost_model == "unit" ? ScalarField::constant(1.0)
                                                       : problem.env.cost[i]);
  }
  return PolicyContext{problem.domain,
                       problem.density,
                       noise ? std::move(*noise) : problem.env.noise,
                       std::move(cost),
                       config.sga,
                       config.saa_batch,
                       decision_seed,
                       config.common_sga_streams};
}

ReplicationResult run_replication(const Problem& problem, const ExperimentConfig& config,
                                  const PolicySpec& policy_spec, std::size_t replication) {
  const std::string label = policy_label(policy_spec);
  const std::uint64_t problem_key = hash_tag(problem.id());
  const std::uint64_t policy_key = hash_tag(label);

  std::optional<std::vector<ScalarField>> noise;
  if (config.problem.noise_model == "estimated") {
    Rng vrng = make_stream(config.seed, {problem_key, replication, kVarianceStream});
    const auto& settings = config.problem.variance;
    auto design = latin_hypercube(settings.design_points, problem.domain, vrng, settings.centered);
    noise.emplace();
    for (std::size_t i = 0; i < problem.num_alternatives(); ++i) {
      noise->push_back(
          fit_variance_model(design, settings.replications, problem, i, vrng, settings.floor)
              .as_field());
    }
  }

  const PolicyContext ctx = make_context(
      problem, config,
      derive_seed(config.seed, {problem_key, policy_key, replication, kDecideStream}),
      std::move(noise));
  auto policy = make_policy(policy_spec, ctx, problem.num_alternatives(), config.budget.budget);
  BeliefState state = prior_belief(problem);
  Rng obs_rng = make_stream(config.seed, {problem_key, policy_key, replication, kObservationStream});

  const std::vector<double> grid = budget_grid(config.budget);
  const std::size_t eval_count = oc_points(config);
  ReplicationResult out;
  std::size_t grid_index = 0;
  auto on_checkpoint = [&](const Checkpoint& cp, const BeliefState& belief) {
    Rng eval_rng = make_stream(config.seed, {problem_key, replication, grid_index, kOcStream});
    const auto points = problem.density.sample(eval_count, eval_rng);
    ResultRow row;
    row.problem = problem.spec.name;
    row.policy = label;
    row.dim = problem.dim();
    row.replication = replication;
    row.budget = cp.budget_point;
    row.oc = estimate_oc(belief, problem, points);
    row.wall_ms = config.output.timing ? cp.wall_ms : 0.0;
    row.n_samples = cp.n_samples;
    out.rows.push_back(std::move(row));
    out.final_counts.push_back(cp.sample_counts);
    ++grid_index;
  };
  const BudgetRun run = run_budget_loop(*policy, problem.env, ctx, state, config.budget.budget,
                                        grid, obs_rng, on_checkpoint);
  out.spent = run.spent;
  out.decisions = run.decisions.size();
  out.last_cost = run.decisions.empty() ? 0.0 : run.decisions.back().cost;
  if (config.output.timing) {
    for (std::size_t k = 0; k < run.decisions.size(); ++k) {
      out.timings.push_back({label, replication, k, run.decisions[k].wall_ms});
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.policy, r.budget);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back({r.problem, r.policy, r.dim, r.budget, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(r.oc);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& v = values[k];
    double sum = 0.0;
    for (double x : v) sum += x;
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[k].mean_oc = mean;
    out[k].replications = v.size();
    out[k].half_width = v.size() > 1 ? kZ99 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int workers,
                                const ProgressFn& progress) {
  const Problem problem = make_problem(config.problem);
  struct Job {
    std::size_t policy;
    std::size_t replication;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < config.policies.size(); ++p) {
    for (std::size_t l = 1; l <= config.budget.replications; ++l) jobs.push_back({p, l});
  }
  std::vector<std::optional<ReplicationResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const auto& spec = config.policies[jobs[k].policy];
      try {
        results[k] = run_replication(problem, config, spec, jobs[k].replication);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(policy_label(spec), jobs[k].replication);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  ExperimentResult out;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (results[k]) {
      out.rows.insert(out.rows.end(), results[k]->rows.begin(), results[k]->rows.end());
      out.timings.insert(out.timings.end(), results[k]->timings.begin(), results[k]->timings.end());
    } else {
      out.failures.push_back(
          {policy_label(config.policies[jobs[k].policy]), jobs[k].replication, errors[k]});
    }
  }
  out.summary = summarize(out.rows);
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "problem,policy,d,replication,budget,oc,wall_ms,n_samples\n";
  for (const auto& r : rows) {
    os << r.problem << ',' << r.policy << ',' << r.dim << ',' << r.replication << ','
       << format_number(r.budget) << ',' << format_number(r.oc) << ','
       << format_number(r.wall_ms, "%.3f") << ',' << r.n_samples << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "problem,policy,d,budget,mean_oc,ci99_low,ci99_high,replications\n";
  for (const auto& r : rows) {
    os << r.problem << ',' << r.policy << ',' << r.dim << ',' << format_number(r.budget) << ','
       << format_number(r.mean_oc) << ',' << format_number(r.mean_oc - r.half_width) << ','
       << format_number(r.mean_oc + r.half_width) << ',' << r.replications << '\n';
  }
  return os.str();
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  os << "policy,replication,decision,wall_ms\n";
  for (const auto& r : rows) {
    os << r.policy << ',' << r.replication << ',' << r.decision << ','
       << format_number(r.wall_ms, "%.3f") << '\n';
  }
  return os.str();
}

}  // namespace ikg
