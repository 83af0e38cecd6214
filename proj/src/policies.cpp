#include "ikg/policies.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

namespace {

constexpr std::uint64_t kSgaStream = hash_tag("sga");
constexpr std::uint64_t kCompareStream = hash_tag("compare");
constexpr std::uint64_t kPrsStream = hash_tag("prs");
constexpr std::uint64_t kBseStream = hash_tag("bse");
constexpr std::uint64_t kSaaStream = hash_tag("saa");

Rng sga_stream(const PolicyContext& ctx, std::size_t step, std::size_t i) {
  if (ctx.common_sga_streams) return make_stream(ctx.seed, {step, kSgaStream});
  return make_stream(ctx.seed, {step, i, kSgaStream});
}

void check_context(const BeliefState& state, const PolicyContext& ctx) {
  const std::size_t m = state.num_alternatives();
  if (ctx.noise.size() != m || ctx.cost.size() != m) {
    throw InputError("policy context needs one noise and one cost function per alternative");
  }
  if (ctx.domain.dim() != state.dim()) throw InputError("domain dimension mismatch");
  if (ctx.saa_batch < 1) throw InputError("saa batch size J must be at least 1");
}

// Step (ii): one shared batch, one log-IKG per candidate.
IkgDecision compare_candidates(const BeliefState& state, const PolicyContext& ctx,
                               std::size_t step, IkgDiagnostics diag) {
  Rng rng = make_stream(ctx.seed, {step, kCompareStream});
  const CovariateBatch batch = make_batch(state, ctx.density.sample(ctx.saa_batch, rng));
  diag.log_values.resize(state.num_alternatives());
  for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
    diag.log_values[i] =
        log_ikg_estimate(state, i, diag.candidates[i], batch, ctx.noise[i], ctx.cost[i]).log_value;
  }
  bool any_finite = false;
  for (double v : diag.log_values) any_finite = any_finite || v > -std::numeric_limits<double>::infinity();
  if (!any_finite) {
    throw DegenerateStateError("every alternative has log-IKG = -inf; cannot rank");
  }
  IkgDecision out;
  out.decision.alternative = argmax_lowest(diag.log_values);
  out.decision.location = diag.candidates[out.decision.alternative];
  out.diagnostics = std::move(diag);
  return out;
}

GradientOracle ikg_oracle(const BeliefState& state, const PolicyContext& ctx, std::size_t i) {
  return [&state, &ctx, i](const Vector& x, Rng& rng) {
    const CovariateBatch batch =
        make_batch(state, ctx.density.sample(static_cast<std::size_t>(ctx.sga.batch_size), rng));
    return ikg_gradient_mean(state, i, batch, x, ctx.noise[i], ctx.cost[i]);
  };
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

std::size_t argmax_lowest(const std::vector<double>& values) {
  if (values.empty()) throw InputError("argmax of an empty list");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

IkgDecision ikg_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step) {
  check_context(state, ctx);
  IkgDiagnostics diag;
  for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
    Rng rng = sga_stream(ctx, step, i);
    const SgaResult res = optimize(ikg_oracle(state, ctx, i), ctx.domain, ctx.sga, rng);
    diag.candidates.push_back(res.solution);
    diag.init_points.push_back(res.init_point);
  }
  return compare_candidates(state, ctx, step, std::move(diag));
}

IkgDecision ikgwrc_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step) {
  check_context(state, ctx);
  IkgDiagnostics diag;
  for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
    // The starting point ikg_decide would use: the first draw of its stream.
    Rng rng = sga_stream(ctx, step, i);
    Vector init = ctx.sga.init ? ctx.domain.project(*ctx.sga.init) : ctx.domain.sample_uniform(rng);
    diag.init_points.push_back(init);
    diag.candidates.push_back(std::move(init));
  }
  return compare_candidates(state, ctx, step, std::move(diag));
}

IkgDecision ikg_saa_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step,
                           const SaaModeOptions& options) {
  check_context(state, ctx);
  if (options.sample_size < 1) throw InputError("SAA sample size must be at least 1");
  IkgDiagnostics diag;
  for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
    Rng rng = make_stream(ctx.seed, {step, i, kSaaStream});
    const CovariateBatch batch = make_batch(state, ctx.density.sample(options.sample_size, rng));
    // Maximize the log of the frozen estimate; same maximizer, better scaled.
    SaaObjective objective;
    objective.value = [&](const Vector& x) {
      return log_ikg_estimate(state, i, x, batch, ctx.noise[i], ctx.cost[i]).log_value;
    };
    objective.gradient = [&](const Vector& x) -> Vector {
      const AcquisitionSample s =
          log_ikg_estimate(state, i, x, batch, ctx.noise[i], ctx.cost[i], true);
      const double value = std::exp(s.log_value);
      if (!(value > 0.0)) return Vector::Zero(x.size());
      return *s.gradient / value;
    };
    SaaOptions opt;
    opt.multistart = options.multistart;
    opt.init = ctx.domain.sample_uniform(rng);
    diag.init_points.push_back(*opt.init);
    diag.candidates.push_back(optimize_saa(objective, ctx.domain, opt, rng).solution);
  }
  return compare_candidates(state, ctx, step, std::move(diag));
}

SamplingDecision prs_decide(const BeliefState& state, const PolicyContext& ctx, std::size_t step) {
  Rng rng = make_stream(ctx.seed, {step, kPrsStream});
  std::uniform_int_distribution<std::size_t> pick(0, state.num_alternatives() - 1);
  SamplingDecision d;
  d.alternative = pick(rng);
  d.location = ctx.domain.sample_uniform(rng);
  return d;
}

BseState::BseState(BoxDomain domain, std::size_t num_alternatives, int bins_per_dim, double budget,
                   double threshold_scale)
    : domain_(std::move(domain)),
      num_alternatives_(num_alternatives),
      bins_per_dim_(bins_per_dim),
      budget_(budget),
      threshold_scale_(threshold_scale) {
  if (num_alternatives_ < 2) throw InputError("BSE needs at least two arms");
  if (bins_per_dim_ < 1) throw ConfigError("policy.bse.m", "must be at least 1");
  if (!(budget_ > 0.0)) throw InputError("BSE budget must be positive");
  if (!(threshold_scale_ > 0.0)) throw ConfigError("policy.bse.threshold_scale", "must be positive");
  const double total = std::pow(static_cast<double>(bins_per_dim_), domain_.dim());
  if (total > 1e15) throw ConfigError("policy.bse.m", "too many bins for this dimension");
}

std::size_t BseState::bin_index(const Vector& x) const {
  if (x.size() != domain_.dim()) throw InputError("BSE point dimension mismatch");
  std::size_t index = 0;
  for (int j = 0; j < domain_.dim(); ++j) {
    const double lo = domain_.lower()[j];
    const double hi = domain_.upper()[j];
    const double scaled = bins_per_dim_ * (x[j] - lo) / (hi - lo);
    auto b = static_cast<long long>(std::floor(scaled));
    b = std::clamp<long long>(b, 0, bins_per_dim_ - 1);
    index = index * static_cast<std::size_t>(bins_per_dim_) + static_cast<std::size_t>(b);
  }
  return index;
}

BseState::Bin& BseState::bin_at(std::size_t index) {
  auto [it, inserted] = bins_.try_emplace(index);
  if (inserted) {
    it->second.active.assign(num_alternatives_, true);
    it->second.counts.assign(num_alternatives_, 0);
    it->second.sums.assign(num_alternatives_, 0.0);
  }
  return it->second;
}

const BseState::Bin* BseState::find_bin(std::size_t index) const {
  auto it = bins_.find(index);
  return it == bins_.end() ? nullptr : &it->second;
}

std::size_t BseState::choose(const Vector& x) const {
  const Bin* bin = find_bin(bin_index(x));
  if (bin == nullptr) return 0;
  std::size_t best = num_alternatives_;
  for (std::size_t a = 0; a < num_alternatives_; ++a) {
    if (!bin->active[a]) continue;
    if (best == num_alternatives_ || bin->counts[a] < bin->counts[best]) best = a;
  }
  if (best == num_alternatives_) throw NumericalError("BSE bin has an empty active set");
  return best;
}

double BseState::confidence_radius(std::size_t samples) const {
  return std::sqrt(2.0 * std::log(budget_ * static_cast<double>(num_alternatives_)) /
                   static_cast<double>(samples));
}

void BseState::observe(const Vector& x, std::size_t arm, double y) {
  if (arm >= num_alternatives_) throw InputError("BSE arm out of range");
  Bin& bin = bin_at(bin_index(x));
  bin.counts[arm] += 1;
  bin.sums[arm] += y;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < num_alternatives_; ++a) {
    if (bin.active[a] && bin.counts[a] > 0) {
      best_mean = std::max(best_mean, bin.sums[a] / static_cast<double>(bin.counts[a]));
    }
  }
  for (std::size_t a = 0; a < num_alternatives_; ++a) {
    if (!bin.active[a] || bin.counts[a] == 0) continue;
    const double mean = bin.sums[a] / static_cast<double>(bin.counts[a]);
    if (best_mean - mean > threshold_scale_ * confidence_radius(bin.counts[a])) {
      bin.active[a] = false;
    }
  }
}

bool BseState::is_active(std::size_t bin, std::size_t arm) const {
  const Bin* b = find_bin(bin);
  return b == nullptr || b->active.at(arm);
}

std::size_t BseState::count(std::size_t bin, std::size_t arm) const {
  const Bin* b = find_bin(bin);
  return b == nullptr ? 0 : b->counts.at(arm);
}

SamplingDecision bse_decide(const BeliefState& /*state*/, const PolicyContext& ctx,
                            std::size_t step, const BseState& bse) {
  Rng rng = make_stream(ctx.seed, {step, kBseStream});
  SamplingDecision d;
  d.location = ctx.domain.sample_uniform(rng);
  d.alternative = bse.choose(d.location);
  return d;
}

std::size_t learned_decision_rule(const BeliefState& state, const Vector& x) {
  const Vector mu = state.means(x);
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < mu.size(); ++a) {
    if (mu[a] > mu[best]) best = a;
  }
  return static_cast<std::size_t>(best);
}

namespace {

class IkgPolicy final : public Policy {
 public:
  std::string_view id() const override { return "ikg"; }
  SamplingDecision decide(const BeliefState& s, const PolicyContext& c, std::size_t n) override {
    return ikg_decide(s, c, n).decision;
  }
};

class IkgwrcPolicy final : public Policy {
 public:
  std::string_view id() const override { return "ikgwrc"; }
  SamplingDecision decide(const BeliefState& s, const PolicyContext& c, std::size_t n) override {
    return ikgwrc_decide(s, c, n).decision;
  }
};

class IkgSaaPolicy final : public Policy {
 public:
  explicit IkgSaaPolicy(SaaModeOptions options) : options_(options) {}
  std::string_view id() const override { return "ikg_saa"; }
  SamplingDecision decide(const BeliefState& s, const PolicyContext& c, std::size_t n) override {
    return ikg_saa_decide(s, c, n, options_).decision;
  }

 private:
  SaaModeOptions options_;
};

class PrsPolicy final : public Policy {
 public:
  std::string_view id() const override { return "prs"; }
  SamplingDecision decide(const BeliefState& s, const PolicyContext& c, std::size_t n) override {
    return prs_decide(s, c, n);
  }
};

class BsePolicy final : public Policy {
 public:
  explicit BsePolicy(BseState state) : bse_(std::move(state)) {}
  std::string_view id() const override { return "bse"; }
  SamplingDecision decide(const BeliefState& s, const PolicyContext& c, std::size_t n) override {
    return bse_decide(s, c, n, bse_);
  }
  void observe(const SamplingDecision& d, double y) override {
    bse_.observe(d.location, d.alternative, y);
  }

 private:
  BseState bse_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const PolicyContext& ctx,
                                    std::size_t num_alternatives, double budget) {
  if (spec.name == "ikg") return std::make_unique<IkgPolicy>();
  if (spec.name == "ikgwrc") return std::make_unique<IkgwrcPolicy>();
  if (spec.name == "ikg_saa") return std::make_unique<IkgSaaPolicy>(spec.saa);
  if (spec.name == "prs") return std::make_unique<PrsPolicy>();
  if (spec.name == "bse") {
    return std::make_unique<BsePolicy>(BseState(ctx.domain, num_alternatives, spec.bse_bins, budget,
                                                spec.bse_threshold_scale));
  }
  throw ConfigError("policy.name", "unknown policy '" + spec.name + "'");
}

BudgetRun run_budget_loop(Policy& policy, const Environment& env, const PolicyContext& ctx,
                          BeliefState& state, double budget, std::vector<double> grid,
                          Rng& observation_rng,
                          const std::function<void(const Checkpoint&, const BeliefState&)>&
                              on_checkpoint) {
  if (!(budget > 0.0) || !std::isfinite(budget)) throw InputError("budget must be positive");
  const std::size_t m = state.num_alternatives();
  if (env.truth.size() != m || env.noise.size() != m || env.cost.size() != m) {
    throw InputError("environment must describe every alternative");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw InputError("budget grid must be increasing");
  }

  BudgetRun run;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t next_checkpoint = 0;
  double decision_ms = 0.0;
  std::size_t step = state.total_samples();

  while (run.spent < budget) {
    const auto t0 = std::chrono::steady_clock::now();
    const SamplingDecision d = policy.decide(state, ctx, step);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    decision_ms += ms;

    const std::size_t a = d.alternative;
    const double truth = env.truth[a](d.location);
    const double true_noise = env.noise[a](d.location);
    const double y = truth + std::sqrt(true_noise) * gauss(observation_rng);
    if (!std::isfinite(y)) {
      throw NumericalError("non-finite observation at step " + std::to_string(step));
    }
    const double c = env.cost[a](d.location);
    state.record(a, Observation{d.location, y, ctx.noise[a](d.location)}, c);
    policy.observe(d, y);
    run.spent += c;
    run.decisions.push_back({d, y, c, ms});
    ++step;

    while (next_checkpoint < grid.size() && run.spent >= grid[next_checkpoint]) {
      Checkpoint cp;
      cp.budget_point = grid[next_checkpoint];
      cp.n_samples = run.decisions.size();
      cp.spent = run.spent;
      cp.wall_ms = decision_ms;
      cp.sample_counts = state.sample_counts();
      if (on_checkpoint) on_checkpoint(cp, state);
      run.checkpoints.push_back(std::move(cp));
      ++next_checkpoint;
    }
  }
  return run;
}

}  // namespace ikg
