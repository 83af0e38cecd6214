#include "ikg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "ikg/config.hpp"
#include "ikg/errors.hpp"
#include "ikg/experiments.hpp"
#include "ikg/policies.hpp"
#include "ikg/problem.hpp"
#include "ikg/selftest.hpp"

#ifndef IKG_VERSION
#define IKG_VERSION "0.0.0"
#endif

namespace ikg {

namespace {

struct Invocation {
  std::string config_path;
  std::string state_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::size_t> step;
  std::optional<std::size_t> points;
  bool quiet = false;
};

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

// -inf has no JSON spelling; it is written as null.
Json log_value_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

ExperimentConfig load_config(const Invocation& inv, Json tree) {
  if (!inv.config_path.empty()) tree = load_json_file(inv.config_path);
  for (const auto& o : inv.overrides) apply_override(tree, o);
  ExperimentConfig config = parse_experiment_config(tree);
  if (inv.seed) config.seed = *inv.seed;
  return config;
}

// Config for commands that start from a state file: the problem shape
// defaults to the state's, and an explicit config must agree with it.
ExperimentConfig config_for_state(const Invocation& inv, const BeliefState& state) {
  Json fallback{{"problem",
                 {{"d", state.dim()}, {"M", static_cast<int>(state.num_alternatives())}}}};
  ExperimentConfig config = load_config(inv, std::move(fallback));
  if (config.problem.dim != state.dim()) {
    throw ConfigError("problem.d", "does not match the state's dimension " + std::to_string(state.dim()));
  }
  if (static_cast<std::size_t>(config.problem.num_alternatives) != state.num_alternatives()) {
    throw ConfigError("problem.M", "does not match the state's " +
                                       std::to_string(state.num_alternatives()) + " alternatives");
  }
  return config;
}

int cmd_validate(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig config = load_config(inv, Json::object());
  const Problem problem = make_problem(config.problem);
  out << "valid: " << problem.id() << ", policies";
  for (const auto& p : config.policies) out << ' ' << policy_label(p);
  out << ", B=" << config.budget.budget << ", L=" << config.budget.replications
      << ", seed=" << config.seed << '\n';
  return kExitOk;
}

int cmd_run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = load_config(inv, Json::object());
  if (inv.output_dir) config.output.dir = *inv.output_dir;
  const std::filesystem::path dir(config.output.dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  const std::size_t total = config.policies.size() * config.budget.replications;
  std::size_t done = 0;
  ProgressFn progress;
  if (!inv.quiet) {
    progress = [&](const std::string& policy, std::size_t rep) {
      err << "[" << ++done << "/" << total << "] " << policy << " replication " << rep << '\n';
    };
  }
  const ExperimentResult result = run_experiment(config, inv.workers, progress);

  write_text_file(dir / "results.csv", results_csv(result.rows));
  write_text_file(dir / "summary.csv", summary_csv(result.summary));
  Json files = Json::array({"results.csv", "summary.csv", "manifest.json"});
  if (config.output.timing) {
    write_text_file(dir / "timing.csv", timing_csv(result.timings));
    files.push_back("timing.csv");
  }
  Json failures = Json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"policy", f.policy}, {"replication", f.replication}, {"error", f.message}});
  }
  const Problem problem = make_problem(config.problem);
  Json labels = Json::array();
  for (const auto& p : config.policies) labels.push_back(policy_label(p));
  const Json manifest{
      {"tool", "ikg"},
      {"version", std::string(version())},
      {"problem", problem.id()},
      {"policies", labels},
      {"config", config_to_json(config)},
      {"seeds",
       {{"master", config.seed},
        {"streams", "derived from (master, problem, policy, replication, purpose)"}}},
      {"rows", result.rows.size()},
      {"failures", failures},
      {"files", files}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "wrote " << result.rows.size() << " rows to " << (dir / "results.csv").string() << '\n';
  for (const auto& row : result.summary) {
    out << "  " << row.policy << " B=" << row.budget << " mean OC " << row.mean_oc << " +/- "
        << row.half_width << '\n';
  }
  if (!result.failures.empty()) {
    for (const auto& f : result.failures) {
      err << "replication failed: " << f.policy << " #" << f.replication << ": " << f.message << '\n';
    }
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_decide(const Invocation& inv, std::ostream& out) {
  const BeliefState state = belief_from_json(load_json_file(inv.state_path));
  const ExperimentConfig config = config_for_state(inv, state);
  const Problem problem = make_problem(config.problem);
  const PolicySpec& spec = config.policies.front();
  const PolicyContext ctx = make_context(problem, config, config.seed);
  const std::size_t step = inv.step.value_or(state.total_samples());

  IkgDecision decision;
  if (spec.name == "ikg") {
    decision = ikg_decide(state, ctx, step);
  } else if (spec.name == "ikgwrc") {
    decision = ikgwrc_decide(state, ctx, step);
  } else if (spec.name == "ikg_saa") {
    decision = ikg_saa_decide(state, ctx, step, spec.saa);
  } else {
    throw ConfigError("policy.name", "decide supports ikg, ikgwrc and ikg_saa");
  }

  Json logs = Json::array();
  Json inits = Json::array();
  Json candidates = Json::array();
  for (std::size_t i = 0; i < state.num_alternatives(); ++i) {
    logs.push_back(log_value_json(decision.diagnostics.log_values[i]));
    inits.push_back(vector_json(decision.diagnostics.init_points[i]));
    candidates.push_back(vector_json(decision.diagnostics.candidates[i]));
  }
  const Json report{
      {"alternative", decision.decision.alternative + 1},
      {"location", vector_json(decision.decision.location)},
      {"policy", spec.name},
      {"step", step},
      {"seed", config.seed},
      {"log_ikg", logs},
      {"sga",
       {{"K", config.sga.max_iters},
        {"K0", config.sga.averaging_start},
        {"step_scale", config.sga.step_scale},
        {"step_exponent", config.sga.step_exponent},
        {"batch_size", config.sga.batch_size},
        {"compare_batch", config.saa_batch},
        {"init_points", inits},
        {"candidates", candidates}}}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_oc(const Invocation& inv, std::ostream& out) {
  const BeliefState state = belief_from_json(load_json_file(inv.state_path));
  const ExperimentConfig config = config_for_state(inv, state);
  const Problem problem = make_problem(config.problem);
  const std::size_t count = inv.points.value_or(oc_points(config));
  if (count < 1) throw ConfigError("points", "must be at least 1");
  Rng rng = make_stream(config.seed, {hash_tag(problem.id()), hash_tag("oc")});
  const auto points = problem.density.sample(count, rng);
  const Json report{{"problem", problem.id()},
                    {"oc", estimate_oc(state, problem, points)},
                    {"points", count},
                    {"seed", config.seed}};
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_selftest(const Invocation& inv, std::ostream& out) {
  SelftestOptions options;
  if (inv.seed) options.seed = *inv.seed;
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_selftest(options);
  std::size_t failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    if (!r.passed) ++failed;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << (results.size() - failed) << "/" << results.size() << " properties passed in " << seconds
      << " s\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

std::string_view version() { return IKG_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  CLI::App app{"Integrated knowledge gradient sampling for ranking and selection with covariates",
               "ikg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--override", inv.overrides, "Dotted-path assignment key=value, repeatable");
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", inv.seed, "Master seed, replaces the config's seed");
  };

  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  validate->add_option("--config", inv.config_path, "Configuration JSON")->required();
  add_overrides(validate);

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV results");
  run->add_option("--config", inv.config_path, "Configuration JSON")->required();
  add_seed(run);
  run->add_option("--output", inv.output_dir, "Output directory, replaces output.dir");
  run->add_option("--workers", inv.workers, "Parallel replications")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", inv.quiet, "No progress lines");
  add_overrides(run);

  auto* decide = app.add_subcommand("decide", "Compute one IKG sampling decision for a state");
  decide->add_option("--state", inv.state_path, "Belief state JSON")->required();
  decide->add_option("--config", inv.config_path, "Configuration JSON");
  add_seed(decide);
  decide->add_option("--step", inv.step, "Decision index for the RNG streams");
  add_overrides(decide);

  auto* oc = app.add_subcommand("oc", "Estimate the opportunity cost of a state's decision rule");
  oc->add_option("--state", inv.state_path, "Belief state JSON")->required();
  oc->add_option("--config", inv.config_path, "Configuration JSON");
  add_seed(oc);
  oc->add_option("--points", inv.points, "Number of evaluation points");
  add_overrides(oc);

  auto* selftest = app.add_subcommand("selftest", "Run the fast invariant suite");
  add_seed(selftest);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(inv, out);
    if (*run) return cmd_run(inv, out, err);
    if (*decide) return cmd_decide(inv, out);
    if (*oc) return cmd_oc(inv, out);
    if (*selftest) return cmd_selftest(inv, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace ikg
