#include "ikg/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ikg/errors.hpp"

namespace ikg {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed access to one JSON object that remembers which keys were read, so
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be positive");
    return x;
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<long long>();
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) {
    const long long v = integer(key, static_cast<long long>(fallback));
    if (v < static_cast<long long>(minimum)) {
      throw ConfigError(at(key), "must be at least " + std::to_string(minimum));
    }
    return static_cast<std::size_t>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::string> string_list(const Json& node, const std::string& path) {
  std::vector<std::string> out;
  if (node.is_string()) {
    out.push_back(node.get<std::string>());
  } else if (node.is_array() && !node.empty()) {
    for (std::size_t k = 0; k < node.size(); ++k) {
      if (!node[k].is_string()) throw ConfigError(path + "[" + std::to_string(k) + "]", "expected a string");
      out.push_back(node[k].get<std::string>());
    }
  } else {
    throw ConfigError(path, "expected a string or a nonempty list of strings");
  }
  return out;
}

Vector number_vector(const Json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ConfigError(path, "expected a nonempty list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t k = 0; k < node.size(); ++k) {
    if (!node[k].is_number()) throw ConfigError(path + "[" + std::to_string(k) + "]", "expected a number");
    v[static_cast<Eigen::Index>(k)] = node[k].get<double>();
  }
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) out.push_back(v[j]);
  return out;
}

ProblemSpec parse_problem(const Json& node) {
  ObjectReader r(node, "problem");
  ProblemSpec spec;
  spec.name = r.string("name", spec.name);
  if (spec.name != "P1" && spec.name != "P2" && spec.name != "P3") {
    throw ConfigError(r.at("name"), "unknown problem '" + spec.name + "' (expected P1, P2, P3)");
  }
  spec.dim = static_cast<int>(r.count("d", 1, 1));
  spec.num_alternatives = static_cast<int>(r.count("M", 5, 2));
  spec.noise = r.positive("noise", spec.noise);
  spec.noise_profile = r.string("noise_profile", spec.noise_profile);
  if (spec.noise_profile != "constant" && spec.noise_profile != "griewank") {
    throw ConfigError(r.at("noise_profile"), "expected constant or griewank");
  }
  spec.noise_model = r.string("noise_model", spec.noise_model);
  if (spec.noise_model != "known" && spec.noise_model != "estimated") {
    throw ConfigError(r.at("noise_model"), "expected known or estimated");
  }
  spec.cost_model = r.string("cost_model", spec.cost_model);
  if (spec.cost_model != "truthful" && spec.cost_model != "unit") {
    throw ConfigError(r.at("cost_model"), "expected truthful or unit");
  }
  if (r.has("variance")) {
    ObjectReader v(r.raw("variance"), r.at("variance"));
    spec.variance.design_points = v.count("design_points", spec.variance.design_points, 1);
    spec.variance.replications = v.count("replications", spec.variance.replications, 2);
    spec.variance.centered = v.boolean("centered", spec.variance.centered);
    spec.variance.floor = v.positive("floor", spec.variance.floor);
    v.finish();
  }
  spec.density_scale = r.positive("density_scale", spec.density_scale);
  if (r.has("domain")) {
    ObjectReader dom(r.raw("domain"), r.at("domain"));
    spec.lower = dom.number("lower", spec.lower);
    spec.upper = dom.number("upper", spec.upper);
    dom.finish();
    if (!(spec.lower < spec.upper)) throw ConfigError(r.at("domain"), "needs lower < upper");
  }
  if (r.has("kernel")) {
    spec.kernel = parse_kernel(r.raw("kernel"), r.at("kernel"));
    if (spec.kernel->dim() != spec.dim) {
      throw ConfigError(r.at("kernel.alpha"), "length must equal problem.d");
    }
  }
  spec.prior_mean = r.number("prior_mean", spec.prior_mean);
  spec.jitter = r.number("jitter", spec.jitter);
  if (spec.jitter < 0.0) throw ConfigError(r.at("jitter"), "must be nonnegative");
  r.finish();
  return spec;
}

struct PolicySection {
  std::vector<PolicySpec> policies;
  std::optional<std::size_t> saa_batch;
};

PolicySection parse_policy(const Json& node) {
  PolicySection out;
  if (node.is_string()) {
    PolicySpec spec;
    spec.name = node.get<std::string>();
    out.policies.push_back(spec);
  } else {
    ObjectReader r(node, "policy");
    const auto names = r.has("name") ? string_list(r.raw("name"), r.at("name"))
                                     : std::vector<std::string>{"ikg"};
    PolicySpec base;
    std::vector<int> bins{base.bse_bins};
    if (r.has("bse")) {
      ObjectReader b(r.raw("bse"), r.at("bse"));
      if (b.has("m")) {
        const Json& m = b.raw("m");
        bins.clear();
        auto check = [&](const Json& v, const std::string& path) {
          if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1000) {
            throw ConfigError(path, "expected an integer in [1, 1000]");
          }
          bins.push_back(static_cast<int>(v.get<long long>()));
        };
        if (m.is_array() && !m.empty()) {
          for (std::size_t k = 0; k < m.size(); ++k) check(m[k], b.at("m") + "[" + std::to_string(k) + "]");
        } else {
          check(m, b.at("m"));
        }
      }
      base.bse_threshold_scale = b.positive("threshold_scale", base.bse_threshold_scale);
      b.finish();
    }
    if (r.has("saa")) {
      ObjectReader s(r.raw("saa"), r.at("saa"));
      if (s.has("J")) out.saa_batch = s.count("J", 1, 1);
      base.saa.sample_size = s.count("N", base.saa.sample_size, 1);
      base.saa.multistart = static_cast<int>(s.count("multistart", 1, 1));
      s.finish();
    }
    r.finish();
    for (const auto& name : names) {
      PolicySpec spec = base;
      spec.name = name;
      if (name == "bse") {
        for (int m : bins) {
          spec.bse_bins = m;
          out.policies.push_back(spec);
        }
      } else {
        out.policies.push_back(spec);
      }
    }
  }
  for (const auto& p : out.policies) {
    if (p.name != "ikg" && p.name != "ikgwrc" && p.name != "bse" && p.name != "prs" &&
        p.name != "ikg_saa") {
      throw ConfigError("policy.name",
                        "unknown policy '" + p.name + "' (expected ikg, ikgwrc, bse, prs, ikg_saa)");
    }
  }
  return out;
}

SgaConfig parse_sga(const Json* node, int dim, bool& common_streams) {
  SgaConfig cfg = SgaConfig::defaults_for_dim(dim);
  if (node != nullptr) {
    ObjectReader r(*node, "sga");
    common_streams = r.boolean("common_streams", common_streams);
    const bool k_given = r.has("K");
    cfg.max_iters = static_cast<int>(r.count("K", static_cast<std::size_t>(cfg.max_iters), 0));
    if (k_given && !r.has("K0")) cfg.averaging_start = std::max(1, cfg.max_iters / 4);
    cfg.averaging_start =
        static_cast<int>(r.count("K0", static_cast<std::size_t>(cfg.averaging_start), 1));
    cfg.step_scale = r.positive("step_scale", cfg.step_scale);
    cfg.step_exponent = r.number("step_exponent", cfg.step_exponent);
    cfg.batch_size = static_cast<int>(r.count("batch_size", static_cast<std::size_t>(cfg.batch_size), 1));
    r.finish();
  }
  cfg.validate();
  return cfg;
}

BudgetSpec parse_budget(const Json* node) {
  BudgetSpec spec;
  if (node == nullptr) return spec;
  ObjectReader r(*node, "budget");
  spec.budget = r.positive("B", spec.budget);
  if (r.has("grid")) {
    const Vector g = number_vector(r.raw("grid"), r.at("grid"));
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if (!(g[k] > 0.0) || (k > 0 && !(g[k] > g[k - 1]))) {
        throw ConfigError(r.at("grid"), "must be positive and strictly increasing");
      }
      if (g[k] > spec.budget) throw ConfigError(r.at("grid"), "grid points must not exceed B");
      spec.grid.push_back(g[k]);
    }
  }
  spec.grid_points = static_cast<int>(r.count("grid_points", static_cast<std::size_t>(spec.grid_points), 1));
  spec.replications = r.count("replications", spec.replications, 1);
  if (r.has("oc_points")) spec.oc_points = r.count("oc_points", 1, 1);
  r.finish();
  return spec;
}

}  // namespace

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void apply_override(Json& root, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("", "override '" + std::string(assignment) + "' must look like key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &root;
  std::size_t start = 0;
  std::string walked;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component in override");
    walked = join(walked, part);
    if (!node->is_object()) {
      throw ConfigError(walked, "cannot descend into a non-object value");
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    // "policy": "prs" is shorthand for {"name": "prs"}; expand it on demand.
    if (child.is_string() && walked == "policy") child = Json{{"name", child}};
    node = &child;
    start = dot + 1;
  }
}

Kernel parse_kernel(const Json& node, const std::string& path) {
  ObjectReader r(node, path);
  const std::string family = r.string("family", "se");
  KernelFamily fam;
  try {
    fam = parse_kernel_family(family);
  } catch (const InputError& e) {
    throw ConfigError(r.at("family"), e.what());
  }
  const double tau_sq = r.positive("tau_sq", 1.0);
  if (!r.has("alpha")) throw ConfigError(r.at("alpha"), "is required");
  const Vector alpha = number_vector(r.raw("alpha"), r.at("alpha"));
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (!(alpha[j] > 0.0)) throw ConfigError(r.at("alpha"), "every component must be positive");
  }
  r.finish();
  return Kernel(fam, tau_sq, alpha);
}

Json kernel_to_json(const Kernel& kernel) {
  return Json{{"family", std::string(to_string(kernel.family()))},
              {"tau_sq", kernel.tau_sq()},
              {"alpha", vector_to_json(kernel.alpha())}};
}

ExperimentConfig parse_experiment_config(const Json& root) {
  ObjectReader r(root, "");
  ExperimentConfig config;
  config.problem = r.has("problem") ? parse_problem(r.raw("problem")) : parse_problem(Json::object());
  const int d = config.problem.dim;
  PolicySection policy =
      r.has("policy") ? parse_policy(r.raw("policy")) : parse_policy(Json::object());
  config.policies = std::move(policy.policies);
  config.saa_batch = policy.saa_batch.value_or(500 * static_cast<std::size_t>(d * d));
  config.sga = parse_sga(r.has("sga") ? &r.raw("sga") : nullptr, d, config.common_sga_streams);
  config.budget = parse_budget(r.has("budget") ? &r.raw("budget") : nullptr);
  if (r.has("output")) {
    ObjectReader o(r.raw("output"), "output");
    config.output.dir = o.string("dir", config.output.dir);
    config.output.timing = o.boolean("timing", config.output.timing);
    o.finish();
  }
  if (r.has("seed")) {
    const Json& s = r.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    config.seed = s.get<std::uint64_t>();
  }
  r.finish();
  // Surface problem-level invariants (box, truncation) at validation time.
  make_problem(config.problem);
  return config;
}

Json config_to_json(const ExperimentConfig& config) {
  const auto& p = config.problem;
  Json problem{{"name", p.name},
               {"d", p.dim},
               {"M", p.num_alternatives},
               {"noise", p.noise},
               {"noise_profile", p.noise_profile},
               {"noise_model", p.noise_model},
               {"cost_model", p.cost_model},
               {"variance",
                {{"design_points", p.variance.design_points},
                 {"replications", p.variance.replications},
                 {"centered", p.variance.centered},
                 {"floor", p.variance.floor}}},
               {"density_scale", p.density_scale},
               {"domain", {{"lower", p.lower}, {"upper", p.upper}}},
               {"prior_mean", p.prior_mean},
               {"jitter", p.jitter}};
  problem["kernel"] = kernel_to_json(p.kernel ? *p.kernel : Kernel::isotropic_se(p.dim));

  Json names = Json::array();
  Json bins = Json::array();
  for (const auto& spec : config.policies) {
    if (spec.name == "bse") {
      bins.push_back(spec.bse_bins);
      if (std::find(names.begin(), names.end(), "bse") != names.end()) continue;
    }
    names.push_back(spec.name);
  }
  const PolicySpec& first = config.policies.front();
  Json policy{{"name", names},
              {"saa",
               {{"J", config.saa_batch},
                {"N", first.saa.sample_size},
                {"multistart", first.saa.multistart}}}};
  policy["bse"] = Json{{"threshold_scale", first.bse_threshold_scale}};
  if (!bins.empty()) policy["bse"]["m"] = bins;

  Json budget{{"B", config.budget.budget},
              {"grid", budget_grid(config.budget)},
              {"replications", config.budget.replications},
              {"oc_points", oc_points(config)}};
  return Json{{"problem", problem},
              {"policy", policy},
              {"sga",
               {{"K", config.sga.max_iters},
                {"K0", config.sga.averaging_start},
                {"step_scale", config.sga.step_scale},
                {"step_exponent", config.sga.step_exponent},
                {"batch_size", config.sga.batch_size},
                {"common_streams", config.common_sga_streams}}},
              {"budget", budget},
              {"output", {{"dir", config.output.dir}, {"timing", config.output.timing}}},
              {"seed", config.seed}};
}

Json posterior_to_json(const GpPosterior& gp) {
  const auto& c = gp.prior_mean().constant_value();
  if (!c) throw UnsupportedError("only constant prior means can be serialized");
  Json locations = Json::array();
  for (const auto& v : gp.locations()) locations.push_back(vector_to_json(v));
  return Json{{"kernel", kernel_to_json(gp.kernel())},
              {"prior_mean", {{"kind", "constant"}, {"value", *c}}},
              {"jitter", gp.options().jitter},
              {"locations", locations},
              {"observations", vector_to_json(gp.observations())},
              {"noise_values", vector_to_json(gp.noise_values())}};
}

GpPosterior posterior_from_json(const Json& node, const std::string& path) {
  ObjectReader r(node, path);
  if (!r.has("kernel")) throw ConfigError(r.at("kernel"), "is required");
  Kernel kernel = parse_kernel(r.raw("kernel"), r.at("kernel"));
  double mean = 0.0;
  if (r.has("prior_mean")) {
    ObjectReader m(r.raw("prior_mean"), r.at("prior_mean"));
    if (m.string("kind", "constant") != "constant") {
      throw ConfigError(m.at("kind"), "only constant prior means are supported");
    }
    mean = m.number("value", 0.0);
    m.finish();
  }
  GpOptions options{r.number("jitter", 0.0)};
  std::vector<Observation> obs;
  const Json empty = Json::array();
  const Json& locs = r.has("locations") ? r.raw("locations") : empty;
  const Json& ys = r.has("observations") ? r.raw("observations") : empty;
  const Json& lam = r.has("noise_values") ? r.raw("noise_values") : empty;
  r.finish();
  if (!locs.is_array() || !ys.is_array() || !lam.is_array() || locs.size() != ys.size() ||
      ys.size() != lam.size()) {
    throw ConfigError(path, "locations, observations and noise_values must be lists of equal length");
  }
  for (std::size_t l = 0; l < locs.size(); ++l) {
    const std::string at = r.at("locations") + "[" + std::to_string(l) + "]";
    if (!ys[l].is_number() || !lam[l].is_number()) {
      throw ConfigError(r.at("observations") + "[" + std::to_string(l) + "]", "expected numbers");
    }
    const double noise = lam[l].get<double>();
    if (!(noise > 0.0)) {
      throw ConfigError(r.at("noise_values") + "[" + std::to_string(l) + "]", "must be positive");
    }
    obs.push_back({number_vector(locs[l], at), ys[l].get<double>(), noise});
  }
  try {
    return GpPosterior::from_data(std::move(kernel), PriorMean::constant(mean), std::move(obs), options);
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

Json belief_to_json(const BeliefState& state) {
  Json posteriors = Json::array();
  for (const auto& gp : state.posteriors()) posteriors.push_back(posterior_to_json(gp));
  return Json{{"posteriors", posteriors},
              {"sample_counts", state.sample_counts()},
              {"total_cost", state.total_cost_spent()}};
}

BeliefState belief_from_json(const Json& node) {
  ObjectReader r(node, "");
  if (!r.has("posteriors") || !r.raw("posteriors").is_array()) {
    throw ConfigError("posteriors", "expected a list of posteriors");
  }
  const Json& list = r.raw("posteriors");
  if (list.size() < 2) throw ConfigError("posteriors", "need at least two alternatives");
  std::vector<GpPosterior> posteriors;
  for (std::size_t i = 0; i < list.size(); ++i) {
    posteriors.push_back(posterior_from_json(list[i], "posteriors[" + std::to_string(i) + "]"));
  }
  std::optional<std::vector<std::size_t>> counts;
  if (r.has("sample_counts")) {
    const Json& c = r.raw("sample_counts");
    if (!c.is_array()) throw ConfigError("sample_counts", "expected a list");
    counts.emplace();
    for (const auto& v : c) {
      if (!v.is_number_unsigned()) throw ConfigError("sample_counts", "expected nonnegative integers");
      counts->push_back(v.get<std::size_t>());
    }
  }
  const double total = r.number("total_cost", 0.0);
  r.finish();
  BeliefState state(std::move(posteriors));
  try {
    state.set_history(counts.value_or(state.sample_counts()), total);
  } catch (const InputError& e) {
    throw ConfigError("sample_counts", e.what());
  }
  return state;
}

}  // namespace ikg
