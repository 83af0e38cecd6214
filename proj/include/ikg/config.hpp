#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ikg/belief_state.hpp"
#include "ikg/experiments.hpp"
#include "ikg/kernel.hpp"

namespace ikg {

using Json = nlohmann::json;

// Reads a JSON document. Missing or unreadable files raise IoError; malformed
// JSON raises ConfigError.
Json load_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Applies "dotted.path=value". The value is parsed as JSON when possible and
// taken as a plain string otherwise. Intermediate objects are created.
void apply_override(Json& root, std::string_view assignment);

/*
  Experiment configuration. Sections:

    problem  name (P1|P2|P3), d, M, noise, noise_profile, noise_model,
             variance{design_points, replications, centered, floor},
             cost_model (truthful|unit), density_scale, domain{lower, upper},
             kernel{family, tau_sq, alpha}, prior_mean, jitter
    policy   "name" or {name: string|[strings], bse{m: int|[ints], threshold_scale},
             saa{J, N, multistart}}
    sga      K, K0, step_scale, step_exponent, batch_size, common_streams
    budget   B, grid | grid_points, replications, oc_points
    output   dir, timing
    seed

  Unknown keys are rejected; every error names the dotted path of the key.
  Size-dependent defaults (K, m, J, J') follow the problem dimension.
*/
ExperimentConfig parse_experiment_config(const Json& root);
Json config_to_json(const ExperimentConfig& config);

Kernel parse_kernel(const Json& node, const std::string& path);
Json kernel_to_json(const Kernel& kernel);

// Checkpoint records for posteriors and belief states.
Json posterior_to_json(const GpPosterior& gp);
GpPosterior posterior_from_json(const Json& node, const std::string& path = "posterior");
Json belief_to_json(const BeliefState& state);
BeliefState belief_from_json(const Json& node);

}  // namespace ikg
