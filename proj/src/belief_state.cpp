#include "ikg/belief_state.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ikg/errors.hpp"

namespace ikg {

BeliefState::BeliefState(std::vector<GpPosterior> posteriors) : posteriors_(std::move(posteriors)) {
  if (posteriors_.size() < 2) throw InputError("a belief state needs at least two alternatives");
  const int d = posteriors_.front().dim();
  for (const auto& gp : posteriors_) {
    if (gp.dim() != d) throw InputError("all alternatives must share the covariate dimension");
    sample_counts_.push_back(gp.size());
  }
}

const GpPosterior& BeliefState::posterior(std::size_t i) const {
  if (i >= posteriors_.size()) {
    throw InputError("alternative index " + std::to_string(i) + " out of range");
  }
  return posteriors_[i];
}

std::size_t BeliefState::total_samples() const {
  return std::accumulate(sample_counts_.begin(), sample_counts_.end(), std::size_t{0});
}

Vector BeliefState::means(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(posteriors_.size()));
  for (std::size_t a = 0; a < posteriors_.size(); ++a) {
    out[static_cast<Eigen::Index>(a)] = posteriors_[a].mean(x);
  }
  return out;
}

void BeliefState::record(std::size_t i, const Observation& obs, double cost) {
  if (i >= posteriors_.size()) {
    throw InputError("alternative index " + std::to_string(i) + " out of range");
  }
  if (!(cost > 0.0) || !std::isfinite(cost)) throw InputError("sampling cost must be positive");
  posteriors_[i].update_in_place(obs);
  ++sample_counts_[i];
  total_cost_ += cost;
}

BeliefState BeliefState::recorded(std::size_t i, const Observation& obs, double cost) const {
  BeliefState next = *this;
  next.record(i, obs, cost);
  return next;
}

void BeliefState::set_history(std::vector<std::size_t> counts, double total_cost) {
  if (counts.size() != posteriors_.size()) throw InputError("sample_counts length mismatch");
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] != posteriors_[a].size()) {
      throw InputError("sample_counts[" + std::to_string(a) + "] disagrees with the data");
    }
  }
  if (!(total_cost >= 0.0)) throw InputError("total_cost must be nonnegative");
  sample_counts_ = std::move(counts);
  total_cost_ = total_cost;
}

}  // namespace ikg
