#pragma once

#include <cstddef>
#include <vector>

#include "ikg/gp_posterior.hpp"

namespace ikg {

// The full belief S^n: one independent posterior per alternative plus the
// sampling history counters. Alternatives are indexed from 0 in the API.
class BeliefState {
 public:
  explicit BeliefState(std::vector<GpPosterior> posteriors);

  std::size_t num_alternatives() const noexcept { return posteriors_.size(); }
  int dim() const noexcept { return posteriors_.front().dim(); }

  const GpPosterior& posterior(std::size_t i) const;
  const std::vector<GpPosterior>& posteriors() const noexcept { return posteriors_; }
  const std::vector<std::size_t>& sample_counts() const noexcept { return sample_counts_; }
  std::size_t total_samples() const;
  double total_cost_spent() const noexcept { return total_cost_; }

  // Posterior means of every alternative at x.
  Vector means(const Vector& x) const;

  void record(std::size_t i, const Observation& obs, double cost);
  BeliefState recorded(std::size_t i, const Observation& obs, double cost) const;

  // Restores counters when loading a checkpoint. Counts must match the data.
  void set_history(std::vector<std::size_t> counts, double total_cost);

 private:
  std::vector<GpPosterior> posteriors_;
  std::vector<std::size_t> sample_counts_;
  double total_cost_ = 0.0;
};

}  // namespace ikg
