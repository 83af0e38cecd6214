#pragma once

#include <vector>

#include "ikg/rng.hpp"
#include "ikg/types.hpp"

namespace ikg {

// Axis-aligned box [lower, upper] with nonempty interior.
class BoxDomain {
 public:
  BoxDomain(Vector lower, Vector upper);
  static BoxDomain cube(int dim, double lower, double upper);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  double volume() const;

  bool contains(const Vector& x) const;
  // Closest point of the box, i.e. a componentwise clamp.
  Vector project(const Vector& x) const;
  Vector sample_uniform(Rng& rng) const;

 private:
  Vector lower_;
  Vector upper_;
};

inline Vector project(const Vector& x, const BoxDomain& domain) { return domain.project(x); }

/*
  Covariate density gamma on a box: either uniform, or an isotropic normal
  N(mean, scale^2 I) truncated to the box. Truncated draws use rejection; the
  acceptance probability is computed exactly up front and a truncation that
  accepts less than 1e-4 of proposals is rejected as a configuration error.
*/
class CovariateDensity {
 public:
  enum class Kind { UniformBox, TruncatedNormal };

  static CovariateDensity uniform(BoxDomain domain);
  static CovariateDensity truncated_normal(BoxDomain domain, Vector mean, double scale);

  Kind kind() const noexcept { return kind_; }
  const BoxDomain& domain() const noexcept { return domain_; }
  const Vector& mean() const noexcept { return mean_; }
  double scale() const noexcept { return scale_; }
  double acceptance_probability() const noexcept { return acceptance_; }

  double pdf(const Vector& x) const;
  Vector sample(Rng& rng) const;
  std::vector<Vector> sample(std::size_t count, Rng& rng) const;

 private:
  CovariateDensity(Kind kind, BoxDomain domain, Vector mean, double scale);

  Kind kind_;
  BoxDomain domain_;
  Vector mean_;
  double scale_ = 0.0;
  double acceptance_ = 1.0;
};

inline std::vector<Vector> sample_covariates(const CovariateDensity& density, std::size_t count,
                                             Rng& rng) {
  return density.sample(count, rng);
}

}  // namespace ikg
