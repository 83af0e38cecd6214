#include "ikg/domain.hpp"

#include <cmath>
#include <string>

#include "ikg/errors.hpp"
#include "ikg/normal.hpp"

namespace ikg {

namespace {

constexpr double kMinAcceptance = 1e-4;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

BoxDomain::BoxDomain(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1 || lower_.size() != upper_.size()) {
    throw InputError("box bounds must have equal, positive dimension");
  }
  for (Eigen::Index j = 0; j < lower_.size(); ++j) {
    if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]) || !(lower_[j] < upper_[j])) {
      throw InputError("box needs finite lower < upper in coordinate " + std::to_string(j));
    }
  }
}

BoxDomain BoxDomain::cube(int dim, double lower, double upper) {
  return BoxDomain(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

double BoxDomain::volume() const { return (upper_ - lower_).prod(); }

bool BoxDomain::contains(const Vector& x) const {
  if (x.size() != lower_.size()) return false;
  return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

Vector BoxDomain::project(const Vector& x) const {
  if (x.size() != lower_.size()) throw InputError("projection dimension mismatch");
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Vector BoxDomain::sample_uniform(Rng& rng) const {
  Vector x(lower_.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    x[j] = lower_[j] + (upper_[j] - lower_[j]) * uniform01(rng);
  }
  return x;
}

CovariateDensity::CovariateDensity(Kind kind, BoxDomain domain, Vector mean, double scale)
    : kind_(kind), domain_(std::move(domain)), mean_(std::move(mean)), scale_(scale) {}

CovariateDensity CovariateDensity::uniform(BoxDomain domain) {
  return CovariateDensity(Kind::UniformBox, std::move(domain), Vector(0), 0.0);
}

CovariateDensity CovariateDensity::truncated_normal(BoxDomain domain, Vector mean, double scale) {
  if (mean.size() != domain.dim()) throw InputError("truncated normal mean dimension mismatch");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InputError("truncated normal scale must be positive");
  }
  CovariateDensity density(Kind::TruncatedNormal, std::move(domain), std::move(mean), scale);
  double accept = 1.0;
  for (int j = 0; j < density.domain_.dim(); ++j) {
    const double hi = (density.domain_.upper()[j] - density.mean_[j]) / scale;
    const double lo = (density.domain_.lower()[j] - density.mean_[j]) / scale;
    accept *= normal::cdf(hi) - normal::cdf(lo);
  }
  if (!(accept >= kMinAcceptance)) {
    throw ConfigError("problem.density",
                      "truncated normal keeps only " + std::to_string(accept) +
                          " of its mass on the box (pathological truncation)");
  }
  density.acceptance_ = accept;
  return density;
}

double CovariateDensity::pdf(const Vector& x) const {
  if (!domain_.contains(x)) return 0.0;
  if (kind_ == Kind::UniformBox) return 1.0 / domain_.volume();
  double p = 1.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    p *= normal::pdf((x[j] - mean_[j]) / scale_) / scale_;
  }
  return p / acceptance_;
}

Vector CovariateDensity::sample(Rng& rng) const {
  if (kind_ == Kind::UniformBox) return domain_.sample_uniform(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(domain_.dim());
  for (;;) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = mean_[j] + scale_ * gauss(rng);
    if (domain_.contains(x)) return x;
  }
}

std::vector<Vector> CovariateDensity::sample(std::size_t count, Rng& rng) const {
  if (count < 1) throw InputError("covariate sample count must be at least 1");
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample(rng));
  return out;
}

}  // namespace ikg
