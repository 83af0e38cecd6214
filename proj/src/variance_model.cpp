#include "ikg/variance_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ikg/errors.hpp"
#include "ikg/problem.hpp"

namespace ikg {

std::vector<Vector> latin_hypercube(std::size_t count, const BoxDomain& domain, Rng& rng,
                                    bool centered) {
  if (count < 1) throw InputError("latin hypercube needs at least one point");
  const int d = domain.dim();
  std::vector<Vector> points(count, Vector(d));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> perm(count);
  for (int j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (domain.upper()[j] - domain.lower()[j]) / static_cast<double>(count);
    for (std::size_t p = 0; p < count; ++p) {
      const double offset = centered ? 0.5 : unit(rng);
      points[p][j] = domain.lower()[j] + width * (static_cast<double>(perm[p]) + offset);
    }
  }
  return points;
}

VarianceModel::VarianceModel(std::vector<Vector> design_points, Vector sample_variances,
                             Kernel kernel, double prior_mean, double floor)
    : design_points_(std::move(design_points)),
      sample_variances_(std::move(sample_variances)),
      kernel_(std::move(kernel)),
      prior_mean_(prior_mean),
      floor_(floor) {}

VarianceModel VarianceModel::from_sample_variances(std::vector<Vector> design_points,
                                                   Vector sample_variances, Kernel kernel,
                                                   double prior_mean, double floor) {
  if (design_points.empty()) throw InputError("variance model needs design points");
  if (static_cast<std::size_t>(sample_variances.size()) != design_points.size()) {
    throw InputError("one sample variance per design point is required");
  }
  if ((sample_variances.array() < 0.0).any()) throw InputError("sample variances must be >= 0");
  if (!(floor > 0.0)) throw InputError("variance floor must be positive");
  VarianceModel model(std::move(design_points), std::move(sample_variances), std::move(kernel),
                      prior_mean, floor);
  const Matrix gram = model.kernel_.matrix(model.design_points_, model.design_points_);
  Eigen::LLT<Matrix> llt(gram);
  // Coincident design points make the noiseless Gram matrix singular.
  const double min_pivot = llt.info() == Eigen::Success
                               ? llt.matrixL().toDenseMatrix().diagonal().minCoeff()
                               : 0.0;
  if (llt.info() != Eigen::Success || !(min_pivot > 1e-10 * std::sqrt(model.kernel_.tau_sq()))) {
    throw InputError("kriging Gram matrix is singular (duplicate design points?)");
  }
  model.weights_ =
      llt.solve((model.sample_variances_.array() - prior_mean).matrix());
  return model;
}

double VarianceModel::raw_prediction(const Vector& x) const {
  return prior_mean_ + kernel_.row(x, design_points_).dot(weights_);
}

double VarianceModel::predict(const Vector& x) const { return std::max(raw_prediction(x), floor_); }

Vector VarianceModel::predict_gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  if (raw_prediction(x) <= floor_) return g;
  for (std::size_t l = 0; l < design_points_.size(); ++l) {
    g += weights_[static_cast<Eigen::Index>(l)] * kernel_.grad_x(design_points_[l], x);
  }
  return g;
}

ScalarField VarianceModel::as_field() const {
  auto shared = std::make_shared<const VarianceModel>(*this);
  return {[shared](const Vector& x) { return shared->predict(x); },
          [shared](const Vector& x) { return shared->predict_gradient(x); }};
}

VarianceModel fit_variance_model(std::vector<Vector> design_points, std::size_t replications,
                                 const Problem& problem, std::size_t alternative, Rng& rng,
                                 double floor) {
  if (replications < 2) throw InputError("at least two replications per design point are needed");
  if (alternative >= problem.num_alternatives()) throw InputError("alternative out of range");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector s2(static_cast<Eigen::Index>(design_points.size()));
  const auto& theta = problem.env.truth[alternative];
  const auto& lambda = problem.env.noise[alternative];
  for (std::size_t p = 0; p < design_points.size(); ++p) {
    const double mean = theta(design_points[p]);
    const double sd = std::sqrt(lambda(design_points[p]));
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
      const double y = mean + sd * gauss(rng);
      sum += y;
      sum_sq += y * y;
    }
    const double n = static_cast<double>(replications);
    const double ybar = sum / n;
    s2[static_cast<Eigen::Index>(p)] = std::max(0.0, (sum_sq - n * ybar * ybar) / (n - 1.0));
  }
  return VarianceModel::from_sample_variances(std::move(design_points), std::move(s2),
                                              problem.prior_kernel, 0.0, floor);
}

}  // namespace ikg
