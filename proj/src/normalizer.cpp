#include "errp/normalizer.hpp"

#include "errp/error.hpp"

namespace errp {

Eigen::VectorXd FeatureNormalizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != means.size()) {
    fail(ErrorCode::DimensionMismatch, "feature has " + std::to_string(x.size()) +
                                           " values, normalizer expects " +
                                           std::to_string(means.size()));
  }
  return ((x - means).array() / stds.array()).matrix();
}

Eigen::VectorXd FeatureNormalizer::invert(const Eigen::VectorXd& z) const {
  if (z.size() != means.size()) fail(ErrorCode::DimensionMismatch, "normalizer dimension mismatch");
  return (z.array() * stds.array()).matrix() + means;
}

Eigen::MatrixXd FeatureNormalizer::apply_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != means.size()) fail(ErrorCode::DimensionMismatch, "normalizer dimension mismatch");
  Eigen::MatrixXd out = rows.rowwise() - means.transpose();
  out.array().rowwise() /= stds.transpose().array();
  return out;
}

FeatureNormalizer fit_normalizer(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    fail(ErrorCode::TooFewVectors, "normalizer needs at least 2 vectors, got " +
                                       std::to_string(rows.rows()));
  }
  FeatureNormalizer n;
  n.means = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = rows.rowwise() - n.means.transpose();
  n.stds = (centred.array().square().colwise().sum() / static_cast<double>(rows.rows()))
               .sqrt()
               .transpose()
               .matrix();
  n.stds = n.stds.cwiseMax(kStdFloor);
  return n;
}

Eigen::VectorXd apply_normalizer(const FeatureNormalizer& normalizer, const Eigen::VectorXd& x) {
  return normalizer.apply(x);
}

}  // namespace errp
