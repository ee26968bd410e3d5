#pragma once

#include <Eigen/Dense>

namespace errp {

inline constexpr double kStdFloor = 1e-12;

// Per-dimension z-score with population statistics; frozen into the model
// after fitting on training features only.
struct FeatureNormalizer {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  std::size_t dim() const { return static_cast<std::size_t>(means.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& z) const;
  // Row-wise on a matrix whose rows are feature vectors.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;
};

// rows: one feature vector per row. Throws TooFewVectors below two rows.
FeatureNormalizer fit_normalizer(const Eigen::MatrixXd& rows);

Eigen::VectorXd apply_normalizer(const FeatureNormalizer& normalizer, const Eigen::VectorXd& x);

}  // namespace errp
