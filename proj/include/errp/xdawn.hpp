#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "errp/preprocess.hpp"

namespace errp {

// Trained xDAWN projection. Row i of `weights` maps physical channels to
// pseudo-channel i; rows are ordered by descending eigenvalue and scaled so
// that w * sigma_x * w^T = 1.
struct SpatialFilter {
  Eigen::MatrixXd weights;      // n_components x n_channels
  Eigen::VectorXd eigenvalues;  // n_components, descending

  std::size_t n_components() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t n_channels() const { return static_cast<std::size_t>(weights.cols()); }
};

// Mean across windows (all the same shape). Throws TooFewWindows below two.
Eigen::MatrixXd estimate_evoked(std::span<const ProcessedWindow> windows);

// Channel-space signal covariance evoked^T evoked / n_frames.
Eigen::MatrixXd signal_covariance(const Eigen::MatrixXd& evoked);
// Mean of W^T W / n_frames over windows, plus ridge * (trace / n_channels) * I.
Eigen::MatrixXd data_covariance(std::span<const ProcessedWindow> windows, double ridge);

// Top generalized eigenpairs of (sigma_s, sigma_x): whiten sigma_x with its
// inverse square root, then solve the ordinary symmetric problem.
// Throws SingularCovariance when sigma_x is not positive definite.
SpatialFilter solve_generalized(const Eigen::MatrixXd& sigma_s, const Eigen::MatrixXd& sigma_x,
                                std::size_t n_components);

SpatialFilter train_xdawn(const Eigen::MatrixXd& evoked, std::span<const ProcessedWindow> windows,
                          std::size_t n_components = 7, double ridge = 1e-6);

// window (frames x channels) * weights^T -> frames x n_components.
Eigen::MatrixXd apply_spatial_filter(const SpatialFilter& filter, const Eigen::MatrixXd& window);

}  // namespace errp
