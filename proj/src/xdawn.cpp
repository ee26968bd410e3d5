#include "errp/xdawn.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "errp/error.hpp"

namespace errp {

Eigen::MatrixXd estimate_evoked(std::span<const ProcessedWindow> windows) {
  if (windows.size() < 2) {
    fail(ErrorCode::TooFewWindows, "evoked estimate needs at least 2 windows, got " +
                                       std::to_string(windows.size()));
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(windows[0].samples.rows(), windows[0].samples.cols());
  for (const auto& w : windows) {
    if (w.samples.rows() != sum.rows() || w.samples.cols() != sum.cols()) {
      fail(ErrorCode::DimensionMismatch, "evoked windows differ in shape");
    }
    sum += w.samples;
  }
  return sum / static_cast<double>(windows.size());
}

Eigen::MatrixXd signal_covariance(const Eigen::MatrixXd& evoked) {
  return evoked.transpose() * evoked / static_cast<double>(evoked.rows());
}

Eigen::MatrixXd data_covariance(std::span<const ProcessedWindow> windows, double ridge) {
  if (windows.empty()) fail(ErrorCode::TooFewWindows, "data covariance needs at least 1 window");
  const Eigen::Index n_ch = windows[0].samples.cols();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n_ch, n_ch);
  for (const auto& w : windows) {
    if (w.samples.cols() != n_ch) fail(ErrorCode::DimensionMismatch, "channel counts differ");
    cov.noalias() += w.samples.transpose() * w.samples / static_cast<double>(w.samples.rows());
  }
  cov /= static_cast<double>(windows.size());
  if (ridge > 0.0) {
    cov.diagonal().array() += ridge * cov.trace() / static_cast<double>(n_ch);
  }
  return cov;
}

SpatialFilter solve_generalized(const Eigen::MatrixXd& sigma_s, const Eigen::MatrixXd& sigma_x,
                                std::size_t n_components) {
  const Eigen::Index n = sigma_x.rows();
  if (sigma_x.cols() != n || sigma_s.rows() != n || sigma_s.cols() != n) {
    fail(ErrorCode::DimensionMismatch, "covariance matrices must be square and equal size");
  }
  if (n_components == 0 || static_cast<Eigen::Index>(n_components) > n) {
    fail(ErrorCode::DimensionMismatch, "n_components must be in [1, n_channels]");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> noise(sigma_x);
  if (noise.info() != Eigen::Success) fail(ErrorCode::SingularCovariance, "eigensolver failed");
  const Eigen::VectorXd d = noise.eigenvalues();
  if (!(d.minCoeff() > 1e-14 * std::max(1.0, d.maxCoeff())) || !d.allFinite()) {
    fail(ErrorCode::SingularCovariance,
         "data covariance is not positive definite (min eigenvalue " +
             std::to_string(d.minCoeff()) + ")");
  }
  const Eigen::MatrixXd whitener =
      noise.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
      noise.eigenvectors().transpose();

  Eigen::MatrixXd whitened = whitener * sigma_s * whitener;
  whitened = 0.5 * (whitened + whitened.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> signal(whitened);
  if (signal.info() != Eigen::Success) fail(ErrorCode::SingularCovariance, "eigensolver failed");

  SpatialFilter out;
  const auto k = static_cast<Eigen::Index>(n_components);
  out.weights.resize(k, n);
  out.eigenvalues.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index src = n - 1 - i;  // ascending order from Eigen
    Eigen::VectorXd w = whitener * signal.eigenvectors().col(src);
    Eigen::Index arg = 0;
    w.cwiseAbs().maxCoeff(&arg);
    if (w(arg) < 0.0) w = -w;
    out.weights.row(i) = w.transpose();
    out.eigenvalues(i) = std::max(0.0, signal.eigenvalues()(src));
  }
  return out;
}

SpatialFilter train_xdawn(const Eigen::MatrixXd& evoked, std::span<const ProcessedWindow> windows,
                          std::size_t n_components, double ridge) {
  if (windows.empty()) fail(ErrorCode::TooFewWindows, "xDAWN needs at least 1 training window");
  if (evoked.cols() != windows[0].samples.cols()) {
    fail(ErrorCode::DimensionMismatch, "evoked and training windows differ in channel count");
  }
  return solve_generalized(signal_covariance(evoked), data_covariance(windows, ridge),
                           n_components);
}

Eigen::MatrixXd apply_spatial_filter(const SpatialFilter& filter, const Eigen::MatrixXd& window) {
  if (static_cast<std::size_t>(window.cols()) != filter.n_channels()) {
    fail(ErrorCode::DimensionMismatch, "window has " + std::to_string(window.cols()) +
                                           " channels, filter expects " +
                                           std::to_string(filter.n_channels()));
  }
  return window * filter.weights.transpose();
}

}  // namespace errp
