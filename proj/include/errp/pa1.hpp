#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errp/signal_model.hpp"

namespace errp {

// Linear scorer over features augmented with a constant 1.0; the last weight
// is the bias.
struct LinearModel {
  Eigen::VectorXd weights;
  double C{1.0};

  std::size_t feature_dim() const { return static_cast<std::size_t>(weights.size()) - 1; }
};

// Positive class = error.
struct ConfusionCounts {
  std::size_t tp{0};
  std::size_t fn{0};
  std::size_t tn{0};
  std::size_t fp{0};

  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  void add(Label truth, Label predicted);
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

double true_positive_rate(const ConfusionCounts& counts);
double true_negative_rate(const ConfusionCounts& counts);
// (TPR + TNR) / 2. Throws EmptyClass when either class has no members.
double balanced_accuracy(const ConfusionCounts& counts);

Eigen::VectorXd augment(const Eigen::VectorXd& x);

// One PA-I step on an augmented example:
//   loss = max(0, 1 - y <w, x>),  tau = min(C, loss / |x|^2),  w += tau y x.
// Returns tau. Throws ZeroVector when x is all zeros.
double pa1_update(Eigen::VectorXd& weights, const Eigen::VectorXd& x_aug, int y, double C);

// rows of `features` are (unaugmented) feature vectors, labels are +1 / -1.
// Weights start at zero; each pass visits examples in a freshly shuffled order
// drawn from `seed`.
LinearModel train_pa1(const Eigen::MatrixXd& features, std::span<const int> labels, double C,
                      std::size_t passes, std::uint64_t seed);

double decision_value(const LinearModel& model, const Eigen::VectorXd& x);
// error iff value > 0; a tie goes to correct.
Label classify_value(double value);
Label classify(const LinearModel& model, const Eigen::VectorXd& x);

// Per class: shuffle indices with `seed` and deal them round-robin over k folds.
// Throws ClassTooSmall when a class has fewer than k members.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed);

std::vector<double> default_C_grid();  // 1e0, 1e-1, ..., 1e-6

struct GridSearchResult {
  double best_C{1.0};
  std::vector<double> grid;
  std::vector<double> mean_bacc;  // one per grid value
};

// Fold-level CV over feature vectors; the normalizer is refitted on the
// training part of each fold. Ties go to the earlier (larger) C.
GridSearchResult grid_search_C(const Eigen::MatrixXd& features, std::span<const int> labels,
                               std::span<const double> grid, std::size_t k, std::size_t passes,
                               std::uint64_t seed);

}  // namespace errp
