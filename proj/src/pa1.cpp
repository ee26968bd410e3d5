#include "errp/pa1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errp/error.hpp"
#include "errp/normalizer.hpp"
#include "errp/rng.hpp"

namespace errp {

void ConfusionCounts::add(Label truth, Label predicted) {
  if (truth == Label::Error) {
    (predicted == Label::Error ? tp : fn) += 1;
  } else {
    (predicted == Label::Correct ? tn : fp) += 1;
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fn += o.fn;
  tn += o.tn;
  fp += o.fp;
  return *this;
}

double true_positive_rate(const ConfusionCounts& c) {
  if (c.positives() == 0) fail(ErrorCode::EmptyClass, "no positive (error) examples");
  return static_cast<double>(c.tp) / static_cast<double>(c.positives());
}

double true_negative_rate(const ConfusionCounts& c) {
  if (c.negatives() == 0) fail(ErrorCode::EmptyClass, "no negative (correct) examples");
  return static_cast<double>(c.tn) / static_cast<double>(c.negatives());
}

double balanced_accuracy(const ConfusionCounts& c) {
  return (true_positive_rate(c) + true_negative_rate(c)) / 2.0;
}

Eigen::VectorXd augment(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = 1.0;
  return out;
}

double pa1_update(Eigen::VectorXd& weights, const Eigen::VectorXd& x_aug, int y, double C) {
  if (weights.size() != x_aug.size()) {
    fail(ErrorCode::DimensionMismatch, "weights and example differ in length");
  }
  const double norm_sq = x_aug.squaredNorm();
  if (!(norm_sq > 0.0)) fail(ErrorCode::ZeroVector, "PA1 update on a zero vector");
  const double loss = std::max(0.0, 1.0 - static_cast<double>(y) * weights.dot(x_aug));
  if (loss == 0.0) return 0.0;
  const double tau = std::min(C, loss / norm_sq);
  weights += (tau * static_cast<double>(y)) * x_aug;
  return tau;
}

namespace {

void require_both_classes(std::span<const int> labels) {
  const bool pos = std::any_of(labels.begin(), labels.end(), [](int y) { return y > 0; });
  const bool neg = std::any_of(labels.begin(), labels.end(), [](int y) { return y < 0; });
  if (!pos || !neg) fail(ErrorCode::SingleClass, "training data must contain both classes");
}

}  // namespace

LinearModel train_pa1(const Eigen::MatrixXd& features, std::span<const int> labels, double C,
                      std::size_t passes, std::uint64_t seed) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    fail(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  }
  require_both_classes(labels);
  const Eigen::Index d = features.cols();
  LinearModel model{Eigen::VectorXd::Zero(d + 1), C};

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  Eigen::VectorXd x_aug(d + 1);
  x_aug(d) = 1.0;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t i : order) {
      x_aug.head(d) = features.row(static_cast<Eigen::Index>(i)).transpose();
      pa1_update(model.weights, x_aug, labels[i], C);
    }
  }
  return model;
}

double decision_value(const LinearModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.feature_dim()) {
    fail(ErrorCode::DimensionMismatch, "feature has " + std::to_string(x.size()) +
                                           " values, model expects " +
                                           std::to_string(model.feature_dim()));
  }
  return model.weights.head(x.size()).dot(x) + model.weights(x.size());
}

Label classify_value(double value) { return value > 0.0 ? Label::Error : Label::Correct; }

Label classify(const LinearModel& model, const Eigen::VectorXd& x) {
  return classify_value(decision_value(model, x));
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k) {
    fail(ErrorCode::ClassTooSmall, "each class needs at least " + std::to_string(k) +
                                       " members (have " + std::to_string(pos.size()) + " / " +
                                       std::to_string(neg.size()) + ")");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(std::span<std::size_t>(*cls));
    for (std::size_t j = 0; j < cls->size(); ++j) folds[j % k].push_back((*cls)[j]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<double> default_C_grid() {
  std::vector<double> grid;
  for (int e = 0; e >= -6; --e) grid.push_back(std::pow(10.0, e));
  return grid;
}

GridSearchResult grid_search_C(const Eigen::MatrixXd& features, std::span<const int> labels,
                               std::span<const double> grid, std::size_t k, std::size_t passes,
                               std::uint64_t seed) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "empty C grid");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    fail(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  }
  const auto folds = stratified_folds(labels, k, seed);

  // Fold partitions and their normalized matrices do not depend on C.
  struct Split {
    Eigen::MatrixXd train_x, val_x;
    std::vector<int> train_y, val_y;
  };
  std::vector<Split> splits;
  splits.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<char> in_val(labels.size(), 0);
    for (std::size_t i : folds[f]) in_val[i] = 1;
    std::vector<Eigen::Index> train_idx, val_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (in_val[i] ? val_idx : train_idx).push_back(static_cast<Eigen::Index>(i));
    }
    Split s;
    s.train_x = features(train_idx, Eigen::all);
    s.val_x = features(val_idx, Eigen::all);
    for (auto i : train_idx) s.train_y.push_back(labels[static_cast<std::size_t>(i)]);
    for (auto i : val_idx) s.val_y.push_back(labels[static_cast<std::size_t>(i)]);
    const FeatureNormalizer norm = fit_normalizer(s.train_x);
    s.train_x = norm.apply_rows(s.train_x);
    s.val_x = norm.apply_rows(s.val_x);
    splits.push_back(std::move(s));
  }

  GridSearchResult result;
  result.grid.assign(grid.begin(), grid.end());
  double best = -1.0;
  for (double C : grid) {
    double sum = 0.0;
    for (const Split& s : splits) {
      const LinearModel model = train_pa1(s.train_x, s.train_y, C, passes, seed);
      ConfusionCounts counts;
      for (Eigen::Index r = 0; r < s.val_x.rows(); ++r) {
        const Label truth = s.val_y[static_cast<std::size_t>(r)] > 0 ? Label::Error : Label::Correct;
        counts.add(truth, classify(model, s.val_x.row(r).transpose()));
      }
      sum += balanced_accuracy(counts);
    }
    const double mean = sum / static_cast<double>(splits.size());
    result.mean_bacc.push_back(mean);
    if (mean > best) {
      best = mean;
      result.best_C = C;
    }
  }
  return result;
}

}  // namespace errp
