#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errp/features.hpp"
#include "errp/normalizer.hpp"
#include "errp/pa1.hpp"
#include "errp/preprocess.hpp"
#include "errp/xdawn.hpp"

namespace errp {

struct XdawnConfig {
  std::size_t n_components{7};
  double ridge{1e-6};

  bool operator==(const XdawnConfig&) const = default;
};

struct Pa1Config {
  std::vector<double> grid{default_C_grid()};
  std::size_t folds{5};
  std::size_t passes{1};
  std::uint64_t seed{0};

  bool operator==(const Pa1Config&) const = default;
};

// Window ends [t_start + from_s, t_start + to_s] are scored against the
// episode label.
struct EvaluationConfig {
  double from_s{6.0};
  double to_s{8.0};
  double verdict_threshold{0.5};

  bool operator==(const EvaluationConfig&) const = default;
};

// Continuous detection per episode runs from movement onset until
// gesture onset + end_after_gesture_s (the end of the pointing gesture).
struct DetectorConfig {
  double end_after_gesture_s{1.0};

  bool operator==(const DetectorConfig&) const = default;
};

struct PipelineConfig {
  PreprocessConfig preprocess;
  WindowPlan plan{default_plan()};
  XdawnConfig xdawn;
  Pa1Config pa1;
  EvaluationConfig evaluation;
  DetectorConfig detection;

  bool operator==(const PipelineConfig&) const = default;
};

struct TrainingMetadata {
  std::size_t n_datasets{0};
  std::size_t n_vectors{0};
  std::size_t n_error_vectors{0};
  std::size_t n_correct_vectors{0};
  double sample_rate_hz{0.0};
  std::vector<std::string> channel_names;
  WindowPlan plan;
  XdawnConfig xdawn;
  Pa1Config pa1;
  GridSearchResult grid;
};

// Everything needed to score a raw window: preprocessing, spatial filter,
// feature normalizer and the PA1 weights.
struct TrainedModel {
  PreprocessConfig preprocess;
  SpatialFilter filter;
  FeatureNormalizer normalizer;
  LinearModel classifier;
  TrainingMetadata meta;

  std::size_t frames_per_window() const;
  std::size_t feature_dim() const { return normalizer.dim(); }
  // Normalized feature vector of one preprocessed window.
  Eigen::VectorXd features(const ProcessedWindow& window) const;
  double score(const ProcessedWindow& window) const;
};

// Training from already-collected plan windows: xDAWN (evoked from error-class
// gesture-onset windows, or the plan's first error window when it has none;
// covariance from all windows), feature normalizer, grid search over C, then a
// final PA1 fit on all vectors.
TrainedModel train_model(std::span<const PlanWindow> windows, const PipelineConfig& config,
                         double sample_rate_hz, std::vector<std::string> channel_names,
                         std::size_t n_datasets);

TrainedModel train_model(std::span<const LabeledRecording> datasets, const PipelineConfig& config);

}  // namespace errp
