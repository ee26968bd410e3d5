#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errp/preprocess.hpp"
#include "errp/signal_model.hpp"
#include "errp/xdawn.hpp"

namespace errp {

// Per-class training windows. Error episodes use backward windows ending at
// gesture onset plus forward windows after movement onset; correct episodes
// use only the backward windows.
struct WindowPlan {
  std::vector<WindowSpec> error_windows;
  std::vector<WindowSpec> correct_windows;

  const std::vector<WindowSpec>& windows_for(Label label) const {
    return label == Label::Error ? error_windows : correct_windows;
  }
  std::size_t total_windows() const { return error_windows.size() + correct_windows.size(); }
  // Throws InvalidArgument on empty lists or unequal window lengths.
  void validate() const;

  bool operator==(const WindowPlan&) const = default;
};

WindowPlan default_plan();

// The backward window ending exactly at gesture onset; error-class windows of
// this shape feed the xDAWN evoked estimate.
bool is_evoked_anchor(const WindowSpec& spec);

struct FeatureVector {
  Eigen::VectorXd values;
  int label{-1};  // +1 error, -1 correct
  std::int64_t episode_id{0};
  double window_end_s{0.0};
};

// Channel-major flattening: values[frames * c + t] = pseudo(t, c).
// Throws ShapeMismatch if the window is not expected_frames x expected_components
// (zero means "any").
Eigen::VectorXd extract_feature(const Eigen::MatrixXd& pseudo, std::size_t expected_frames = 0,
                                std::size_t expected_components = 0);

// A preprocessed plan window with its provenance.
struct PlanWindow {
  ProcessedWindow window;
  Label label{Label::Correct};
  std::int64_t episode_id{0};
  std::size_t dataset{0};
  std::size_t window_index{0};
  WindowSpec spec;
};

struct LabeledRecording {
  Recording recording;
  std::vector<EpisodeTimeline> timelines;
};

// Every plan window of every episode, in (episode, window index) order. Each
// window must lie inside its episode and the recording (OutOfBounds otherwise).
std::vector<PlanWindow> collect_plan_windows(const Recording& recording,
                                             std::span<const EpisodeTimeline> timelines,
                                             const WindowPlan& plan, const Preprocessor& pre,
                                             std::size_t dataset_index = 0);

FeatureVector project_window(const PlanWindow& window, const SpatialFilter& filter);
std::vector<FeatureVector> project_windows(std::span<const PlanWindow> windows,
                                           const SpatialFilter& filter);

// Ordered by (dataset, episode, window index).
std::vector<FeatureVector> build_training_set(std::span<const LabeledRecording> datasets,
                                              const WindowPlan& plan,
                                              const PreprocessConfig& config,
                                              const SpatialFilter& filter);

// Rows = feature vectors.
Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features);
std::vector<int> feature_labels(std::span<const FeatureVector> features);

}  // namespace errp
