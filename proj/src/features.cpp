#include "errp/features.hpp"

#include <cmath>
#include <sstream>

#include "errp/error.hpp"

namespace errp {

void WindowPlan::validate() const {
  if (error_windows.empty() || correct_windows.empty()) {
    fail(ErrorCode::InvalidArgument, "window plan needs windows for both classes");
  }
  const double len = error_windows.front().length_s;
  for (const auto* list : {&error_windows, &correct_windows}) {
    for (const auto& w : *list) {
      if (!(w.length_s > 0.0)) fail(ErrorCode::InvalidArgument, "window length must be > 0");
      if (std::abs(w.length_s - len) > 1e-12) {
        fail(ErrorCode::InvalidArgument, "all plan windows must share one length");
      }
    }
  }
}

WindowPlan default_plan() {
  WindowPlan plan;
  for (double off : {0.0, -0.05, -0.1, -0.15}) {
    const WindowSpec backward{Anchor::GestureOnset, Alignment::EndsAt, off, 0.9};
    plan.error_windows.push_back(backward);
    plan.correct_windows.push_back(backward);
  }
  for (double off : {2.0, 2.5}) {
    plan.error_windows.push_back({Anchor::MovementOnset, Alignment::StartsAt, off, 0.9});
  }
  return plan;
}

bool is_evoked_anchor(const WindowSpec& spec) {
  return spec.anchor == Anchor::GestureOnset && spec.alignment == Alignment::EndsAt &&
         spec.offset_s == 0.0;
}

Eigen::VectorXd extract_feature(const Eigen::MatrixXd& pseudo, std::size_t expected_frames,
                                std::size_t expected_components) {
  const auto frames = static_cast<std::size_t>(pseudo.rows());
  const auto comps = static_cast<std::size_t>(pseudo.cols());
  if ((expected_frames != 0 && frames != expected_frames) ||
      (expected_components != 0 && comps != expected_components)) {
    fail(ErrorCode::ShapeMismatch, "pseudo window is " + std::to_string(frames) + "x" +
                                       std::to_string(comps) + ", expected " +
                                       std::to_string(expected_frames) + "x" +
                                       std::to_string(expected_components));
  }
  // Eigen is column-major, so the raw storage is already channel-major.
  return Eigen::Map<const Eigen::VectorXd>(pseudo.data(), pseudo.size());
}

std::vector<PlanWindow> collect_plan_windows(const Recording& recording,
                                             std::span<const EpisodeTimeline> timelines,
                                             const WindowPlan& plan, const Preprocessor& pre,
                                             std::size_t dataset_index) {
  plan.validate();
  std::vector<PlanWindow> out;
  for (const auto& tl : timelines) {
    const auto& specs = plan.windows_for(tl.label);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      Interval iv;
      try {
        iv = resolve_window(specs[i], tl, recording.duration_s());
      } catch (const Error& e) {
        fail(e.code(), "dataset " + std::to_string(dataset_index) + ": " + e.what());
      }
      constexpr double tol = 1e-9;
      if (iv.start_s < tl.t_start_s - tol || iv.end_s > tl.t_end_s + tol) {
        std::ostringstream msg;
        msg << "dataset " << dataset_index << " episode " << tl.episode_id << " window " << i
            << " [" << iv.start_s << ", " << iv.end_s << ") lies outside the episode ["
            << tl.t_start_s << ", " << tl.t_end_s << "]";
        fail(ErrorCode::OutOfBounds, msg.str());
      }
      out.push_back({pre.process(recording, iv), tl.label, tl.episode_id, dataset_index, i,
                     specs[i]});
    }
  }
  return out;
}

FeatureVector project_window(const PlanWindow& w, const SpatialFilter& filter) {
  return {extract_feature(apply_spatial_filter(filter, w.window.samples)), label_sign(w.label),
          w.episode_id, w.window.t_end_s};
}

std::vector<FeatureVector> project_windows(std::span<const PlanWindow> windows,
                                           const SpatialFilter& filter) {
  std::vector<FeatureVector> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(project_window(w, filter));
  return out;
}

std::vector<FeatureVector> build_training_set(std::span<const LabeledRecording> datasets,
                                              const WindowPlan& plan,
                                              const PreprocessConfig& config,
                                              const SpatialFilter& filter) {
  std::vector<FeatureVector> out;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const Preprocessor pre(config, datasets[d].recording.sample_rate_hz());
    const auto windows = collect_plan_windows(datasets[d].recording, datasets[d].timelines, plan,
                                              pre, d);
    auto projected = project_windows(windows, filter);
    out.insert(out.end(), std::make_move_iterator(projected.begin()),
               std::make_move_iterator(projected.end()));
  }
  return out;
}

Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features) {
  if (features.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(features.size()), features[0].values.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != m.cols()) {
      fail(ErrorCode::ShapeMismatch, "feature vectors differ in length");
    }
    m.row(static_cast<Eigen::Index>(i)) = features[i].values.transpose();
  }
  return m;
}

std::vector<int> feature_labels(std::span<const FeatureVector> features) {
  std::vector<int> y;
  y.reserve(features.size());
  for (const auto& f : features) y.push_back(f.label);
  return y;
}

}  // namespace errp
