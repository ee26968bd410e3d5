#include "errp/pipeline.hpp"

#include "errp/error.hpp"

namespace errp {

std::size_t TrainedModel::frames_per_window() const {
  return frame_count(preprocess.window_len_s, preprocess.target_rate_hz);
}

Eigen::VectorXd TrainedModel::features(const ProcessedWindow& window) const {
  const Eigen::VectorXd raw = extract_feature(apply_spatial_filter(filter, window.samples),
                                              frames_per_window(), filter.n_components());
  return normalizer.apply(raw);
}

double TrainedModel::score(const ProcessedWindow& window) const {
  return decision_value(classifier, features(window));
}

TrainedModel train_model(std::span<const PlanWindow> windows, const PipelineConfig& config,
                         double sample_rate_hz, std::vector<std::string> channel_names,
                         std::size_t n_datasets) {
  if (windows.empty()) fail(ErrorCode::TooFewWindows, "no training windows");

  std::vector<ProcessedWindow> evoked_windows;
  std::vector<ProcessedWindow> all_windows;
  all_windows.reserve(windows.size());
  for (const auto& w : windows) {
    all_windows.push_back(w.window);
    if (w.label == Label::Error && is_evoked_anchor(w.spec)) evoked_windows.push_back(w.window);
  }
  if (evoked_windows.empty()) {
    // Plans without the gesture-onset window fall back to their first error window.
    for (const auto& w : windows) {
      if (w.label == Label::Error && w.window_index == 0) evoked_windows.push_back(w.window);
    }
  }

  TrainedModel model;
  model.preprocess = config.preprocess;
  model.filter = train_xdawn(estimate_evoked(evoked_windows), all_windows,
                             config.xdawn.n_components, config.xdawn.ridge);

  const auto features = project_windows(windows, model.filter);
  const Eigen::MatrixXd x = feature_matrix(features);
  const std::vector<int> y = feature_labels(features);

  const GridSearchResult grid = grid_search_C(x, y, config.pa1.grid, config.pa1.folds,
                                              config.pa1.passes, config.pa1.seed);
  model.normalizer = fit_normalizer(x);
  model.classifier = train_pa1(model.normalizer.apply_rows(x), y, grid.best_C, config.pa1.passes,
                               config.pa1.seed);

  auto& meta = model.meta;
  meta.n_datasets = n_datasets;
  meta.n_vectors = features.size();
  for (int label : y) (label > 0 ? meta.n_error_vectors : meta.n_correct_vectors) += 1;
  meta.sample_rate_hz = sample_rate_hz;
  meta.channel_names = std::move(channel_names);
  meta.plan = config.plan;
  meta.xdawn = config.xdawn;
  meta.pa1 = config.pa1;
  meta.grid = grid;
  return model;
}

TrainedModel train_model(std::span<const LabeledRecording> datasets, const PipelineConfig& config) {
  if (datasets.empty()) fail(ErrorCode::InvalidArgument, "no training datasets");
  std::vector<PlanWindow> windows;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& rec = datasets[d].recording;
    if (rec.n_channels() != datasets[0].recording.n_channels() ||
        rec.sample_rate_hz() != datasets[0].recording.sample_rate_hz()) {
      fail(ErrorCode::DimensionMismatch, "training datasets differ in channels or sample rate");
    }
    const Preprocessor pre(config.preprocess, rec.sample_rate_hz());
    auto w = collect_plan_windows(rec, datasets[d].timelines, config.plan, pre, d);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }
  return train_model(windows, config, datasets[0].recording.sample_rate_hz(),
                     datasets[0].recording.channel_names(), datasets.size());
}

}  // namespace errp
