#include "errp/plan_search.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "errp/detector.hpp"
#include "errp/error.hpp"

namespace errp {

namespace {

using EpisodeKey = std::pair<std::size_t, std::int64_t>;  // (dataset, episode id)

struct EvalEpisode {
  EpisodeKey key;
  Label label{Label::Correct};
  std::vector<ProcessedWindow> windows;
};

std::vector<EvalEpisode> evaluation_windows(std::span<const LabeledRecording> datasets,
                                            const PipelineConfig& config) {
  constexpr double tol = 1e-6;
  std::vector<EvalEpisode> out;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto& rec = datasets[d].recording;
    const Preprocessor pre(config.preprocess, rec.sample_rate_hz());
    for (const auto& tl : datasets[d].timelines) {
      EvalEpisode ep{{d, tl.episode_id}, tl.label, {}};
      const double lo = tl.t_start_s + config.evaluation.from_s;
      const double hi = tl.t_start_s + config.evaluation.to_s;
      for (double t_end : detection_window_ends(tl, config.preprocess, config.detection)) {
        if (t_end >= lo - tol && t_end <= hi + tol) {
          ep.windows.push_back(pre.process_ending_at(rec, t_end));
        }
      }
      if (ep.windows.empty()) {
        fail(ErrorCode::NoEvaluableWindows,
             "episode " + std::to_string(tl.episode_id) + " has no evaluation windows");
      }
      out.push_back(std::move(ep));
    }
  }
  return out;
}

PlanSearchEntry run_plan(std::span<const LabeledRecording> datasets, std::size_t index,
                         const WindowPlan& plan, const PipelineConfig& base,
                         std::span<const EvalEpisode> episodes,
                         std::span<const std::vector<std::size_t>> folds) {
  PlanSearchEntry entry;
  entry.plan_index = index;
  entry.plan = plan;
  PipelineConfig config = base;
  config.plan = plan;
  plan.validate();

  std::vector<PlanWindow> windows;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const Preprocessor pre(config.preprocess, datasets[d].recording.sample_rate_hz());
    auto w = collect_plan_windows(datasets[d].recording, datasets[d].timelines, plan, pre, d);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }

  const auto& first = datasets.front().recording;
  for (const auto& fold : folds) {
    std::set<EpisodeKey> held_out;
    for (std::size_t i : fold) held_out.insert(episodes[i].key);
    std::vector<PlanWindow> train;
    for (const auto& w : windows) {
      if (!held_out.contains({w.dataset, w.episode_id})) train.push_back(w);
    }
    const TrainedModel model = train_model(train, config, first.sample_rate_hz(),
                                           first.channel_names(), datasets.size());
    ConfusionCounts counts;
    for (std::size_t i : fold) {
      for (const auto& w : episodes[i].windows) {
        counts.add(episodes[i].label, classify_value(model.score(w)));
      }
    }
    entry.fold_bacc.push_back(balanced_accuracy(counts));
  }
  double sum = 0.0;
  for (double b : entry.fold_bacc) sum += b;
  entry.mean_bacc = sum / static_cast<double>(entry.fold_bacc.size());
  return entry;
}

}  // namespace

std::vector<PlanSearchEntry> search_window_plans(std::span<const LabeledRecording> datasets,
                                                 std::span<const WindowPlan> plans,
                                                 const PipelineConfig& config,
                                                 const PlanSearchConfig& search) {
  if (plans.empty()) fail(ErrorCode::InvalidArgument, "no candidate plans");
  if (datasets.empty()) fail(ErrorCode::InvalidArgument, "no datasets");
  for (const auto& ds : datasets) {
    if (ds.recording.n_channels() != datasets.front().recording.n_channels() ||
        ds.recording.sample_rate_hz() != datasets.front().recording.sample_rate_hz()) {
      fail(ErrorCode::DimensionMismatch, "datasets differ in channels or sample rate");
    }
  }

  const auto episodes = evaluation_windows(datasets, config);
  std::vector<int> labels;
  for (const auto& ep : episodes) labels.push_back(label_sign(ep.label));
  const auto folds = stratified_folds(labels, search.folds, search.seed);

  std::vector<PlanSearchEntry> ok, failed;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    try {
      ok.push_back(run_plan(datasets, i, plans[i], config, episodes, folds));
    } catch (const Error& e) {
      PlanSearchEntry entry;
      entry.plan_index = i;
      entry.plan = plans[i];
      entry.failed = true;
      entry.error = std::string(to_string(e.code())) + ": " + e.what();
      failed.push_back(std::move(entry));
    }
  }
  std::stable_sort(ok.begin(), ok.end(), [](const auto& a, const auto& b) {
    if (a.mean_bacc != b.mean_bacc) return a.mean_bacc > b.mean_bacc;
    if (a.plan.total_windows() != b.plan.total_windows()) {
      return a.plan.total_windows() < b.plan.total_windows();
    }
    return a.plan_index < b.plan_index;
  });
  ok.insert(ok.end(), std::make_move_iterator(failed.begin()), std::make_move_iterator(failed.end()));
  return ok;
}

}  // namespace errp
