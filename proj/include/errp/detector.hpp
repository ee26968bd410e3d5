#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "errp/pa1.hpp"
#include "errp/pipeline.hpp"
#include "errp/preprocess.hpp"
#include "errp/signal_model.hpp"

namespace errp {

struct DetectionEvent {
  double window_end_s{0.0};
  double decision_value{0.0};
  Label predicted_label{Label::Correct};
  std::int64_t episode_id{-1};

  bool operator==(const DetectionEvent&) const = default;
};

// Window end times scored for one episode: movement onset + L, stepping by the
// stride, up to gesture onset + end_after_gesture_s.
std::vector<double> detection_window_ends(const EpisodeTimeline& timeline,
                                          const PreprocessConfig& pre,
                                          const DetectorConfig& config);

std::vector<DetectionEvent> detect_batch(const Recording& recording,
                                         std::span<const EpisodeTimeline> timelines,
                                         const TrainedModel& model,
                                         const DetectorConfig& config = {});

struct EpisodeEvaluation {
  std::int64_t episode_id{0};
  Label truth{Label::Correct};
  std::size_t n_windows{0};
  std::size_t n_error_windows{0};
  double error_fraction{0.0};
  Label verdict{Label::Correct};  // aggregate, not a window-level metric
};

struct EvaluationReport {
  ConfusionCounts counts;  // pooled over every counted window
  double tpr{0.0};
  double tnr{0.0};
  double bacc{0.0};
  // Mean per-episode hit rate for each class, then averaged over the classes.
  double episode_mean_bacc{0.0};
  ConfusionCounts verdict_counts;
  std::vector<EpisodeEvaluation> episodes;
};

// Throws NoEvaluableWindows when an episode has no event in its region.
EvaluationReport evaluate(std::span<const DetectionEvent> events,
                          std::span<const EpisodeTimeline> timelines,
                          const EvaluationConfig& config = {});

// error iff the fraction of error-labelled windows >= threshold.
Label aggregate_episode(std::span<const DetectionEvent> events, double threshold = 0.5);

struct SummaryStats {
  std::size_t n{0};
  double mean{0.0};
  double std{0.0};  // sample standard deviation (n - 1)
};

SummaryStats summarize(std::span<const double> values);

// Incremental detector for one stream. Samples arrive as frame-major chunks
// with their absolute start frame; markers may arrive at any point before the
// first window that depends on them completes. Emits exactly the events
// detect_batch() would produce on the completed recording.
class StreamDetector {
 public:
  StreamDetector(const TrainedModel& model, std::size_t n_channels, double sample_rate_hz,
                 const DetectorConfig& config = {}, double buffer_s = 4.0);

  std::vector<DetectionEvent> push_marker(const MarkerEvent& marker);
  // Throws ChunkOutOfOrder unless start_frame continues the stream.
  std::vector<DetectionEvent> push_samples(std::uint64_t start_frame, std::span<const float> frames);
  std::vector<DetectionEvent> finish();

  std::uint64_t frames_received() const { return received_; }
  std::size_t n_channels() const { return n_channels_; }

 private:
  struct Episode {
    std::optional<double> t_movement;
    std::optional<double> t_gesture;
    std::size_t next_window{0};
  };

  double window_end(const Episode& ep, std::size_t k) const;
  std::optional<std::size_t> window_limit(const Episode& ep) const;
  std::uint64_t window_first_frame(double t_end) const;
  // Smallest end frame of any window still to be scored.
  std::optional<std::uint64_t> next_boundary() const;
  void append(std::span<const float> frames);
  void drain(std::vector<DetectionEvent>& out);
  DetectionEvent score(std::int64_t episode_id, double t_end);

  const TrainedModel& model_;
  DetectorConfig config_;
  Preprocessor pre_;
  std::size_t n_channels_;
  double sample_rate_hz_;
  std::size_t capacity_frames_;
  std::vector<float> ring_;
  std::vector<float> scratch_;
  std::uint64_t received_{0};
  std::map<std::int64_t, Episode> episodes_;
  std::optional<double> last_emitted_;
};

}  // namespace errp
