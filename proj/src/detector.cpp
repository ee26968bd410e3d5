#include "errp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "errp/error.hpp"

namespace errp {

std::vector<double> detection_window_ends(const EpisodeTimeline& tl, const PreprocessConfig& pre,
                                          const DetectorConfig& config) {
  return sliding_window_ends(tl.t_movement_s, tl.t_gesture_s + config.end_after_gesture_s,
                             pre.stride_s, pre.window_len_s);
}

namespace {

void check_channels(const TrainedModel& model, std::size_t n_channels) {
  if (model.filter.n_channels() != n_channels) {
    fail(ErrorCode::DimensionMismatch, "model expects " +
                                           std::to_string(model.filter.n_channels()) +
                                           " channels, data has " + std::to_string(n_channels));
  }
}

}  // namespace

std::vector<DetectionEvent> detect_batch(const Recording& recording,
                                         std::span<const EpisodeTimeline> timelines,
                                         const TrainedModel& model, const DetectorConfig& config) {
  check_channels(model, recording.n_channels());
  const Preprocessor pre(model.preprocess, recording.sample_rate_hz());
  std::vector<DetectionEvent> events;
  for (const auto& tl : timelines) {
    for (double t_end : detection_window_ends(tl, model.preprocess, config)) {
      const double value = model.score(pre.process_ending_at(recording, t_end));
      events.push_back({t_end, value, classify_value(value), tl.episode_id});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.window_end_s < b.window_end_s;
  });
  return events;
}

Label aggregate_episode(std::span<const DetectionEvent> events, double threshold) {
  if (events.empty()) fail(ErrorCode::NoEvaluableWindows, "no windows to aggregate");
  const auto n_error = std::count_if(events.begin(), events.end(), [](const auto& e) {
    return e.predicted_label == Label::Error;
  });
  const double fraction = static_cast<double>(n_error) / static_cast<double>(events.size());
  return fraction >= threshold ? Label::Error : Label::Correct;
}

EvaluationReport evaluate(std::span<const DetectionEvent> events,
                          std::span<const EpisodeTimeline> timelines,
                          const EvaluationConfig& config) {
  constexpr double tol = 1e-6;
  std::map<std::int64_t, std::vector<DetectionEvent>> by_episode;
  for (const auto& e : events) by_episode[e.episode_id].push_back(e);

  EvaluationReport report;
  double error_hits = 0.0, correct_hits = 0.0;
  std::size_t n_error_eps = 0, n_correct_eps = 0;
  for (const auto& tl : timelines) {
    const double lo = tl.t_start_s + config.from_s;
    const double hi = tl.t_start_s + config.to_s;
    std::vector<DetectionEvent> counted;
    if (auto it = by_episode.find(tl.episode_id); it != by_episode.end()) {
      for (const auto& e : it->second) {
        if (e.window_end_s >= lo - tol && e.window_end_s <= hi + tol) counted.push_back(e);
      }
    }
    if (counted.empty()) {
      std::ostringstream msg;
      msg << "episode " << tl.episode_id << " has no detections ending in [" << lo << ", " << hi
          << "]";
      fail(ErrorCode::NoEvaluableWindows, msg.str());
    }
    EpisodeEvaluation ep;
    ep.episode_id = tl.episode_id;
    ep.truth = tl.label;
    ep.n_windows = counted.size();
    for (const auto& e : counted) {
      report.counts.add(tl.label, e.predicted_label);
      if (e.predicted_label == Label::Error) ++ep.n_error_windows;
    }
    ep.error_fraction = static_cast<double>(ep.n_error_windows) / static_cast<double>(ep.n_windows);
    ep.verdict = aggregate_episode(counted, config.verdict_threshold);
    report.verdict_counts.add(tl.label, ep.verdict);
    if (tl.label == Label::Error) {
      error_hits += ep.error_fraction;
      ++n_error_eps;
    } else {
      correct_hits += 1.0 - ep.error_fraction;
      ++n_correct_eps;
    }
    report.episodes.push_back(ep);
  }
  if (report.episodes.empty()) fail(ErrorCode::NoEvaluableWindows, "no episodes to evaluate");
  report.tpr = true_positive_rate(report.counts);
  report.tnr = true_negative_rate(report.counts);
  report.bacc = balanced_accuracy(report.counts);
  report.episode_mean_bacc = (error_hits / static_cast<double>(n_error_eps) +
                              correct_hits / static_cast<double>(n_correct_eps)) /
                             2.0;
  return report;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

StreamDetector::StreamDetector(const TrainedModel& model, std::size_t n_channels,
                               double sample_rate_hz, const DetectorConfig& config,
                               double buffer_s)
    : model_(model),
      config_(config),
      pre_(model.preprocess, sample_rate_hz),
      n_channels_(n_channels),
      sample_rate_hz_(sample_rate_hz),
      capacity_frames_(frame_count(buffer_s, sample_rate_hz)) {
  check_channels(model, n_channels);
  if (capacity_frames_ < pre_.frames_in()) {
    fail(ErrorCode::InvalidArgument, "stream buffer shorter than one window");
  }
  ring_.assign(capacity_frames_ * n_channels_, 0.0f);
  scratch_.resize(pre_.frames_in() * n_channels_);
}

double StreamDetector::window_end(const Episode& ep, std::size_t k) const {
  return sliding_window_end(*ep.t_movement, model_.preprocess.stride_s,
                            model_.preprocess.window_len_s, k);
}

std::optional<std::size_t> StreamDetector::window_limit(const Episode& ep) const {
  if (!ep.t_gesture) return std::nullopt;
  return sliding_window_count(*ep.t_movement, *ep.t_gesture + config_.end_after_gesture_s,
                              model_.preprocess.stride_s, model_.preprocess.window_len_s);
}

std::uint64_t StreamDetector::window_first_frame(double t_end) const {
  const std::int64_t first = frame_index(t_end - model_.preprocess.window_len_s, sample_rate_hz_);
  if (first < 0) fail(ErrorCode::OutOfBounds, "detection window starts before the stream");
  return static_cast<std::uint64_t>(first);
}

std::optional<std::uint64_t> StreamDetector::next_boundary() const {
  std::optional<std::uint64_t> best;
  for (const auto& [id, ep] : episodes_) {
    if (!ep.t_movement) continue;
    const auto limit = window_limit(ep);
    if (limit && ep.next_window >= *limit) continue;
    const std::uint64_t last = window_first_frame(window_end(ep, ep.next_window)) + pre_.frames_in();
    if (!best || last < *best) best = last;
  }
  return best;
}

void StreamDetector::append(std::span<const float> frames) {
  const std::size_t n = frames.size() / n_channels_;
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t slot = static_cast<std::size_t>((received_ + f) % capacity_frames_);
    std::copy_n(frames.data() + f * n_channels_, n_channels_, ring_.data() + slot * n_channels_);
  }
  received_ += n;
}

DetectionEvent StreamDetector::score(std::int64_t episode_id, double t_end) {
  const std::uint64_t first = window_first_frame(t_end);
  const std::uint64_t oldest = received_ > capacity_frames_ ? received_ - capacity_frames_ : 0;
  if (first < oldest) {
    std::ostringstream msg;
    msg << "window ending at " << t_end << " s needs frame " << first
        << " but the buffer only holds frames from " << oldest;
    fail(ErrorCode::BufferOverrun, msg.str());
  }
  for (std::size_t f = 0; f < pre_.frames_in(); ++f) {
    const std::size_t slot = static_cast<std::size_t>((first + f) % capacity_frames_);
    std::copy_n(ring_.data() + slot * n_channels_, n_channels_, scratch_.data() + f * n_channels_);
  }
  const double value = model_.score(pre_.process(scratch_, n_channels_, t_end));
  return {t_end, value, classify_value(value), episode_id};
}

void StreamDetector::drain(std::vector<DetectionEvent>& out) {
  for (;;) {
    std::int64_t best_id = 0;
    std::optional<double> best_end;
    for (const auto& [id, ep] : episodes_) {
      if (!ep.t_movement) continue;
      const auto limit = window_limit(ep);
      if (limit && ep.next_window >= *limit) continue;
      const double t_end = window_end(ep, ep.next_window);
      if (window_first_frame(t_end) + pre_.frames_in() > received_) continue;
      if (!best_end || t_end < *best_end) {
        best_end = t_end;
        best_id = id;
      }
    }
    if (!best_end) break;
    if (last_emitted_ && *best_end <= *last_emitted_) {
      std::ostringstream msg;
      msg << "window ending at " << *best_end << " s would be emitted after " << *last_emitted_
          << " s (late marker for episode " << best_id << ")";
      fail(ErrorCode::OrderViolation, msg.str());
    }
    out.push_back(score(best_id, *best_end));
    last_emitted_ = *best_end;
    ++episodes_[best_id].next_window;
  }
  std::erase_if(episodes_, [this](const auto& item) {
    const auto& ep = item.second;
    if (!ep.t_movement) return false;
    const auto limit = window_limit(ep);
    return limit && ep.next_window >= *limit;
  });
}

std::vector<DetectionEvent> StreamDetector::push_marker(const MarkerEvent& marker) {
  Episode& ep = episodes_[marker.episode_id];
  if (marker.kind == MarkerKind::MovementOnset) ep.t_movement = marker.time_s;
  if (marker.kind == MarkerKind::GestureOnset) ep.t_gesture = marker.time_s;
  std::vector<DetectionEvent> out;
  drain(out);
  return out;
}

std::vector<DetectionEvent> StreamDetector::push_samples(std::uint64_t start_frame,
                                                         std::span<const float> frames) {
  if (frames.size() % n_channels_ != 0) {
    fail(ErrorCode::LengthMismatch, "chunk is not a whole number of frames");
  }
  if (start_frame != received_) {
    fail(ErrorCode::ChunkOutOfOrder, "chunk starts at frame " + std::to_string(start_frame) +
                                         ", expected " + std::to_string(received_));
  }
  std::vector<DetectionEvent> out;
  std::size_t offset = 0;
  const std::size_t n = frames.size() / n_channels_;
  while (offset < n) {
    std::size_t take = n - offset;
    // Stop at the next window completion so its frames are still buffered.
    if (const auto boundary = next_boundary(); boundary && *boundary > received_) {
      take = static_cast<std::size_t>(std::min<std::uint64_t>(take, *boundary - received_));
    }
    take = std::min(take, capacity_frames_);
    append(frames.subspan(offset * n_channels_, take * n_channels_));
    offset += take;
    drain(out);
  }
  return out;
}

std::vector<DetectionEvent> StreamDetector::finish() {
  std::vector<DetectionEvent> out;
  drain(out);
  return out;
}

}  // namespace errp
