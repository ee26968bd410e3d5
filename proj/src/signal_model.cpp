#include "errp/signal_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "errp/error.hpp"

namespace errp {

std::int64_t frame_index(double time_s, double sample_rate_hz) {
  return static_cast<std::int64_t>(std::floor(time_s * sample_rate_hz + kFrameEpsilon));
}

std::size_t frame_count(double length_s, double sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(length_s * sample_rate_hz));
}

Recording::Recording(double sample_rate_hz, std::vector<std::string> channel_names,
                     std::vector<float> samples)
    : sample_rate_hz_(sample_rate_hz),
      channel_names_(std::move(channel_names)),
      samples_(std::move(samples)) {
  if (channel_names_.empty()) fail(ErrorCode::InvalidArgument, "recording needs at least one channel");
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  if (samples_.size() % channel_names_.size() != 0) {
    fail(ErrorCode::InvalidArgument, "sample count is not a multiple of the channel count");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      fail(ErrorCode::InvalidArgument, "non-finite sample at frame " +
                                           std::to_string(i / channel_names_.size()));
    }
  }
}

std::span<const float> Recording::frames(std::size_t first, std::size_t count) const {
  if (first + count > n_frames()) {
    fail(ErrorCode::OutOfBounds, "frames [" + std::to_string(first) + ", " +
                                     std::to_string(first + count) + ") exceed recording of " +
                                     std::to_string(n_frames()) + " frames");
  }
  return std::span<const float>(samples_).subspan(first * n_channels(), count * n_channels());
}

namespace {
constexpr std::array<std::string_view, 4> kKindNames{"episode_start", "movement_onset",
                                                     "gesture_onset", "episode_end"};
}

std::string_view to_string(MarkerKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::string_view to_string(Label label) { return label == Label::Error ? "error" : "correct"; }

std::optional<MarkerKind> parse_marker_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<MarkerKind>(i);
  }
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "correct") return Label::Correct;
  if (text == "error") return Label::Error;
  return std::nullopt;
}

double EpisodeTimeline::time_of(MarkerKind kind) const {
  switch (kind) {
    case MarkerKind::EpisodeStart: return t_start_s;
    case MarkerKind::MovementOnset: return t_movement_s;
    case MarkerKind::GestureOnset: return t_gesture_s;
    case MarkerKind::EpisodeEnd: return t_end_s;
  }
  return t_start_s;
}

std::vector<EpisodeTimeline> episode_timelines(std::span<const MarkerEvent> markers) {
  struct Partial {
    std::array<std::optional<double>, 4> times;
    Label label{Label::Correct};
  };
  std::map<std::int64_t, Partial> by_id;
  for (const auto& m : markers) {
    auto [it, inserted] = by_id.try_emplace(m.episode_id);
    Partial& p = it->second;
    if (inserted) {
      p.label = m.label;
    } else if (p.label != m.label) {
      fail(ErrorCode::InvalidArgument,
           "episode " + std::to_string(m.episode_id) + " has conflicting labels");
    }
    auto& slot = p.times[static_cast<std::size_t>(m.kind)];
    if (slot) {
      fail(ErrorCode::MissingMarker, "episode " + std::to_string(m.episode_id) +
                                         " has a duplicate " + std::string(to_string(m.kind)) +
                                         " marker");
    }
    slot = m.time_s;
  }

  std::vector<EpisodeTimeline> out;
  out.reserve(by_id.size());
  for (const auto& [id, p] : by_id) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      if (!p.times[k]) {
        fail(ErrorCode::MissingMarker, "episode " + std::to_string(id) + " lacks " +
                                           std::string(kKindNames[k]));
      }
    }
    EpisodeTimeline tl{id, p.label, *p.times[0], *p.times[1], *p.times[2], *p.times[3]};
    if (!(tl.t_start_s < tl.t_movement_s && tl.t_movement_s < tl.t_gesture_s &&
          tl.t_gesture_s < tl.t_end_s)) {
      std::ostringstream msg;
      msg << "episode " << id << " markers out of order (" << tl.t_start_s << ", "
          << tl.t_movement_s << ", " << tl.t_gesture_s << ", " << tl.t_end_s << ")";
      fail(ErrorCode::OrderViolation, msg.str());
    }
    out.push_back(tl);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.t_start_s < b.t_start_s;
  });
  return out;
}

std::vector<MarkerEvent> timeline_markers(std::span<const EpisodeTimeline> timelines) {
  std::vector<MarkerEvent> out;
  out.reserve(timelines.size() * 4);
  for (const auto& tl : timelines) {
    for (auto kind : {MarkerKind::EpisodeStart, MarkerKind::MovementOnset,
                      MarkerKind::GestureOnset, MarkerKind::EpisodeEnd}) {
      out.push_back({tl.time_of(kind), kind, tl.episode_id, tl.label});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.time_s < b.time_s; });
  return out;
}

std::string_view to_string(Anchor anchor) {
  return anchor == Anchor::MovementOnset ? "movement_onset" : "gesture_onset";
}

std::string_view to_string(Alignment alignment) {
  return alignment == Alignment::StartsAt ? "starts_at" : "ends_at";
}

std::optional<Anchor> parse_anchor(std::string_view text) {
  if (text == "movement_onset") return Anchor::MovementOnset;
  if (text == "gesture_onset") return Anchor::GestureOnset;
  return std::nullopt;
}

std::optional<Alignment> parse_alignment(std::string_view text) {
  if (text == "starts_at") return Alignment::StartsAt;
  if (text == "ends_at") return Alignment::EndsAt;
  return std::nullopt;
}

Interval resolve_window(const WindowSpec& spec, const EpisodeTimeline& timeline) {
  if (!(spec.length_s > 0.0)) fail(ErrorCode::InvalidArgument, "window length must be positive");
  const double anchor = spec.anchor == Anchor::MovementOnset ? timeline.t_movement_s
                                                             : timeline.t_gesture_s;
  const double t0 = spec.alignment == Alignment::EndsAt ? anchor + spec.offset_s - spec.length_s
                                                        : anchor + spec.offset_s;
  return {t0, t0 + spec.length_s};
}

Interval resolve_window(const WindowSpec& spec, const EpisodeTimeline& timeline,
                        double duration_s) {
  const Interval iv = resolve_window(spec, timeline);
  constexpr double tol = 1e-9;
  if (iv.start_s < -tol || iv.end_s > duration_s + tol) {
    std::ostringstream msg;
    msg << "window [" << iv.start_s << ", " << iv.end_s << ") of episode "
        << timeline.episode_id << " exits recording [0, " << duration_s << ")";
    fail(ErrorCode::OutOfBounds, msg.str());
  }
  return iv;
}

}  // namespace errp
