#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace errp {

// Tolerance (in frames) absorbed when converting seconds to frame indices, so
// that 7.1 s at 2 kHz maps to frame 14200 and not 14199.
inline constexpr double kFrameEpsilon = 1e-6;

// floor(t * rate), robust to decimal round-off.
std::int64_t frame_index(double time_s, double sample_rate_hz);
// round(length * rate)
std::size_t frame_count(double length_s, double sample_rate_hz);

// Multichannel recording; samples are frame-major (one frame = all channels)
// in microvolts. Immutable once constructed.
class Recording {
 public:
  Recording(double sample_rate_hz, std::vector<std::string> channel_names,
            std::vector<float> samples);

  std::size_t n_channels() const { return channel_names_.size(); }
  std::size_t n_frames() const { return samples_.size() / n_channels(); }
  double sample_rate_hz() const { return sample_rate_hz_; }
  double duration_s() const { return static_cast<double>(n_frames()) / sample_rate_hz_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  const std::vector<float>& samples() const { return samples_; }

  float at(std::size_t frame, std::size_t channel) const {
    return samples_[frame * n_channels() + channel];
  }
  // Contiguous frame-major view of frames [first, first + count).
  std::span<const float> frames(std::size_t first, std::size_t count) const;

 private:
  double sample_rate_hz_;
  std::vector<std::string> channel_names_;
  std::vector<float> samples_;
};

enum class MarkerKind : std::uint8_t {
  EpisodeStart = 0,
  MovementOnset = 1,
  GestureOnset = 2,
  EpisodeEnd = 3,
};

enum class Label : std::uint8_t { Correct = 0, Error = 1 };

std::string_view to_string(MarkerKind kind);
std::string_view to_string(Label label);
std::optional<MarkerKind> parse_marker_kind(std::string_view text);
std::optional<Label> parse_label(std::string_view text);

// Classifier target: error is the positive class.
inline int label_sign(Label label) { return label == Label::Error ? +1 : -1; }

struct MarkerEvent {
  double time_s{0.0};
  MarkerKind kind{MarkerKind::EpisodeStart};
  std::int64_t episode_id{0};
  Label label{Label::Correct};

  bool operator==(const MarkerEvent&) const = default;
};

struct EpisodeTimeline {
  std::int64_t episode_id{0};
  Label label{Label::Correct};
  double t_start_s{0.0};
  double t_movement_s{0.0};
  double t_gesture_s{0.0};
  double t_end_s{0.0};

  double time_of(MarkerKind kind) const;
  bool operator==(const EpisodeTimeline&) const = default;
};

// Groups markers per episode; result sorted by t_start_s.
// Throws MissingMarker / OrderViolation.
std::vector<EpisodeTimeline> episode_timelines(std::span<const MarkerEvent> markers);

// Inverse of episode_timelines: four markers per episode, time-ordered.
std::vector<MarkerEvent> timeline_markers(std::span<const EpisodeTimeline> timelines);

enum class Anchor : std::uint8_t { MovementOnset, GestureOnset };
enum class Alignment : std::uint8_t { StartsAt, EndsAt };

std::string_view to_string(Anchor anchor);
std::string_view to_string(Alignment alignment);
std::optional<Anchor> parse_anchor(std::string_view text);
std::optional<Alignment> parse_alignment(std::string_view text);

// A window anchored to one of the two reference points. StartsAt windows run
// forward from anchor + offset; EndsAt windows end at anchor + offset.
struct WindowSpec {
  Anchor anchor{Anchor::GestureOnset};
  Alignment alignment{Alignment::EndsAt};
  double offset_s{0.0};
  double length_s{0.9};

  bool operator==(const WindowSpec&) const = default;
};

// Half-open interval [start_s, end_s).
struct Interval {
  double start_s{0.0};
  double end_s{0.0};

  double length_s() const { return end_s - start_s; }
};

Interval resolve_window(const WindowSpec& spec, const EpisodeTimeline& timeline);
// Same, but throws OutOfBounds when the interval leaves [0, duration_s].
Interval resolve_window(const WindowSpec& spec, const EpisodeTimeline& timeline,
                        double duration_s);

}  // namespace errp
