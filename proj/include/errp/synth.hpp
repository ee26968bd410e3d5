#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "errp/signal_model.hpp"

namespace errp {

// Biphasic ERP-like waveform: a negative Gaussian bump (-0.6 x amplitude at
// +0.15 s, sigma 0.05 s) then a positive one (+1.0 x amplitude at +0.35 s,
// sigma 0.09 s), with the straight line through its support end points
// subtracted so that it is exactly zero (and continuous) at 0 and 0.8 s.
struct ErrPTemplate {
  static constexpr double kSupportS = 0.8;

  double amplitude_uv{8.0};

  double value(double t_since_realization_s) const;
};

struct SynthConfig {
  std::size_t n_channels{64};
  double sample_rate_hz{2000.0};
  std::size_t n_correct{36};
  std::size_t n_error{18};

  double movement_offset_s{3.0};
  double gesture_offset_s{8.0};
  double episode_length_s{10.0};
  double gap_s{2.0};

  double noise_rms_uv{10.0};
  double alpha_amplitude_uv{3.0};
  double alpha_freq_hz{10.0};

  // Per-channel template weights; empty selects default_template_weights().
  std::vector<double> template_weights;
  double template_amplitude_uv{8.0};
  // Realization time = movement onset + latency (+ uniform jitter in +-jitter).
  double realization_latency_s{2.4};
  double realization_jitter_s{0.0};

  std::uint64_t seed{0};
};

// Eight frontocentral placeholder channels with weights summing to 1 (fewer
// when the montage is smaller); zero elsewhere.
std::vector<double> default_template_weights(std::size_t n_channels);
std::vector<std::string> default_channel_names(std::size_t n_channels);

// Throws InvalidArgument on inconsistent settings.
void validate(const SynthConfig& config);

struct SynthTimeline {
  std::vector<EpisodeTimeline> timelines;
  std::vector<MarkerEvent> markers;
  double duration_s{0.0};
};

// n_correct + n_error episodes back to back (episode length + gap each), labels
// in seeded-shuffled order.
SynthTimeline generate_timeline(const SynthConfig& config);

// Realization time of the template in an error episode.
double realization_time(const SynthConfig& config, const EpisodeTimeline& timeline);

// Pink noise plus per-episode alpha; frame-major, n_frames x n_channels.
std::vector<float> synthesize_background(const SynthConfig& config, double duration_s,
                                         std::span<const EpisodeTimeline> timelines);
// Adds the spatially weighted template at each error episode's realization time.
void add_errp_templates(const SynthConfig& config, std::span<const EpisodeTimeline> timelines,
                        std::vector<float>& samples);

Recording synthesize_recording(const SynthConfig& config, const SynthTimeline& timeline);

struct SuiteEntry {
  std::size_t index{0};
  std::uint64_t seed{0};
  std::filesystem::path recording;
  std::filesystem::path markers;
};

// Config for dataset `index` of a suite: identical except seed = seed + index.
SynthConfig dataset_config(const SynthConfig& base, std::size_t index);

// Writes dataset_<i>/dataset_<i>.eegr + .markers.csv per dataset and a
// manifest.json. Throws IoError.
std::vector<SuiteEntry> generate_suite(const SynthConfig& config, std::size_t n_datasets,
                                       const std::filesystem::path& out_dir);

}  // namespace errp
