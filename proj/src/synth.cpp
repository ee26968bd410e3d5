#include "errp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include <json.hpp>

#include "errp/error.hpp"
#include "errp/io_formats.hpp"
#include "errp/rng.hpp"

namespace errp {

namespace {

// Seed roles; see derive_seed().
constexpr std::uint64_t kRoleLabels = 1;
constexpr std::uint64_t kRoleAlpha = 2;
constexpr std::uint64_t kRoleNoise = 1000;
constexpr std::uint64_t kRoleJitter = 100000;

constexpr std::size_t kFftLen = 65536;
constexpr std::size_t kKernelLen = 16385;

double biphasic(double t) {
  const double neg = (t - 0.15) / 0.05;
  const double pos = (t - 0.35) / 0.09;
  return -0.6 * std::exp(-0.5 * neg * neg) + std::exp(-0.5 * pos * pos);
}

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    time_ = fftw_alloc_real(n);
    freq_ = fftw_alloc_complex(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), time_, freq_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq_, time_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(time_);
    fftw_free(freq_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::span<double> time() { return {time_, n_}; }
  std::span<fftw_complex> freq() { return {freq_, n_ / 2 + 1}; }
  void forward() { fftw_execute(forward_); }
  // Unnormalized: the result is n times the inverse transform.
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  double* time_;
  fftw_complex* freq_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

// 1/sqrt(f) amplitude shaping (1/f power), zero-phase, Hann-truncated to
// kKernelLen taps; returned as its kFftLen-point spectrum.
std::vector<std::complex<double>> pink_kernel_spectrum(double sample_rate_hz, RealFft& fft) {
  const std::size_t bins = kFftLen / 2 + 1;
  const double f_floor = sample_rate_hz / static_cast<double>(kKernelLen);
  auto freq = fft.freq();
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(kFftLen);
    freq[k][0] = k == 0 ? 0.0 : 1.0 / std::sqrt(std::max(f, f_floor));
    freq[k][1] = 0.0;
  }
  fft.inverse();
  std::vector<double> full(fft.time().begin(), fft.time().end());

  const std::size_t mid = (kKernelLen - 1) / 2;
  auto time = fft.time();
  std::fill(time.begin(), time.end(), 0.0);
  double energy = 0.0;
  for (std::size_t j = 0; j < kKernelLen; ++j) {
    const std::size_t src = (j + kFftLen - mid) % kFftLen;
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                             static_cast<double>(kKernelLen - 1));
    time[j] = full[src] * hann;
    energy += time[j] * time[j];
  }
  // Unit-energy kernel so white unit-variance input gives unit-variance output.
  const double scale = 1.0 / std::sqrt(energy);
  for (std::size_t j = 0; j < kKernelLen; ++j) time[j] *= scale;
  fft.forward();
  std::vector<std::complex<double>> spectrum(bins);
  for (std::size_t k = 0; k < bins; ++k) spectrum[k] = {freq[k][0], freq[k][1]};
  return spectrum;
}

// Overlap-add convolution of seeded white noise with the pink kernel; the
// kernel is centred so the output has no delay.
std::vector<double> pink_noise(std::size_t n_frames, std::uint64_t seed,
                               const std::vector<std::complex<double>>& kernel, RealFft& fft) {
  Rng rng(seed);
  std::vector<double> white(n_frames);
  for (auto& v : white) v = rng.normal();

  std::vector<double> out(n_frames, 0.0);
  const std::size_t block = kFftLen - kKernelLen + 1;
  const auto mid = static_cast<std::ptrdiff_t>((kKernelLen - 1) / 2);
  auto time = fft.time();
  auto freq = fft.freq();
  const double inv_n = 1.0 / static_cast<double>(kFftLen);
  for (std::size_t start = 0; start < n_frames; start += block) {
    const std::size_t len = std::min(block, n_frames - start);
    std::fill(time.begin(), time.end(), 0.0);
    std::copy_n(white.begin() + static_cast<std::ptrdiff_t>(start), len, time.begin());
    fft.forward();
    for (std::size_t k = 0; k < freq.size(); ++k) {
      const std::complex<double> y = std::complex<double>(freq[k][0], freq[k][1]) * kernel[k];
      freq[k][0] = y.real();
      freq[k][1] = y.imag();
    }
    fft.inverse();
    for (std::size_t n = 0; n < kFftLen; ++n) {
      const std::ptrdiff_t dst = static_cast<std::ptrdiff_t>(start + n) - mid;
      if (dst < 0 || dst >= static_cast<std::ptrdiff_t>(n_frames)) continue;
      out[static_cast<std::size_t>(dst)] += time[n] * inv_n;
    }
  }
  return out;
}

std::size_t clamp_frame(double t, double rate, std::size_t n_frames) {
  const std::int64_t f = frame_index(t, rate);
  return static_cast<std::size_t>(std::clamp<std::int64_t>(f, 0, static_cast<std::int64_t>(n_frames)));
}

}  // namespace

double ErrPTemplate::value(double t) const {
  if (t < 0.0 || t > kSupportS) return 0.0;
  const double g0 = biphasic(0.0);
  const double g1 = biphasic(kSupportS);
  const double frac = t / kSupportS;
  return amplitude_uv * (biphasic(t) - (g0 * (1.0 - frac) + g1 * frac));
}

std::vector<double> default_template_weights(std::size_t n_channels) {
  static constexpr std::array<double, 8> kWeights{0.2, 0.2, 0.15, 0.1, 0.1, 0.1, 0.075, 0.075};
  std::vector<double> w(n_channels, 0.0);
  const std::size_t used = std::min(n_channels, kWeights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < used; ++i) sum += kWeights[i];
  for (std::size_t i = 0; i < used; ++i) w[i] = kWeights[i] / sum;
  return w;
}

std::vector<std::string> default_channel_names(std::size_t n_channels) {
  static const std::array<std::string, 8> kNames{"Fz", "FCz", "Cz", "FC1", "FC2", "F1", "F2", "C1"};
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_channels; ++i) {
    if (i < kNames.size()) {
      names.push_back(kNames[i]);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "E%02zu", i + 1);
      names.emplace_back(buf);
    }
  }
  return names;
}

void validate(const SynthConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "synth config: " + what); };
  if (c.n_channels == 0) bad("n_channels must be >= 1");
  if (!(c.sample_rate_hz > 0.0)) bad("sample_rate_hz must be > 0");
  if (c.n_correct + c.n_error == 0) bad("no episodes");
  if (!(0.0 < c.movement_offset_s && c.movement_offset_s < c.gesture_offset_s &&
        c.gesture_offset_s < c.episode_length_s)) {
    bad("episode timing must satisfy 0 < movement < gesture < length");
  }
  if (c.gap_s < 0.0) bad("gap_s must be >= 0");
  if (c.noise_rms_uv < 0.0 || c.alpha_amplitude_uv < 0.0 || c.template_amplitude_uv < 0.0) {
    bad("amplitudes must be >= 0");
  }
  if (!c.template_weights.empty() && c.template_weights.size() != c.n_channels) {
    bad("template_weights must have one entry per channel");
  }
  const double earliest = c.realization_latency_s - c.realization_jitter_s;
  const double latest = c.realization_latency_s + c.realization_jitter_s + ErrPTemplate::kSupportS;
  if (c.realization_jitter_s < 0.0 || earliest < 0.0 ||
      latest > c.gesture_offset_s - c.movement_offset_s + 1.0 + 1e-12) {
    bad("template support must lie within [movement onset, gesture onset + 1 s]");
  }
}

SynthTimeline generate_timeline(const SynthConfig& config) {
  validate(config);
  std::vector<Label> labels(config.n_correct, Label::Correct);
  labels.insert(labels.end(), config.n_error, Label::Error);
  Rng rng(derive_seed(config.seed, kRoleLabels));
  rng.shuffle(std::span<Label>(labels));

  SynthTimeline out;
  const double slot = config.episode_length_s + config.gap_s;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const double t0 = static_cast<double>(e) * slot;
    out.timelines.push_back({static_cast<std::int64_t>(e), labels[e], t0,
                             t0 + config.movement_offset_s, t0 + config.gesture_offset_s,
                             t0 + config.episode_length_s});
  }
  out.markers = timeline_markers(out.timelines);
  out.duration_s = static_cast<double>(labels.size()) * slot;
  return out;
}

double realization_time(const SynthConfig& config, const EpisodeTimeline& tl) {
  double t = tl.t_movement_s + config.realization_latency_s;
  if (config.realization_jitter_s > 0.0) {
    Rng rng(derive_seed(config.seed, kRoleJitter + static_cast<std::uint64_t>(tl.episode_id)));
    t += config.realization_jitter_s * (2.0 * rng.uniform() - 1.0);
  }
  return t;
}

std::vector<float> synthesize_background(const SynthConfig& config, double duration_s,
                                         std::span<const EpisodeTimeline> timelines) {
  validate(config);
  const double rate = config.sample_rate_hz;
  const std::size_t n_frames = frame_count(duration_s, rate);
  const std::size_t n_ch = config.n_channels;
  std::vector<float> samples(n_frames * n_ch, 0.0f);

  // Alpha: one random phase per episode, shared by all channels, spanning the
  // episode and the gap that follows it.
  std::vector<double> alpha(n_frames, 0.0);
  if (config.alpha_amplitude_uv > 0.0) {
    Rng rng(derive_seed(config.seed, kRoleAlpha));
    const double slot = config.episode_length_s + config.gap_s;
    for (const auto& tl : timelines) {
      const double phase = 2.0 * std::numbers::pi * rng.uniform();
      const std::size_t lo = clamp_frame(tl.t_start_s, rate, n_frames);
      const std::size_t hi = clamp_frame(tl.t_start_s + slot, rate, n_frames);
      for (std::size_t f = lo; f < hi; ++f) {
        const double t = static_cast<double>(f) / rate - tl.t_start_s;
        alpha[f] = config.alpha_amplitude_uv *
                   std::sin(2.0 * std::numbers::pi * config.alpha_freq_hz * t + phase);
      }
    }
  }

  std::vector<double> noise(n_frames, 0.0);
  std::unique_ptr<RealFft> fft;
  std::vector<std::complex<double>> kernel;
  if (config.noise_rms_uv > 0.0 && n_frames > 0) {
    fft = std::make_unique<RealFft>(kFftLen);
    kernel = pink_kernel_spectrum(rate, *fft);
  }
  for (std::size_t c = 0; c < n_ch; ++c) {
    if (fft) {
      noise = pink_noise(n_frames, derive_seed(config.seed, kRoleNoise + c), kernel, *fft);
      double ss = 0.0;
      for (double v : noise) ss += v * v;
      const double rms = std::sqrt(ss / static_cast<double>(n_frames));
      const double gain = rms > 0.0 ? config.noise_rms_uv / rms : 0.0;
      for (auto& v : noise) v *= gain;
    }
    for (std::size_t f = 0; f < n_frames; ++f) {
      samples[f * n_ch + c] = static_cast<float>(noise[f] + alpha[f]);
    }
  }
  return samples;
}

void add_errp_templates(const SynthConfig& config, std::span<const EpisodeTimeline> timelines,
                        std::vector<float>& samples) {
  if (config.template_amplitude_uv == 0.0) return;
  const double rate = config.sample_rate_hz;
  const std::size_t n_ch = config.n_channels;
  const std::size_t n_frames = samples.size() / n_ch;
  const std::vector<double> weights = config.template_weights.empty()
                                          ? default_template_weights(n_ch)
                                          : config.template_weights;
  const ErrPTemplate tmpl{config.template_amplitude_uv};
  for (const auto& tl : timelines) {
    if (tl.label != Label::Error) continue;
    const double r = realization_time(config, tl);
    const std::size_t lo = clamp_frame(r, rate, n_frames);
    const std::size_t hi =
        std::min(n_frames, clamp_frame(r + ErrPTemplate::kSupportS, rate, n_frames) + 1);
    for (std::size_t f = lo; f < hi; ++f) {
      const double v = tmpl.value(static_cast<double>(f) / rate - r);
      if (v == 0.0) continue;
      for (std::size_t c = 0; c < n_ch; ++c) {
        if (weights[c] != 0.0) {
          samples[f * n_ch + c] = static_cast<float>(samples[f * n_ch + c] + weights[c] * v);
        }
      }
    }
  }
}

Recording synthesize_recording(const SynthConfig& config, const SynthTimeline& timeline) {
  auto samples = synthesize_background(config, timeline.duration_s, timeline.timelines);
  add_errp_templates(config, timeline.timelines, samples);
  return Recording(config.sample_rate_hz, default_channel_names(config.n_channels),
                   std::move(samples));
}

SynthConfig dataset_config(const SynthConfig& base, std::size_t index) {
  SynthConfig c = base;
  c.seed = base.seed + index;
  return c;
}

std::vector<SuiteEntry> generate_suite(const SynthConfig& config, std::size_t n_datasets,
                                       const std::filesystem::path& out_dir) {
  validate(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<SuiteEntry> entries;
  nlohmann::json manifest;
  manifest["format_version"] = 1;
  manifest["config"] = synth_config_to_json(config);
  manifest["datasets"] = nlohmann::json::array();
  for (std::size_t i = 0; i < n_datasets; ++i) {
    const SynthConfig cfg = dataset_config(config, i);
    const SynthTimeline tl = generate_timeline(cfg);
    char name[32];
    std::snprintf(name, sizeof name, "dataset_%02zu", i);
    const std::filesystem::path dir = out_dir / name;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    SuiteEntry entry{i, cfg.seed, dir / (std::string(name) + ".eegr"),
                     dir / (std::string(name) + ".markers.csv")};
    {
      const Recording rec = synthesize_recording(cfg, tl);
      save_recording(entry.recording, rec);
    }
    save_markers(entry.markers, tl.markers);
    manifest["datasets"].push_back({{"index", i},
                                    {"seed", cfg.seed},
                                    {"recording", std::filesystem::relative(entry.recording, out_dir).generic_string()},
                                    {"markers", std::filesystem::relative(entry.markers, out_dir).generic_string()},
                                    {"n_correct", cfg.n_correct},
                                    {"n_error", cfg.n_error},
                                    {"duration_s", tl.duration_s}});
    entries.push_back(std::move(entry));
  }
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

}  // namespace errp
