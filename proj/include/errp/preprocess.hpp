#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errp/signal_model.hpp"

namespace errp {

// Rows are frames, columns are channels.
using WindowMatrix = Eigen::MatrixXd;

struct PreprocessConfig {
  double window_len_s{0.9};
  double stride_s{0.05};
  double target_rate_hz{50.0};
  double band_low_hz{0.5};
  double band_high_hz{10.0};

  bool operator==(const PreprocessConfig&) const = default;
};

// Throws InvalidArgument unless the config is usable for the given source rate.
void validate(const PreprocessConfig& config, double source_rate_hz);
// source_rate / target_rate; throws BadFactor when not an integer.
std::size_t decimation_factor(const PreprocessConfig& config, double source_rate_hz);

struct ProcessedWindow {
  WindowMatrix samples;  // frames_per_window x n_channels at target rate
  double t_end_s{0.0};
};

WindowMatrix slice_window(const Recording& recording, const Interval& interval);
// Frame-major raw samples -> window matrix.
WindowMatrix to_window(std::span<const float> frames, std::size_t n_channels);

WindowMatrix zero_mean(WindowMatrix window);

// Linear-phase anti-alias FIR (Hamming-windowed sinc) followed by keeping every
// factor-th frame from index 0. The kernel is centred on each output frame and
// the input is zero-padded beyond the window edges.
class FirDecimator {
 public:
  static constexpr std::size_t kDefaultTaps = 255;

  FirDecimator(double source_rate_hz, std::size_t factor, std::size_t n_taps = kDefaultTaps);

  std::size_t factor() const { return factor_; }
  double cutoff_hz() const { return cutoff_hz_; }
  const std::vector<double>& taps() const { return taps_; }

  // Throws BadFactor when the frame count is not a multiple of the factor.
  WindowMatrix apply(const WindowMatrix& window) const;

 private:
  std::size_t factor_;
  double cutoff_hz_;
  std::vector<double> taps_;
};

WindowMatrix decimate(const WindowMatrix& window, double source_rate_hz, std::size_t factor);

struct Biquad {
  double b0, b1, b2;
  double a1, a2;  // a0 == 1
};

// Butterworth band-pass from an order-4 low-pass prototype (8 poles), as four
// second-order sections (bilinear transform with pre-warping). Filtering runs
// causally from zero state on each call.
class ButterworthBandpass {
 public:
  ButterworthBandpass(double low_hz, double high_hz, double sample_rate_hz,
                      std::size_t prototype_order = 4);

  const std::vector<Biquad>& sections() const { return sections_; }
  double sample_rate_hz() const { return sample_rate_hz_; }

  std::vector<double> filter(std::span<const double> x) const;
  WindowMatrix apply(const WindowMatrix& window) const;
  // Analytic response H(e^{jw}) at the given frequency.
  std::complex<double> response(double freq_hz) const;

 private:
  double sample_rate_hz_;
  std::vector<Biquad> sections_;
};

WindowMatrix bandpass(const WindowMatrix& window, const PreprocessConfig& config);

// The full per-window chain: slice -> zero mean -> decimate -> band-pass.
// Filter designs are built once; process() is const and thread-safe.
class Preprocessor {
 public:
  Preprocessor(const PreprocessConfig& config, double source_rate_hz);

  const PreprocessConfig& config() const { return config_; }
  double source_rate_hz() const { return source_rate_hz_; }
  std::size_t frames_in() const { return frames_in_; }
  std::size_t frames_out() const { return frames_in_ / decimator_.factor(); }

  // Raw frame-major samples of exactly frames_in() frames.
  ProcessedWindow process(std::span<const float> frames, std::size_t n_channels,
                          double t_end_s) const;
  ProcessedWindow process(const Recording& recording, const Interval& interval) const;
  // Window of the configured length ending at t_end_s.
  ProcessedWindow process_ending_at(const Recording& recording, double t_end_s) const;

 private:
  PreprocessConfig config_;
  double source_rate_hz_;
  std::size_t frames_in_;
  FirDecimator decimator_;
  ButterworthBandpass bandpass_;
};

ProcessedWindow preprocess_window(const Recording& recording, const Interval& interval,
                                  const PreprocessConfig& config);

// End times t_from + L + k * stride that stay <= t_to.
std::vector<double> sliding_window_ends(double t_from_s, double t_to_s, double stride_s,
                                        double length_s);
std::size_t sliding_window_count(double t_from_s, double t_to_s, double stride_s, double length_s);
inline double sliding_window_end(double t_from_s, double stride_s, double length_s,
                                 std::size_t k) {
  return t_from_s + length_s + static_cast<double>(k) * stride_s;
}

}  // namespace errp
