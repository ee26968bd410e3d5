#include "errp/preprocess.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "errp/error.hpp"

namespace errp {

namespace {

bool near_integer(double v, double tol = 1e-6) { return std::abs(v - std::round(v)) <= tol; }

}  // namespace

void validate(const PreprocessConfig& c, double source_rate_hz) {
  if (!(c.window_len_s > 0.0)) fail(ErrorCode::InvalidArgument, "window_len_s must be > 0");
  if (!(c.stride_s > 0.0)) fail(ErrorCode::InvalidArgument, "stride_s must be > 0");
  if (!(c.target_rate_hz > 0.0)) fail(ErrorCode::InvalidArgument, "target_rate_hz must be > 0");
  if (!(c.band_low_hz > 0.0 && c.band_low_hz < c.band_high_hz &&
        c.band_high_hz < c.target_rate_hz / 2.0)) {
    fail(ErrorCode::InvalidArgument, "band edges must satisfy 0 < low < high < target_rate/2");
  }
  decimation_factor(c, source_rate_hz);
  if (!near_integer(c.window_len_s * source_rate_hz) ||
      !near_integer(c.window_len_s * c.target_rate_hz)) {
    fail(ErrorCode::InvalidArgument, "window length is not a whole number of frames");
  }
}

std::size_t decimation_factor(const PreprocessConfig& c, double source_rate_hz) {
  const double ratio = source_rate_hz / c.target_rate_hz;
  if (!(ratio >= 1.0) || !near_integer(ratio, 1e-9)) {
    std::ostringstream msg;
    msg << "source rate " << source_rate_hz << " Hz is not a multiple of target rate "
        << c.target_rate_hz << " Hz";
    fail(ErrorCode::BadFactor, msg.str());
  }
  return static_cast<std::size_t>(std::llround(ratio));
}

WindowMatrix to_window(std::span<const float> frames, std::size_t n_channels) {
  const std::size_t n = frames.size() / n_channels;
  WindowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_channels));
  for (std::size_t f = 0; f < n; ++f) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c)) = frames[f * n_channels + c];
    }
  }
  return out;
}

WindowMatrix slice_window(const Recording& recording, const Interval& interval) {
  const double rate = recording.sample_rate_hz();
  if (!near_integer(interval.length_s() * rate)) {
    fail(ErrorCode::InvalidArgument, "interval length is not a whole number of frames");
  }
  const std::int64_t first = frame_index(interval.start_s, rate);
  const std::size_t count = frame_count(interval.length_s(), rate);
  if (first < 0 || static_cast<std::size_t>(first) + count > recording.n_frames()) {
    std::ostringstream msg;
    msg << "interval [" << interval.start_s << ", " << interval.end_s
        << ") outside recording of " << recording.duration_s() << " s";
    fail(ErrorCode::OutOfBounds, msg.str());
  }
  return to_window(recording.frames(static_cast<std::size_t>(first), count),
                   recording.n_channels());
}

WindowMatrix zero_mean(WindowMatrix window) {
  if (window.rows() == 0) return window;
  window.rowwise() -= window.colwise().mean();
  return window;
}

FirDecimator::FirDecimator(double source_rate_hz, std::size_t factor, std::size_t n_taps)
    : factor_(factor), taps_(n_taps) {
  if (factor == 0) fail(ErrorCode::BadFactor, "decimation factor must be >= 1");
  if (n_taps % 2 == 0) fail(ErrorCode::InvalidArgument, "FIR length must be odd");
  // 80% of the post-decimation Nyquist frequency.
  cutoff_hz_ = 0.8 * (source_rate_hz / static_cast<double>(factor)) / 2.0;
  const double fc = cutoff_hz_ / source_rate_hz;  // cycles per sample
  const double mid = static_cast<double>(n_taps - 1) / 2.0;
  // Mirror the first half so the kernel is exactly symmetric (linear phase).
  for (std::size_t n = 0; n <= n_taps / 2; ++n) {
    const double m = static_cast<double>(n) - mid;
    const double sinc = m == 0.0 ? 2.0 * fc
                                 : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                               static_cast<double>(n_taps - 1));
    taps_[n] = sinc * hamming;
    taps_[n_taps - 1 - n] = taps_[n];
  }
  double sum = 0.0;
  for (double t : taps_) sum += t;
  for (auto& t : taps_) t /= sum;
}

WindowMatrix FirDecimator::apply(const WindowMatrix& window) const {
  const auto n_in = static_cast<std::size_t>(window.rows());
  if (n_in % factor_ != 0) {
    fail(ErrorCode::BadFactor, std::to_string(n_in) + " frames not divisible by factor " +
                                   std::to_string(factor_));
  }
  const std::size_t n_out = n_in / factor_;
  const auto half = static_cast<std::ptrdiff_t>(taps_.size() / 2);
  const auto n_taps = static_cast<std::ptrdiff_t>(taps_.size());
  WindowMatrix out = WindowMatrix::Zero(static_cast<Eigen::Index>(n_out), window.cols());
  for (Eigen::Index c = 0; c < window.cols(); ++c) {
    const double* x = window.col(c).data();
    for (std::size_t m = 0; m < n_out; ++m) {
      const auto centre = static_cast<std::ptrdiff_t>(m * factor_);
      // taps index k touches input frame centre + k - half
      const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, half - centre);
      const std::ptrdiff_t k_hi =
          std::min<std::ptrdiff_t>(n_taps, static_cast<std::ptrdiff_t>(n_in) - centre + half);
      double acc = 0.0;
      for (std::ptrdiff_t k = k_lo; k < k_hi; ++k) acc += taps_[k] * x[centre + k - half];
      out(static_cast<Eigen::Index>(m), c) = acc;
    }
  }
  return out;
}

WindowMatrix decimate(const WindowMatrix& window, double source_rate_hz, std::size_t factor) {
  return FirDecimator(source_rate_hz, factor).apply(window);
}

ButterworthBandpass::ButterworthBandpass(double low_hz, double high_hz, double sample_rate_hz,
                                         std::size_t prototype_order)
    : sample_rate_hz_(sample_rate_hz) {
  using cd = std::complex<double>;
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0)) {
    fail(ErrorCode::InvalidArgument, "band edges must satisfy 0 < low < high < fs/2");
  }
  if (prototype_order == 0 || prototype_order % 2 != 0) {
    fail(ErrorCode::InvalidArgument, "prototype order must be even and positive");
  }
  const auto order = static_cast<int>(prototype_order);
  const double fs2 = 2.0 * sample_rate_hz;
  const double w1 = fs2 * std::tan(std::numbers::pi * low_hz / sample_rate_hz);
  const double w2 = fs2 * std::tan(std::numbers::pi * high_hz / sample_rate_hz);
  const double bw = w2 - w1;
  const double w0_sq = w1 * w2;

  // Analog low-pass prototype poles on the unit circle, left half plane.
  std::vector<cd> analog;
  for (int m = -order + 1; m < order; m += 2) {
    const cd p = -std::exp(cd(0.0, std::numbers::pi * m / (2.0 * order)));
    const cd scaled = p * bw / 2.0;
    const cd root = std::sqrt(scaled * scaled - w0_sq);
    analog.push_back(scaled + root);
    analog.push_back(scaled - root);
  }

  // Gain: band-pass transform contributes bw^N; bilinear maps the N analog zeros
  // at s = 0 to z = +1 and the N zeros at infinity to z = -1.
  cd gain = std::pow(bw, order) * std::pow(fs2, order);
  std::vector<cd> digital;
  for (const cd& p : analog) {
    gain /= (fs2 - p);
    digital.push_back((fs2 + p) / (fs2 - p));
  }
  const double total_gain = gain.real();
  const double per_section = std::pow(std::abs(total_gain), 1.0 / order);

  for (const cd& p : digital) {
    if (p.imag() <= 0.0) continue;  // one pole of each conjugate pair
    sections_.push_back({per_section, 0.0, -per_section, -2.0 * p.real(), std::norm(p)});
  }
  if (sections_.size() != static_cast<std::size_t>(order)) {
    fail(ErrorCode::InvalidArgument, "band-pass design produced unpaired real poles");
  }
  if (total_gain < 0.0) {
    sections_[0].b0 = -sections_[0].b0;
    sections_[0].b2 = -sections_[0].b2;
  }
}

std::vector<double> ButterworthBandpass::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;  // transposed direct form II
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

WindowMatrix ButterworthBandpass::apply(const WindowMatrix& window) const {
  WindowMatrix out(window.rows(), window.cols());
  for (Eigen::Index c = 0; c < window.cols(); ++c) {
    const auto col = filter(std::span<const double>(window.col(c).data(),
                                                    static_cast<std::size_t>(window.rows())));
    out.col(c) = Eigen::Map<const Eigen::VectorXd>(col.data(), window.rows());
  }
  return out;
}

std::complex<double> ButterworthBandpass::response(double freq_hz) const {
  using cd = std::complex<double>;
  const cd z1 = std::exp(cd(0.0, -2.0 * std::numbers::pi * freq_hz / sample_rate_hz_));
  const cd z2 = z1 * z1;
  cd h = 1.0;
  for (const Biquad& s : sections_) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

WindowMatrix bandpass(const WindowMatrix& window, const PreprocessConfig& config) {
  return ButterworthBandpass(config.band_low_hz, config.band_high_hz, config.target_rate_hz)
      .apply(window);
}

Preprocessor::Preprocessor(const PreprocessConfig& config, double source_rate_hz)
    : config_(config),
      source_rate_hz_(source_rate_hz),
      frames_in_(frame_count(config.window_len_s, source_rate_hz)),
      decimator_(source_rate_hz, decimation_factor(config, source_rate_hz)),
      bandpass_(config.band_low_hz, config.band_high_hz, config.target_rate_hz) {
  validate(config, source_rate_hz);
}

ProcessedWindow Preprocessor::process(std::span<const float> frames, std::size_t n_channels,
                                      double t_end_s) const {
  if (n_channels == 0 || frames.size() != frames_in_ * n_channels) {
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(frames_in_) +
                                           " frames of " + std::to_string(n_channels) +
                                           " channels");
  }
  WindowMatrix w = zero_mean(to_window(frames, n_channels));
  w = decimator_.apply(w);
  return {bandpass_.apply(w), t_end_s};
}

ProcessedWindow Preprocessor::process(const Recording& recording, const Interval& interval) const {
  if (std::abs(interval.length_s() - config_.window_len_s) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "interval length differs from the configured window length");
  }
  const std::int64_t first = frame_index(interval.start_s, source_rate_hz_);
  if (first < 0 || static_cast<std::size_t>(first) + frames_in_ > recording.n_frames()) {
    std::ostringstream msg;
    msg << "interval [" << interval.start_s << ", " << interval.end_s
        << ") outside recording of " << recording.duration_s() << " s";
    fail(ErrorCode::OutOfBounds, msg.str());
  }
  return process(recording.frames(static_cast<std::size_t>(first), frames_in_),
                 recording.n_channels(), interval.end_s);
}

ProcessedWindow Preprocessor::process_ending_at(const Recording& recording, double t_end_s) const {
  return process(recording, Interval{t_end_s - config_.window_len_s, t_end_s});
}

ProcessedWindow preprocess_window(const Recording& recording, const Interval& interval,
                                  const PreprocessConfig& config) {
  if (recording.sample_rate_hz() <= 0.0) fail(ErrorCode::InvalidArgument, "bad sample rate");
  return Preprocessor(config, recording.sample_rate_hz()).process(recording, interval);
}

std::size_t sliding_window_count(double t_from_s, double t_to_s, double stride_s,
                                 double length_s) {
  if (!(stride_s > 0.0)) fail(ErrorCode::InvalidArgument, "stride must be positive");
  const double span = (t_to_s - t_from_s - length_s) / stride_s;
  if (span < -1e-9) return 0;
  return static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
}

std::vector<double> sliding_window_ends(double t_from_s, double t_to_s, double stride_s,
                                        double length_s) {
  const std::size_t count = sliding_window_count(t_from_s, t_to_s, stride_s, length_s);
  std::vector<double> ends;
  ends.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ends.push_back(sliding_window_end(t_from_s, stride_s, length_s, k));
  }
  return ends;
}

}  // namespace errp
