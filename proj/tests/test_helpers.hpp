#pragma once

#include <unistd.h>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "errp/error.hpp"
#include "errp/features.hpp"
#include "errp/synth.hpp"

namespace testing {

// Runs `fn` and returns the ErrorCode it throws; fails the check otherwise.
template <typename Fn>
errp::ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const errp::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an errp::Error");
}

// Small, fast synthetic setup: 8 channels at 500 Hz.
inline errp::SynthConfig small_config(std::uint64_t seed = 1, std::size_t n_correct = 10,
                                      std::size_t n_error = 5) {
  errp::SynthConfig c;
  c.n_channels = 8;
  c.sample_rate_hz = 500.0;
  c.n_correct = n_correct;
  c.n_error = n_error;
  c.seed = seed;
  return c;
}

inline errp::LabeledRecording make_dataset(const errp::SynthConfig& config) {
  const auto tl = errp::generate_timeline(config);
  return {errp::synthesize_recording(config, tl), tl.timelines};
}

inline errp::EpisodeTimeline timeline(std::int64_t id, errp::Label label, double t0) {
  return {id, label, t0, t0 + 3.0, t0 + 8.0, t0 + 10.0};
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("errp_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
