#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "errp/io_formats.hpp"
#include "errp/synth.hpp"
#include "test_helpers.hpp"

using namespace errp;
using testing::error_of;

TEST_SUITE("synth") {

TEST_CASE("default timeline") {
  const SynthConfig cfg;
  const auto tl = generate_timeline(cfg);
  REQUIRE(tl.timelines.size() == 54);
  CHECK(tl.duration_s == 648.0);
  CHECK(tl.markers.size() == 4 * 54);
  std::size_t n_error = 0;
  for (std::size_t e = 0; e < tl.timelines.size(); ++e) {
    const auto& t = tl.timelines[e];
    CHECK(t.t_start_s == 12.0 * static_cast<double>(e));
    CHECK(t.t_movement_s - t.t_start_s == 3.0);
    CHECK(t.t_gesture_s - t.t_start_s == 8.0);
    CHECK(t.t_end_s - t.t_start_s == 10.0);
    n_error += t.label == Label::Error;
  }
  CHECK(n_error == 18);
  CHECK(episode_timelines(tl.markers) == tl.timelines);

  SynthConfig other = cfg;
  other.seed = 1;
  CHECK(generate_timeline(other).timelines != tl.timelines);
}

TEST_CASE("template shape") {
  const ErrPTemplate t{8.0};
  CHECK(t.value(-0.01) == 0.0);
  CHECK(t.value(0.81) == 0.0);
  CHECK(std::abs(t.value(0.0)) < 1e-12);
  CHECK(std::abs(t.value(0.8)) < 1e-12);
  CHECK(t.value(0.15) < -3.0);
  CHECK(t.value(0.35) > 7.0);
}

TEST_CASE("template weights") {
  const auto w = default_template_weights(64);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  CHECK(std::count_if(w.begin(), w.end(), [](double v) { return v != 0.0; }) == 8);
  const auto w3 = default_template_weights(3);
  CHECK(std::accumulate(w3.begin(), w3.end(), 0.0) == doctest::Approx(1.0));
  CHECK(default_channel_names(10)[9] == "E10");
}

TEST_CASE("deterministic for a seed") {
  const auto cfg = testing::small_config(5, 3, 2);
  const auto a = testing::make_dataset(cfg);
  const auto b = testing::make_dataset(cfg);
  CHECK(a.recording.samples() == b.recording.samples());
  auto other = cfg;
  other.seed = 6;
  CHECK(testing::make_dataset(other).recording.samples() != a.recording.samples());
}

TEST_CASE("background level") {
  auto cfg = testing::small_config(9, 4, 2);
  cfg.alpha_amplitude_uv = 0.0;
  cfg.template_amplitude_uv = 0.0;
  const auto d = testing::make_dataset(cfg);
  for (std::size_t c = 0; c < cfg.n_channels; ++c) {
    double ss = 0.0;
    for (std::size_t f = 0; f < d.recording.n_frames(); ++f) ss += std::pow(d.recording.at(f, c), 2);
    const double rms = std::sqrt(ss / static_cast<double>(d.recording.n_frames()));
    CHECK(std::abs(rms - cfg.noise_rms_uv) <= 0.1 * cfg.noise_rms_uv);
  }
}

TEST_CASE("noise-free recording holds exactly the templates") {
  auto cfg = testing::small_config(3, 3, 3);
  cfg.noise_rms_uv = 0.0;
  cfg.alpha_amplitude_uv = 0.0;
  const auto tl = generate_timeline(cfg);
  const auto rec = synthesize_recording(cfg, tl);
  const auto w = default_template_weights(cfg.n_channels);
  const ErrPTemplate tmpl{cfg.template_amplitude_uv};
  double worst = 0.0;
  for (std::size_t f = 0; f < rec.n_frames(); ++f) {
    const double t = static_cast<double>(f) / cfg.sample_rate_hz;
    double expect = 0.0;
    for (const auto& e : tl.timelines) {
      if (e.label == Label::Error) expect += tmpl.value(t - (e.t_movement_s + 2.4));
    }
    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      worst = std::max(worst, std::abs(rec.at(f, c) - w[c] * expect));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("jitter stays within bounds") {
  auto cfg = testing::small_config(4, 0, 20);
  cfg.realization_jitter_s = 0.1;
  const auto tl = generate_timeline(cfg);
  bool moved = false;
  for (const auto& e : tl.timelines) {
    const double r = realization_time(cfg, e) - e.t_movement_s;
    CHECK(r >= 2.3 - 1e-12);
    CHECK(r <= 2.5 + 1e-12);
    moved |= r != 2.4;
  }
  CHECK(moved);
}

TEST_CASE("config validation") {
  auto cfg = testing::small_config();
  cfg.n_channels = 0;
  CHECK(error_of([&] { validate(cfg); }) == ErrorCode::InvalidArgument);
  cfg = testing::small_config();
  cfg.gesture_offset_s = 2.0;
  CHECK(error_of([&] { validate(cfg); }) == ErrorCode::InvalidArgument);
  cfg = testing::small_config();
  cfg.template_weights = {1.0};
  CHECK(error_of([&] { validate(cfg); }) == ErrorCode::InvalidArgument);
  cfg = testing::small_config();
  cfg.realization_latency_s = 5.5;
  CHECK(error_of([&] { validate(cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("suite on disk") {
  testing::TempDir dir("synth_suite");
  const auto cfg = testing::small_config(20, 2, 1);
  const auto entries = generate_suite(cfg, 2, dir.path());
  REQUIRE(entries.size() == 2);
  CHECK(entries[1].seed == 21);
  const auto manifest = nlohmann::json::parse(read_text_file(dir.path() / "manifest.json"));
  CHECK(manifest["datasets"].size() == 2);
  CHECK(manifest["datasets"][0]["recording"] == "dataset_00/dataset_00.eegr");
  const auto rec = load_recording(entries[1].recording);
  CHECK(rec.samples() == testing::make_dataset(dataset_config(cfg, 1)).recording.samples());
  CHECK(load_markers(entries[1].markers) == generate_timeline(dataset_config(cfg, 1)).markers);
}

}
