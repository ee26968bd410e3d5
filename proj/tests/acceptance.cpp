// Acceptance checks, one per criterion. Each prints a single PASS/FAIL line
// (plus indented detail) and the process exits non-zero on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <future>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errp/cli_commands.hpp"
#include "errp/detector.hpp"
#include "errp/features.hpp"
#include "errp/io_formats.hpp"
#include "errp/pa1.hpp"
#include "errp/pipeline.hpp"
#include "errp/preprocess.hpp"
#include "errp/rng.hpp"
#include "errp/stream.hpp"
#include "errp/synth.hpp"
#include "errp/xdawn.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace errp;

namespace {

// Collects failed sub-checks with a message each.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t total() const { return total_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::size_t total_{0};
  std::vector<std::string> failures_;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double db(double gain) { return 20.0 * std::log10(gain); }

// ---- 1: per-subject table arithmetic

bool table_statistics(std::ostream& log) {
  const std::vector<double> bacc{0.89, 0.94, 0.97, 0.83, 0.94, 0.92, 0.97, 0.90, 0.80};
  const auto s = summarize(bacc);
  log << "  mean " << fmt(s.mean, 10) << ", sample std " << fmt(s.std, 10) << " -> " << round2(s.mean)
      << " +- " << round2(s.std) << "\n";
  return s.n == 9 && std::abs(s.mean - 0.9067) <= 1e-4 && round2(s.mean) == 0.91 &&
         round2(s.std) == 0.06;
}

// ---- 2: balanced accuracy identity

bool bacc_identity(std::ostream& log) {
  ConfusionCounts c;
  c.tp = 90;
  c.fn = 10;
  c.tn = 92;
  c.fp = 8;
  const double b = balanced_accuracy(c);
  log << "  TPR " << true_positive_rate(c) << ", TNR " << true_negative_rate(c) << " -> bACC "
      << fmt(b, 17) << "\n";
  return true_positive_rate(c) == 0.9 && true_negative_rate(c) == 0.92 && b == 0.91;
}

// ---- 3: end-to-end synthetic reproduction

struct AmplitudeRun {
  double amplitude;
  std::vector<PlanWindow> windows;
  std::optional<TrainedModel> model;
};

bool synthetic_reproduction(std::ostream& log) {
  constexpr std::size_t kTrain = 7;
  constexpr std::size_t kTest = 7;  // the eighth dataset
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  Checks checks;

  for (const std::uint64_t seed : seeds) {
    SynthConfig base;
    base.seed = seed * 1000;
    PipelineConfig pc;
    pc.pa1.seed = seed;
    std::vector<AmplitudeRun> runs{{base.template_amplitude_uv, {}, {}}, {0.0, {}, {}}};

    // One background per dataset; the two amplitude variants share it.
    auto for_dataset = [&](std::size_t index, const std::function<void(AmplitudeRun&, const Recording&,
                                                                      const SynthTimeline&)>& use) {
      const SynthConfig cfg = dataset_config(base, index);
      const SynthTimeline tl = generate_timeline(cfg);
      std::vector<float> samples = synthesize_background(cfg, tl.duration_s, tl.timelines);
      {
        const Recording silent(cfg.sample_rate_hz, default_channel_names(cfg.n_channels), samples);
        use(runs[1], silent, tl);
      }
      add_errp_templates(cfg, tl.timelines, samples);
      const Recording rec(cfg.sample_rate_hz, default_channel_names(cfg.n_channels), std::move(samples));
      use(runs[0], rec, tl);
    };

    const Preprocessor pre(pc.preprocess, base.sample_rate_hz);
    for (std::size_t i = 0; i < kTrain; ++i) {
      for_dataset(i, [&](AmplitudeRun& run, const Recording& rec, const SynthTimeline& tl) {
        auto w = collect_plan_windows(rec, tl.timelines, pc.plan, pre, i);
        run.windows.insert(run.windows.end(), std::make_move_iterator(w.begin()),
                           std::make_move_iterator(w.end()));
      });
    }
    for (auto& run : runs) {
      run.model = train_model(run.windows, pc, base.sample_rate_hz,
                              default_channel_names(base.n_channels), kTrain);
      run.windows.clear();
      run.windows.shrink_to_fit();
    }
    for_dataset(kTest, [&](AmplitudeRun& run, const Recording& rec, const SynthTimeline& tl) {
      const auto events = detect_batch(rec, tl.timelines, *run.model, pc.detection);
      const auto report = evaluate(events, tl.timelines, pc.evaluation);
      const auto& g = run.model->meta.grid;
      double cv = 0.0;
      for (std::size_t k = 0; k < g.grid.size(); ++k) {
        if (g.grid[k] == g.best_C) cv = g.mean_bacc[k];
      }
      log << "  seed " << base.seed << ", amplitude " << run.amplitude << " uV: C " << g.best_C
          << " (CV bACC " << fmt(cv, 4) << "), test bACC " << fmt(report.bacc, 4) << " (TPR "
          << fmt(report.tpr, 4) << ", TNR " << fmt(report.tnr, 4) << ")\n";
      if (run.amplitude > 0.0) {
        checks.expect(report.bacc >= 0.90, "seed " + std::to_string(base.seed) + ": bACC " +
                                               fmt(report.bacc, 4) + " < 0.90");
      } else {
        checks.expect(report.bacc >= 0.40 && report.bacc <= 0.60,
                      "seed " + std::to_string(base.seed) + ": null bACC " + fmt(report.bacc, 4) +
                          " outside [0.40, 0.60]");
      }
    });
  }

  // How much of the evaluation region can see the template at all.
  const SynthConfig cfg;
  const PipelineConfig pc;
  const EpisodeTimeline ep{0, Label::Error, 0.0, cfg.movement_offset_s, cfg.gesture_offset_s,
                           cfg.episode_length_s};
  const double onset = realization_time(cfg, ep);
  const double offset = onset + ErrPTemplate::kSupportS;
  std::size_t eval_windows = 0;
  std::size_t overlapping = 0;
  for (double t : detection_window_ends(ep, pc.preprocess, pc.detection)) {
    if (t < pc.evaluation.from_s - 1e-9 || t > pc.evaluation.to_s + 1e-9) continue;
    ++eval_windows;
    overlapping += (t - pc.preprocess.window_len_s < offset && t > onset);
  }
  const double ceiling = 0.5 * (static_cast<double>(overlapping) / static_cast<double>(eval_windows) + 1.0);
  log << "  template spans " << onset << "-" << offset << " s into each error episode; "
      << overlapping << " of " << eval_windows
      << " evaluation windows overlap it, so even a perfect template detector that is never "
         "wrong on correct episodes tops out at bACC "
      << fmt(ceiling, 4) << "\n";

  for (const auto& f : checks.failures()) log << "  " << f << "\n";
  return checks.ok();
}

// ---- 4: PA1 step against a numerical minimizer

bool pa1_oracle(std::ostream& log) {
  Rng rng(4242);
  Checks checks;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(9));
    const Eigen::VectorXd w0 = oracle::random_vector(rng, d, rng.uniform(0.1, 2.0));
    const Eigen::VectorXd x = oracle::random_vector(rng, d, rng.uniform(0.1, 3.0));
    const int y = rng.uniform() < 0.5 ? 1 : -1;
    const double c = std::pow(10.0, rng.uniform(-3.0, 1.0));
    const Eigen::VectorXd ref = oracle::pa1_admm(w0, x, y, c);
    Eigen::VectorXd w = w0;
    const double tau = pa1_update(w, x, y, c);
    const double loss = std::max(0.0, 1.0 - y * w0.dot(x));
    const std::string tag = "instance " + std::to_string(trial);
    worst = std::max(worst, (w - ref).norm());
    checks.expect((w - ref).norm() <= 1e-6, tag + ": differs from the minimizer");
    checks.expect(tau == std::min(c, loss / x.squaredNorm()), tag + ": step size");
    if (tau < c) checks.expect(y * w.dot(x) >= 1.0 - 1e-9, tag + ": margin");
  }
  log << "  " << checks.total() << " checks, largest distance to the minimizer " << fmt(worst, 3) << "\n";
  for (const auto& f : checks.failures()) log << "  " << f << "\n";
  return checks.ok();
}

// ---- 5: generalized eigenproblem

bool xdawn_oracle(std::ostream& log) {
  Rng rng(5151);
  Checks checks;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 4;
    const std::string tag = "pair " + std::to_string(trial) + " (" + std::to_string(n) + " ch)";
    const Eigen::MatrixXd a = oracle::random_spd(rng, n, 0.0);
    const Eigen::MatrixXd b = oracle::random_spd(rng, n, 0.2);
    const auto f = solve_generalized(a, b, static_cast<std::size_t>(n));
    const auto ref = oracle::generalized_eigen(a, b);
    const double scale = std::max(1.0, ref.values[0]);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd w = f.weights.row(i).transpose();
      checks.expect((a * w - f.eigenvalues(i) * b * w).norm() <= 1e-8 * (a.norm() + std::abs(f.eigenvalues(i)) * b.norm()) * w.norm(),
                    tag + ": residual");
      checks.expect(std::abs(f.eigenvalues(i) - ref.values[static_cast<std::size_t>(i)]) <= 1e-8 * scale,
                    tag + ": eigenvalue vs oracle");
    }
    double best = -1e300;
    for (int k = 0; k < 1000; ++k) {
      const Eigen::VectorXd v = oracle::random_vector(rng, n);
      best = std::max(best, v.dot(a * v) / v.dot(b * v));
    }
    checks.expect(best <= f.eigenvalues(0) * (1.0 + 1e-12), tag + ": Rayleigh quotient above lambda_1");

    Eigen::MatrixXd m(n, n);
    do {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    } while (std::abs(m.determinant()) < 0.1);
    const auto mixed = solve_generalized(m.transpose() * a * m, m.transpose() * b * m,
                                         static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      checks.expect(std::abs(mixed.eigenvalues(i) - f.eigenvalues(i)) <= 1e-6 * std::abs(f.eigenvalues(i)) + 1e-12,
                    tag + ": spectrum changes under mixing");
    }
  }
  log << "  " << checks.total() << " checks over 40 pairs\n";
  for (const auto& f : checks.failures()) log << "  " << f << "\n";
  return checks.ok();
}

// ---- 6: filter responses

std::vector<double> sinusoid(double freq, double rate, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  }
  return x;
}

bool dsp_responses(std::ostream& log) {
  const PreprocessConfig pc;
  const ButterworthBandpass bp(pc.band_low_hz, pc.band_high_hz, pc.target_rate_hz);
  const double rate = pc.target_rate_hz;
  const std::size_t n = static_cast<std::size_t>(400.0 * rate);
  auto gain_db = [&](double f) {
    const auto y = bp.filter(sinusoid(f, rate, n));
    return db(oracle::sinusoid_amplitude(y, f, rate, n / 2));
  };
  const double g5 = gain_db(5.0);
  const double g01 = gain_db(0.1);
  const double g25 = gain_db(25.0 - 1e-3);  // exactly Nyquist would sample the sine at its zeros
  log << "  band-pass: " << fmt(g5, 4) << " dB at 5 Hz, " << fmt(g01, 4) << " dB at 0.1 Hz, "
      << fmt(g25, 4) << " dB at 25 Hz\n";

  const double src = 2000.0;
  const FirDecimator dec(src, static_cast<std::size_t>(src / rate));
  auto passed = [&](double f) {
    const auto x = sinusoid(f, src, 40000);
    const WindowMatrix w = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    const WindowMatrix y = dec.apply(w);
    // Skip the edges where the zero padding shortens the kernel.
    std::vector<double> interior;
    for (Eigen::Index i = 10; i < y.rows() - 10; ++i) interior.push_back(y(i, 0));
    double ss = 0.0;
    for (double v : interior) ss += v * v;
    return std::pair{interior, std::sqrt(2.0 * ss / static_cast<double>(interior.size()))};
  };
  const auto [y5, rms5] = passed(5.0);
  // Amplitude fit on the decimated series; the interior starts at output frame 10.
  std::vector<double> shifted(10, 0.0);
  shifted.insert(shifted.end(), y5.begin(), y5.end());
  const double a5 = oracle::sinusoid_amplitude(shifted, 5.0, rate, 10);
  const auto [y60, a60] = passed(60.0);
  log << "  decimator: 5 Hz amplitude " << fmt(a5, 6) << ", 60 Hz residual " << fmt(db(a60), 4)
      << " dB\n";
  return std::abs(g5) <= 1.0 && g01 <= -20.0 && g25 <= -20.0 && std::abs(a5 - 1.0) <= 0.02 &&
         db(a60) <= -30.0;
}

// ---- 7: window counts

bool window_counts(std::ostream& log) {
  const PipelineConfig pc;
  const auto span = sliding_window_count(0.0, 10.0, pc.preprocess.stride_s, pc.preprocess.window_len_s);
  const EpisodeTimeline ep{0, Label::Correct, 0.0, 3.0, 8.0, 10.0};
  const auto ends = detection_window_ends(ep, pc.preprocess, pc.detection);
  std::size_t eval = 0;
  for (double t : ends) eval += (t >= pc.evaluation.from_s - 1e-9 && t <= pc.evaluation.to_s + 1e-9);

  const SynthConfig base;
  const Preprocessor pre(pc.preprocess, base.sample_rate_hz);
  std::size_t vectors = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const SynthConfig cfg = dataset_config(base, i);
    const auto tl = generate_timeline(cfg);
    const Recording rec = synthesize_recording(cfg, tl);
    vectors += collect_plan_windows(rec, tl.timelines, pc.plan, pre, i).size();
  }
  log << "  " << span << " windows per 10 s span, " << eval << " per evaluation region, "
      << ends.size() << " detection events per episode, " << vectors
      << " training vectors over 7 default datasets\n";
  return span == 183 && eval == 41 && ends.size() == 103 && vectors == 1764;
}

// ---- 8: streaming against batch detection

bool stream_equivalence(std::ostream& log) {
  auto train_cfg = testing::small_config(801, 8, 4);
  train_cfg.sample_rate_hz = 2000.0;
  auto test_cfg = testing::small_config(802, 6, 4);
  test_cfg.sample_rate_hz = 2000.0;
  PipelineConfig pc;
  pc.xdawn.n_components = 4;
  const std::vector<LabeledRecording> train{testing::make_dataset(train_cfg)};
  const TrainedModel model = train_model(train, pc);
  const auto test = testing::make_dataset(test_cfg);
  const auto markers = timeline_markers(test.timelines);
  const auto batch = detect_batch(test.recording, test.timelines, model);

  Checks checks;
  auto compare = [&](const std::vector<DetectionEvent>& got, const std::string& tag) {
    if (got.size() != batch.size()) {
      checks.expect(false, tag + ": " + std::to_string(got.size()) + " events, batch has " +
                               std::to_string(batch.size()));
      return;
    }
    bool labels = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      labels &= got[i].predicted_label == batch[i].predicted_label &&
                got[i].window_end_s == batch[i].window_end_s;
      worst = std::max(worst, std::abs(got[i].decision_value - batch[i].decision_value));
    }
    checks.expect(labels, tag + ": labels differ");
    checks.expect(worst <= 1e-9, tag + ": decision values differ by " + fmt(worst, 3));
  };

  for (const std::size_t chunk : {std::size_t{1}, std::size_t{100}, std::size_t{10000}}) {
    const auto t0 = std::chrono::steady_clock::now();
    // In-process detector.
    StreamDetector det(model, test.recording.n_channels(), test.recording.sample_rate_hz());
    std::vector<DetectionEvent> direct;
    stream::replay_frames(test.recording, markers, chunk, [&](const stream::Frame& f) {
      std::vector<DetectionEvent> e;
      if (f.type == stream::FrameType::Samples) {
        const auto s = stream::parse_samples(f, test.recording.n_channels());
        e = det.push_samples(s.start_frame, s.frames);
      } else if (f.type == stream::FrameType::Marker) {
        e = det.push_marker(stream::parse_marker(f));
      } else if (f.type == stream::FrameType::End) {
        e = det.finish();
      }
      direct.insert(direct.end(), e.begin(), e.end());
    });
    compare(direct, "chunk " + std::to_string(chunk) + " in-process");

    // Replay server and listening client over loopback TCP.
    stream::Listener listener(0);
    auto server = std::async(std::launch::async, [&] {
      stream::Socket s = listener.accept();
      return stream::replay(s, test.recording, markers, {chunk, false});
    });
    stream::ListenSession session(model);
    {
      stream::Socket client = stream::connect_tcp("127.0.0.1", listener.port());
      stream::listen(client, session);
    }
    const auto stats = server.get();
    compare(session.events(), "chunk " + std::to_string(chunk) + " loopback");
    compare(stats.detections, "chunk " + std::to_string(chunk) + " echoed");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "  chunk " << chunk << ": " << batch.size() << " events, " << stats.samples_frames
        << " SAMPLES frames, " << fmt(secs, 3) << " s\n";
  }
  for (const auto& f : checks.failures()) log << "  " << f << "\n";
  return checks.ok();
}

// ---- 9: determinism and file formats

int cli(std::vector<std::string> args, std::ostream& log) {
  args.insert(args.begin(), "errp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), sink, log);
  return code;
}

bool determinism_and_formats(std::ostream& log) {
  Checks checks;
  testing::TempDir dir("acceptance_9");
  const auto p = dir.path();

  const auto ds = testing::make_dataset(testing::small_config(901, 3, 2));
  save_recording(p / "r.eegr", ds.recording);
  const Recording back = load_recording(p / "r.eegr");
  checks.expect(back.samples() == ds.recording.samples() &&
                    back.channel_names() == ds.recording.channel_names() &&
                    back.sample_rate_hz() == ds.recording.sample_rate_hz(),
                "recording roundtrip");
  checks.expect(write_recording(back) == read_binary_file(p / "r.eegr"), "recording bytes");
  const auto markers = timeline_markers(ds.timelines);
  save_markers(p / "r.markers.csv", markers);
  checks.expect(load_markers(p / "r.markers.csv") == markers, "marker roundtrip");

  auto synth = testing::small_config(902, 12, 6);
  synth.sample_rate_hz = 2000.0;
  write_text_file(p / "synth.json", synth_config_to_json(synth).dump());
  PipelineConfig pc;
  pc.xdawn.n_components = 4;
  write_text_file(p / "pipe.json", pipeline_config_to_json(pc).dump());

  std::vector<std::string> outputs;
  for (const std::string run : {"a", "b"}) {
    const auto r = p / run;
    const int g = cli({"generate", "--out", (r / "data").string(), "--datasets", "2", "--config",
                       (p / "synth.json").string(), "--seed", "77"},
                      log);
    const int t = cli({"train", (r / "data" / "dataset_00").string(), "--config", (p / "pipe.json").string(),
                       "--seed", "5", "--out", (r / "m.model.json").string()},
                      log);
    const int d = cli({"detect", (r / "data" / "dataset_01").string(), "--model",
                       (r / "m.model.json").string(), "--out", (r / "d.detections.csv").string()},
                      log);
    checks.expect(g == 0 && t == 0 && d == 0, "pipeline run " + run + " failed");
    if (g != 0 || t != 0 || d != 0) continue;
    outputs.push_back(read_text_file(r / "m.model.json"));
    outputs.push_back(read_text_file(r / "d.detections.csv"));
    outputs.push_back(std::string(read_text_file(r / "data" / "dataset_01" / "dataset_01.eegr")));
  }
  if (outputs.size() == 6) {
    checks.expect(outputs[0] == outputs[3], "model files differ between runs");
    checks.expect(outputs[1] == outputs[4], "detection files differ between runs");
    checks.expect(outputs[2] == outputs[5], "generated recordings differ between runs");
    const TrainedModel m = read_model(outputs[0]);
    checks.expect(write_model(m) == outputs[0], "model file does not roundtrip");
    checks.expect(write_detections(read_detections(outputs[1])) == outputs[1],
                  "detection file does not roundtrip");
  }
  log << "  " << checks.total() << " checks\n";
  for (const auto& f : checks.failures()) log << "  " << f << "\n";
  return checks.ok();
}

struct Criterion {
  int id;
  const char* title;
  bool (*run)(std::ostream&);
};

const Criterion kCriteria[] = {
    {1, "per-subject table mean and deviation", table_statistics},
    {2, "balanced accuracy identity", bacc_identity},
    {3, "end-to-end synthetic detection", synthetic_reproduction},
    {4, "PA-I step against a numerical minimizer", pa1_oracle},
    {5, "xDAWN generalized eigenproblem", xdawn_oracle},
    {6, "band-pass and decimator responses", dsp_responses},
    {7, "window counting", window_counts},
    {8, "online/offline detection equivalence", stream_equivalence},
    {9, "determinism and file roundtrips", determinism_and_formats},
};

bool run_one(const Criterion& c) {
  std::ostringstream detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = c.run(detail);
  } catch (const std::exception& e) {
    detail << "  exception: " << e.what() << "\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "criterion " << c.id << " [" << (ok ? "PASS" : "FAIL") << "] " << c.title << " ("
            << fmt(secs, 3) << " s)\n"
            << detail.str() << std::flush;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: errp_acceptance [--criterion N]\n";
      return 2;
    }
  }
  bool all = true;
  bool matched = false;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    matched = true;
    all &= run_one(c);
  }
  if (!matched) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return all ? 0 : 1;
}
