#include "errp/cli_commands.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <sstream>

#include "errp/detector.hpp"
#include "errp/error.hpp"
#include "errp/io_formats.hpp"
#include "errp/plan_search.hpp"
#include "errp/stream.hpp"
#include "errp/synth.hpp"

namespace errp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kMarkersSuffix = ".markers.csv";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size()) {
    throw UsageError("expected host:port, got '" + spec + "'");
  }
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    throw UsageError("bad port in '" + spec + "'");
  }
  if (port <= 0 || port > 65535) throw UsageError("port out of range in '" + spec + "'");
  return {spec.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<LabeledRecording> load_datasets(const std::vector<fs::path>& paths) {
  std::vector<LabeledRecording> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_dataset(p));
  return out;
}

}  // namespace

DatasetFiles resolve_dataset(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".eegr") found.push_back(entry.path());
    }
    if (found.size() != 1) {
      fail(ErrorCode::IoError, path.string() + ": expected exactly one .eegr file, found " +
                                   std::to_string(found.size()));
    }
    return resolve_dataset(found.front());
  }
  const std::string name = path.filename().string();
  if (ends_with(name, kMarkersSuffix)) {
    const std::string stem = name.substr(0, name.size() - kMarkersSuffix.size());
    return {path.parent_path() / (stem + ".eegr"), path};
  }
  if (path.extension() == ".eegr") {
    return {path, path.parent_path() / (path.stem().string() + std::string(kMarkersSuffix))};
  }
  fail(ErrorCode::IoError, path.string() + ": not a dataset directory, .eegr or .markers.csv");
}

LabeledRecording load_dataset(const fs::path& path) {
  const auto files = resolve_dataset(path);
  Recording rec = load_recording(files.recording);
  const auto markers = load_markers(files.markers);
  auto timelines = episode_timelines(markers);
  return {std::move(rec), std::move(timelines)};
}

PipelineConfig load_pipeline_config(const std::optional<fs::path>& path,
                                    std::optional<std::uint64_t> seed) {
  PipelineConfig config = path ? pipeline_config_from_json(read_json_file(*path)) : PipelineConfig{};
  if (seed) config.pa1.seed = *seed;
  return config;
}

void cmd_generate(const GenerateOptions& o, std::ostream& log) {
  SynthConfig config = o.synth_config ? synth_config_from_json(read_json_file(*o.synth_config))
                                      : SynthConfig{};
  if (o.seed) config.seed = *o.seed;
  if (o.template_amplitude_uv) config.template_amplitude_uv = *o.template_amplitude_uv;
  if (o.n_datasets == 0) throw UsageError("--datasets must be at least 1");
  fs::create_directories(o.out_dir);
  const auto entries = generate_suite(config, o.n_datasets, o.out_dir);
  for (const auto& e : entries) {
    log << "dataset " << e.index << " seed " << e.seed << " -> " << e.recording.string() << "\n";
  }
  log << "generated " << entries.size() << " datasets in " << o.out_dir.string() << "\n";
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
  if (o.datasets.empty()) throw UsageError("train needs at least one dataset");
  const PipelineConfig config = load_pipeline_config(o.config, o.seed);
  const auto datasets = load_datasets(o.datasets);
  const TrainedModel model = train_model(datasets, config);
  const auto& meta = model.meta;
  log << "training vectors: " << meta.n_vectors << " (error " << meta.n_error_vectors
      << ", correct " << meta.n_correct_vectors << ") from " << meta.n_datasets << " datasets\n";
  log << "C grid (mean " << config.pa1.folds << "-fold CV bACC):\n";
  for (std::size_t i = 0; i < meta.grid.grid.size(); ++i) {
    log << "  C=" << format_double(meta.grid.grid[i]) << "  bACC=" << fixed(meta.grid.mean_bacc[i])
        << (meta.grid.grid[i] == meta.grid.best_C ? "  <- chosen" : "") << "\n";
  }
  write_text_file(o.out_model, write_model(model));
  log << "trained model C=" << format_double(meta.grid.best_C) << " written to "
      << o.out_model.string() << "\n";
}

void cmd_detect(const DetectOptions& o, std::ostream& log) {
  const TrainedModel model = read_model(read_text_file(o.model));
  const PipelineConfig config = load_pipeline_config(o.config, std::nullopt);
  const auto ds = load_dataset(o.dataset);
  const auto events = detect_batch(ds.recording, ds.timelines, model, config.detection);
  write_text_file(o.out_csv, write_detections(events));
  const auto n_error = std::count_if(events.begin(), events.end(),
                                     [](const auto& e) { return e.predicted_label == Label::Error; });
  log << "detected " << events.size() << " windows (" << n_error << " error) over "
      << ds.timelines.size() << " episodes -> " << o.out_csv.string() << "\n";
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  const PipelineConfig config = load_pipeline_config(o.config, std::nullopt);
  const auto events = read_detections(read_text_file(o.detections));
  const auto timelines = episode_timelines(load_markers(resolve_dataset(o.dataset).markers));
  const EvaluationReport report = evaluate(events, timelines, config.evaluation);
  if (o.out_report) write_text_file(*o.out_report, write_report(report));
  log << "bACC " << fixed(report.bacc) << " (TPR " << fixed(report.tpr) << ", TNR "
      << fixed(report.tnr) << ") over " << report.counts.positives() + report.counts.negatives()
      << " windows; episode-mean bACC " << fixed(report.episode_mean_bacc) << "\n";
}

void cmd_replay(const ReplayOptions& o, std::ostream& log) {
  if (o.chunk_frames == 0) throw UsageError("--chunk-frames must be positive");
  const auto files = resolve_dataset(o.dataset);
  const Recording rec = load_recording(files.recording);
  const auto markers = load_markers(files.markers);
  stream::Listener listener(o.port);
  log << "listening on 127.0.0.1:" << listener.port() << std::endl;
  stream::Socket client = listener.accept();
  const auto stats = stream::replay(client, rec, markers, {o.chunk_frames, o.realtime});
  if (o.out_csv) write_text_file(*o.out_csv, write_detections(stats.detections));
  log << "replayed " << stats.samples_frames << " SAMPLES and " << stats.marker_frames
      << " MARKER frames; received " << stats.detections.size() << " detections\n";
}

void cmd_listen(const ListenOptions& o, std::ostream& log) {
  const auto [host, port] = split_host_port(o.connect);
  const TrainedModel model = read_model(read_text_file(o.model));
  const PipelineConfig config = load_pipeline_config(o.config, std::nullopt);
  stream::Socket socket = stream::connect_tcp(host, port);
  stream::ListenSession session(model, config.detection, o.out_recording.has_value());
  stream::listen(socket, session);
  write_text_file(o.out_csv, write_detections(session.events()));
  if (o.out_recording) {
    save_recording(*o.out_recording, session.recording());
  }
  log << "received " << session.markers().size() << " markers; emitted " << session.events().size()
      << " detections -> " << o.out_csv.string() << "\n";
}

void cmd_search_windows(const SearchOptions& o, std::ostream& log) {
  if (o.datasets.empty()) throw UsageError("search-windows needs at least one dataset");
  const PipelineConfig config = load_pipeline_config(o.config, o.seed);
  const auto plans = read_plan_list(read_text_file(o.plans));
  const auto datasets = load_datasets(o.datasets);
  PlanSearchConfig search;
  search.seed = config.pa1.seed;
  const auto ranking = search_window_plans(datasets, plans, config, search);

  json out = json::array();
  std::size_t rank = 0;
  for (const auto& e : ranking) {
    json entry = {{"plan_index", e.plan_index}, {"plan", plan_to_json(e.plan)}, {"failed", e.failed}};
    if (e.failed) {
      entry["error"] = e.error;
      log << "  plan " << e.plan_index << ": failed (" << e.error << ")\n";
    } else {
      entry["rank"] = ++rank;
      entry["mean_bacc"] = e.mean_bacc;
      entry["fold_bacc"] = e.fold_bacc;
      log << "  #" << rank << " plan " << e.plan_index << " (" << e.plan.total_windows()
          << " windows): bACC " << fixed(e.mean_bacc) << "\n";
    }
    out.push_back(std::move(entry));
  }
  write_text_file(o.out_json, out.dump(2) + "\n");
  log << "searched " << plans.size() << " plans; " << rank << " ranked -> " << o.out_json.string()
      << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error-related potential detection pipeline: synthesize, train, detect, evaluate, stream."};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::optional<std::string> gen_cfg;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset suite");
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  generate->add_option("--seed", gen.seed, "Base seed (dataset i uses seed + i)");
  generate->add_option("--datasets", gen.n_datasets, "Number of datasets")->capture_default_str();
  generate->add_option("--config", gen_cfg, "Synthesis config JSON");
  generate->add_option("--amplitude", gen.template_amplitude_uv, "Template peak amplitude in uV");

  TrainOptions train;
  std::optional<std::string> train_cfg;
  auto* train_cmd = app.add_subcommand("train", "Train a model on labelled datasets");
  train_cmd->add_option("datasets", train.datasets, "Dataset directories or .eegr files");
  train_cmd->add_option("--config", train_cfg, "Pipeline config JSON");
  train_cmd->add_option("--seed", train.seed, "Seed for PA1 shuffling and CV folds");
  train_cmd->add_option("--out", train.out_model, "Output .model.json")->required();

  DetectOptions detect;
  std::optional<std::string> detect_cfg;
  auto* detect_cmd = app.add_subcommand("detect", "Score every sliding window of a dataset");
  detect_cmd->add_option("dataset", detect.dataset, "Dataset directory or .eegr file")->required();
  detect_cmd->add_option("--model", detect.model, "Trained .model.json")->required();
  detect_cmd->add_option("--out", detect.out_csv, "Output .detections.csv")->required();
  detect_cmd->add_option("--config", detect_cfg, "Pipeline config JSON (detection span)");

  EvaluateOptions eval;
  std::optional<std::string> eval_cfg, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score detections against the episode labels");
  eval_cmd->add_option("dataset", eval.dataset, "Dataset directory or .markers.csv")->required();
  eval_cmd->add_option("--detections", eval.detections, "Detections CSV")->required();
  eval_cmd->add_option("--out", eval_out, "Output .report.json");
  eval_cmd->add_option("--config", eval_cfg, "Pipeline config JSON (evaluation region)");

  ReplayOptions replay;
  std::optional<std::string> replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Serve a dataset over TCP to one client");
  replay_cmd->add_option("dataset", replay.dataset, "Dataset directory or .eegr file")->required();
  replay_cmd->add_option("--port", replay.port, "TCP port on 127.0.0.1 (0 picks one)")
      ->capture_default_str();
  replay_cmd->add_flag("--realtime", replay.realtime, "Pace chunks at the sample rate");
  replay_cmd->add_option("--chunk-frames", replay.chunk_frames, "Frames per SAMPLES frame")
      ->capture_default_str();
  replay_cmd->add_option("--out", replay_out, "Write the returned detections as CSV");

  ListenOptions listen;
  std::optional<std::string> listen_cfg, listen_rec;
  auto* listen_cmd = app.add_subcommand("listen", "Connect to a replay and detect online");
  listen_cmd->add_option("--connect", listen.connect, "Server as host:port")->required();
  listen_cmd->add_option("--model", listen.model, "Trained .model.json")->required();
  listen_cmd->add_option("--out", listen.out_csv, "Output .detections.csv")->required();
  listen_cmd->add_option("--config", listen_cfg, "Pipeline config JSON (detection span)");
  listen_cmd->add_option("--record", listen_rec, "Also save the received samples as .eegr");

  SearchOptions search;
  std::optional<std::string> search_cfg;
  auto* search_cmd = app.add_subcommand("search-windows", "Rank candidate training-window plans");
  search_cmd->add_option("datasets", search.datasets, "Dataset directories or .eegr files");
  search_cmd->add_option("--plans", search.plans, "Candidate plans JSON")->required();
  search_cmd->add_option("--config", search_cfg, "Pipeline config JSON");
  search_cmd->add_option("--seed", search.seed, "Seed for folds and PA1");
  search_cmd->add_option("--out", search.out_json, "Output ranking JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  auto opt_path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
    if (!s) return std::nullopt;
    return fs::path(*s);
  };

  try {
    if (*generate) {
      gen.synth_config = opt_path(gen_cfg);
      cmd_generate(gen, out);
    } else if (*train_cmd) {
      train.config = opt_path(train_cfg);
      cmd_train(train, out);
    } else if (*detect_cmd) {
      detect.config = opt_path(detect_cfg);
      cmd_detect(detect, out);
    } else if (*eval_cmd) {
      eval.config = opt_path(eval_cfg);
      eval.out_report = opt_path(eval_out);
      cmd_evaluate(eval, out);
    } else if (*replay_cmd) {
      replay.out_csv = opt_path(replay_out);
      cmd_replay(replay, out);
    } else if (*listen_cmd) {
      listen.config = opt_path(listen_cfg);
      listen.out_recording = opt_path(listen_rec);
      cmd_listen(listen, out);
    } else if (*search_cmd) {
      search.config = opt_path(search_cfg);
      cmd_search_windows(search, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    const bool io = e.code() == ErrorCode::IoError || e.code() == ErrorCode::ConnectionLost;
    return io ? kExitIo : kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace errp::cli
