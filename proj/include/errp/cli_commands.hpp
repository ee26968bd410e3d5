#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "errp/features.hpp"
#include "errp/pipeline.hpp"

namespace errp::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitData = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetFiles {
  std::filesystem::path recording;
  std::filesystem::path markers;
};

// A dataset is named by its directory (holding exactly one .eegr), by the
// .eegr file, or by the .markers.csv file; the pair shares the file stem.
DatasetFiles resolve_dataset(const std::filesystem::path& path);
LabeledRecording load_dataset(const std::filesystem::path& path);

// Defaults unless a config file is given; a seed overrides the PA1 seed.
PipelineConfig load_pipeline_config(const std::optional<std::filesystem::path>& path,
                                    std::optional<std::uint64_t> seed);

struct GenerateOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> synth_config;
  std::optional<std::uint64_t> seed;
  std::size_t n_datasets{9};
  std::optional<double> template_amplitude_uv;
};

struct TrainOptions {
  std::vector<std::filesystem::path> datasets;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_model;
};

struct DetectOptions {
  std::filesystem::path model;
  std::filesystem::path dataset;
  std::filesystem::path out_csv;
  std::optional<std::filesystem::path> config;
};

struct EvaluateOptions {
  std::filesystem::path detections;
  std::filesystem::path dataset;  // markers carry the ground truth
  std::optional<std::filesystem::path> out_report;
  std::optional<std::filesystem::path> config;
};

struct ReplayOptions {
  std::filesystem::path dataset;
  std::uint16_t port{0};
  bool realtime{false};
  std::size_t chunk_frames{100};
  std::optional<std::filesystem::path> out_csv;  // detections echoed back
};

struct ListenOptions {
  std::string connect;  // host:port
  std::filesystem::path model;
  std::filesystem::path out_csv;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out_recording;
};

struct SearchOptions {
  std::vector<std::filesystem::path> datasets;
  std::filesystem::path plans;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_json;
};

// Each command throws errp::Error / UsageError and writes progress to `log`.
void cmd_generate(const GenerateOptions& options, std::ostream& log);
void cmd_train(const TrainOptions& options, std::ostream& log);
void cmd_detect(const DetectOptions& options, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
void cmd_replay(const ReplayOptions& options, std::ostream& log);
void cmd_listen(const ListenOptions& options, std::ostream& log);
void cmd_search_windows(const SearchOptions& options, std::ostream& log);

// Parses argv (argv[0] = program name), runs the command, maps failures to
// the exit codes above.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace errp::cli
