#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errp/detector.hpp"
#include "errp/features.hpp"
#include "errp/pipeline.hpp"
#include "errp/signal_model.hpp"
#include "errp/synth.hpp"

namespace errp {

// .eegr: "EEGR" | version u32 | n_channels u32 | sample_rate f64 | n_samples u64 |
// per channel (name_len u16, UTF-8 name) | n_samples x n_channels f32, frame-major.
// All little-endian.
inline constexpr std::uint32_t kRecordingVersion = 1;

struct RecordingHeader {
  double sample_rate_hz{0.0};
  std::uint64_t n_samples{0};
  std::vector<std::string> channel_names;

  std::size_t n_channels() const { return channel_names.size(); }
};

std::vector<std::uint8_t> encode_recording_header(const RecordingHeader& header);
// Throws BadMagic / VersionUnsupported / TruncatedFile. Sets `consumed`.
RecordingHeader decode_recording_header(std::span<const std::uint8_t> bytes, std::size_t& consumed);
RecordingHeader header_of(const Recording& recording);

std::vector<std::uint8_t> write_recording(const Recording& recording);
// Throws BadMagic / VersionUnsupported / TruncatedFile / TrailingData.
Recording read_recording(std::span<const std::uint8_t> bytes);

// Markers CSV: header `time_s,kind,episode_id,label`.
std::string write_markers(std::span<const MarkerEvent> markers);
// Throws ParseError naming the 1-based data row.
std::vector<MarkerEvent> read_markers(std::string_view text);

// Detections CSV: header `window_end_s,decision_value,predicted_label,episode_id`.
std::string write_detections(std::span<const DetectionEvent> events);
std::vector<DetectionEvent> read_detections(std::string_view text);

inline constexpr int kModelFormatVersion = 1;
std::string write_model(const TrainedModel& model);
// Throws SchemaError on missing keys, wrong types or inconsistent sizes.
TrainedModel read_model(std::string_view text);

nlohmann::json report_to_json(const EvaluationReport& report);
std::string write_report(const EvaluationReport& report);

nlohmann::json plan_to_json(const WindowPlan& plan);
WindowPlan plan_from_json(const nlohmann::json& j);
// Either a JSON array of plans or {"plans": [...]}.
std::vector<WindowPlan> read_plan_list(std::string_view text);

nlohmann::json pipeline_config_to_json(const PipelineConfig& config);
// Missing keys keep their defaults; "plan": "default" selects default_plan().
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::json synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j);

// Whole-file helpers; throw IoError.
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

Recording load_recording(const std::filesystem::path& path);
void save_recording(const std::filesystem::path& path, const Recording& recording);
std::vector<MarkerEvent> load_markers(const std::filesystem::path& path);
void save_markers(const std::filesystem::path& path, std::span<const MarkerEvent> markers);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace errp
