#include "errp/io_formats.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "errp/byte_io.hpp"
#include "errp/error.hpp"

namespace errp {

using nlohmann::json;

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'E', 'E', 'G', 'R'};

void put_samples(std::vector<std::uint8_t>& out, std::span<const float> samples) {
  const std::size_t offset = out.size();
  out.resize(offset + samples.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + offset, samples.data(), samples.size() * 4);
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto v = std::bit_cast<std::uint32_t>(samples[i]);
      for (int b = 0; b < 4; ++b) out[offset + 4 * i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
}

std::vector<float> get_samples(std::span<const std::uint8_t> bytes) {
  std::vector<float> out(bytes.size() / 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), bytes.data(), out.size() * 4);
  } else {
    bytes::Reader r(bytes);
    for (auto& v : out) v = r.f32();
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  fail(ErrorCode::ParseError, "row " + std::to_string(row) + ": " + what);
}

double parse_double(std::string_view s, std::size_t row, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    row_error(row, std::string("bad ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t row, const char* field) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    row_error(row, std::string("bad ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

// Parses CSV body after checking the header line; calls fn(row, fields).
template <typename Fn>
void parse_csv(std::string_view text, std::string_view header, std::size_t n_fields, Fn&& fn) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != header) {
    fail(ErrorCode::ParseError, "row 0: expected header '" + std::string(header) + "'");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != n_fields) {
      row_error(i, "expected " + std::to_string(n_fields) + " fields, got " +
                       std::to_string(fields.size()));
    }
    fn(i, fields);
  }
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::SchemaError, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, std::string("key '") + key + "': " + e.what());
  }
}

template <typename T>
void get_optional(const json& j, const char* key, T& into) {
  if (j.is_object() && j.contains(key)) into = get_field<T>(j, key);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json preprocess_to_json(const PreprocessConfig& c) {
  return {{"window_len_s", c.window_len_s},
          {"stride_s", c.stride_s},
          {"target_rate_hz", c.target_rate_hz},
          {"band_low_hz", c.band_low_hz},
          {"band_high_hz", c.band_high_hz}};
}

PreprocessConfig preprocess_from_json(const json& j) {
  PreprocessConfig c;
  get_optional(j, "window_len_s", c.window_len_s);
  get_optional(j, "stride_s", c.stride_s);
  get_optional(j, "target_rate_hz", c.target_rate_hz);
  get_optional(j, "band_low_hz", c.band_low_hz);
  get_optional(j, "band_high_hz", c.band_high_hz);
  return c;
}

json window_to_json(const WindowSpec& w) {
  return {{"anchor", std::string(to_string(w.anchor))},
          {"alignment", std::string(to_string(w.alignment))},
          {"offset_s", w.offset_s},
          {"length_s", w.length_s}};
}

WindowSpec window_from_json(const json& j) {
  WindowSpec w;
  const auto anchor = parse_anchor(get_field<std::string>(j, "anchor"));
  const auto alignment = parse_alignment(get_field<std::string>(j, "alignment"));
  if (!anchor) fail(ErrorCode::SchemaError, "unknown anchor");
  if (!alignment) fail(ErrorCode::SchemaError, "unknown alignment");
  w.anchor = *anchor;
  w.alignment = *alignment;
  w.offset_s = get_field<double>(j, "offset_s");
  w.length_s = get_field<double>(j, "length_s");
  return w;
}

json xdawn_to_json(const XdawnConfig& c) {
  return {{"n_components", c.n_components}, {"ridge", c.ridge}};
}

XdawnConfig xdawn_from_json(const json& j) {
  XdawnConfig c;
  get_optional(j, "n_components", c.n_components);
  get_optional(j, "ridge", c.ridge);
  return c;
}

json pa1_to_json(const Pa1Config& c) {
  return {{"grid", c.grid}, {"folds", c.folds}, {"passes", c.passes}, {"seed", c.seed}};
}

Pa1Config pa1_from_json(const json& j) {
  Pa1Config c;
  get_optional(j, "grid", c.grid);
  get_optional(j, "folds", c.folds);
  get_optional(j, "passes", c.passes);
  get_optional(j, "seed", c.seed);
  return c;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCode::InvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

std::vector<std::uint8_t> encode_recording_header(const RecordingHeader& h) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  bytes::put_u32(out, kRecordingVersion);
  bytes::put_u32(out, static_cast<std::uint32_t>(h.channel_names.size()));
  bytes::put_f64(out, h.sample_rate_hz);
  bytes::put_u64(out, h.n_samples);
  for (const auto& name : h.channel_names) {
    if (name.size() > 0xFFFF) fail(ErrorCode::InvalidArgument, "channel name too long");
    bytes::put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
  }
  return out;
}

RecordingHeader decode_recording_header(std::span<const std::uint8_t> data, std::size_t& consumed) {
  bytes::Reader r(data);
  const auto magic = r.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    fail(ErrorCode::BadMagic, "not an EEGR recording");
  }
  const std::uint32_t version = r.u32();
  if (version != kRecordingVersion) {
    fail(ErrorCode::VersionUnsupported, "recording version " + std::to_string(version));
  }
  const std::uint32_t n_channels = r.u32();
  RecordingHeader h;
  h.sample_rate_hz = r.f64();
  h.n_samples = r.u64();
  h.channel_names.reserve(n_channels);
  for (std::uint32_t c = 0; c < n_channels; ++c) {
    const std::uint16_t len = r.u16();
    const auto name = r.take(len);
    h.channel_names.emplace_back(name.begin(), name.end());
  }
  consumed = r.position();
  return h;
}

RecordingHeader header_of(const Recording& rec) {
  return {rec.sample_rate_hz(), rec.n_frames(), rec.channel_names()};
}

std::vector<std::uint8_t> write_recording(const Recording& rec) {
  auto out = encode_recording_header(header_of(rec));
  put_samples(out, rec.samples());
  return out;
}

Recording read_recording(std::span<const std::uint8_t> data) {
  std::size_t consumed = 0;
  RecordingHeader h = decode_recording_header(data, consumed);
  const std::uint64_t payload = h.n_samples * h.n_channels() * 4;
  const std::size_t available = data.size() - consumed;
  if (available < payload) {
    fail(ErrorCode::TruncatedFile, "payload has " + std::to_string(available) + " bytes, header promises " +
                                       std::to_string(payload));
  }
  if (available > payload) {
    fail(ErrorCode::TrailingData, std::to_string(available - payload) + " bytes after payload");
  }
  try {
    return Recording(h.sample_rate_hz, std::move(h.channel_names),
                     get_samples(data.subspan(consumed, payload)));
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("invalid recording: ") + e.what());
  }
}

std::string write_markers(std::span<const MarkerEvent> markers) {
  std::string out = "time_s,kind,episode_id,label\n";
  for (const auto& m : markers) {
    out += format_double(m.time_s);
    out += ',';
    out += to_string(m.kind);
    out += ',';
    out += std::to_string(m.episode_id);
    out += ',';
    out += to_string(m.label);
    out += '\n';
  }
  return out;
}

std::vector<MarkerEvent> read_markers(std::string_view text) {
  std::vector<MarkerEvent> out;
  parse_csv(text, "time_s,kind,episode_id,label", 4, [&](std::size_t row, const auto& f) {
    MarkerEvent m;
    m.time_s = parse_double(f[0], row, "time_s");
    const auto kind = parse_marker_kind(f[1]);
    if (!kind) row_error(row, "unknown kind '" + std::string(f[1]) + "'");
    m.kind = *kind;
    m.episode_id = parse_int(f[2], row, "episode_id");
    const auto label = parse_label(f[3]);
    if (!label) row_error(row, "unknown label '" + std::string(f[3]) + "'");
    m.label = *label;
    if (m.time_s < 0.0) row_error(row, "negative time");
    out.push_back(m);
  });
  return out;
}

std::string write_detections(std::span<const DetectionEvent> events) {
  std::string out = "window_end_s,decision_value,predicted_label,episode_id\n";
  for (const auto& e : events) {
    out += format_double(e.window_end_s);
    out += ',';
    out += format_double(e.decision_value);
    out += ',';
    out += to_string(e.predicted_label);
    out += ',';
    out += std::to_string(e.episode_id);
    out += '\n';
  }
  return out;
}

std::vector<DetectionEvent> read_detections(std::string_view text) {
  std::vector<DetectionEvent> out;
  parse_csv(text, "window_end_s,decision_value,predicted_label,episode_id", 4,
            [&](std::size_t row, const auto& f) {
              DetectionEvent e;
              e.window_end_s = parse_double(f[0], row, "window_end_s");
              e.decision_value = parse_double(f[1], row, "decision_value");
              const auto label = parse_label(f[2]);
              if (!label) row_error(row, "unknown label '" + std::string(f[2]) + "'");
              e.predicted_label = *label;
              e.episode_id = parse_int(f[3], row, "episode_id");
              if ((e.predicted_label == Label::Error) != (e.decision_value > 0.0)) {
                row_error(row, "label disagrees with decision value sign");
              }
              out.push_back(e);
            });
  return out;
}

nlohmann::json plan_to_json(const WindowPlan& plan) {
  json err = json::array(), cor = json::array();
  for (const auto& w : plan.error_windows) err.push_back(window_to_json(w));
  for (const auto& w : plan.correct_windows) cor.push_back(window_to_json(w));
  return {{"error_windows", err}, {"correct_windows", cor}};
}

WindowPlan plan_from_json(const nlohmann::json& j) {
  WindowPlan plan;
  for (const auto& w : get_field<json>(j, "error_windows")) plan.error_windows.push_back(window_from_json(w));
  for (const auto& w : get_field<json>(j, "correct_windows")) plan.correct_windows.push_back(window_from_json(w));
  try {
    plan.validate();
  } catch (const Error& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
  return plan;
}

std::vector<WindowPlan> read_plan_list(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
  const json& list = j.is_object() ? get_field<json>(j, "plans") : j;
  if (!list.is_array()) fail(ErrorCode::SchemaError, "plan list must be an array");
  std::vector<WindowPlan> plans;
  for (const auto& p : list) {
    if (p.is_string() && p.get<std::string>() == "default") {
      plans.push_back(default_plan());
    } else {
      plans.push_back(plan_from_json(p));
    }
  }
  return plans;
}

std::string write_model(const TrainedModel& m) {
  const auto& f = m.filter;
  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(f.weights.size()));
  for (Eigen::Index r = 0; r < f.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.weights.cols(); ++c) rows.push_back(f.weights(r, c));
  }
  json grid = {{"grid", m.meta.grid.grid},
               {"mean_bacc", m.meta.grid.mean_bacc},
               {"best_C", m.meta.grid.best_C}};
  json j = {
      {"format_version", kModelFormatVersion},
      {"preprocess", preprocess_to_json(m.preprocess)},
      {"spatial_filter",
       {{"n_components", f.n_components()},
        {"n_channels", f.n_channels()},
        {"weights", rows},
        {"eigenvalues", to_std(f.eigenvalues)}}},
      {"normalizer", {{"means", to_std(m.normalizer.means)}, {"stds", to_std(m.normalizer.stds)}}},
      {"weights", to_std(m.classifier.weights)},
      {"C", m.classifier.C},
      {"training",
       {{"n_datasets", m.meta.n_datasets},
        {"n_vectors", m.meta.n_vectors},
        {"n_error_vectors", m.meta.n_error_vectors},
        {"n_correct_vectors", m.meta.n_correct_vectors},
        {"sample_rate_hz", m.meta.sample_rate_hz},
        {"channel_names", m.meta.channel_names},
        {"plan", plan_to_json(m.meta.plan)},
        {"xdawn", xdawn_to_json(m.meta.xdawn)},
        {"pa1", pa1_to_json(m.meta.pa1)},
        {"grid_search", grid}}},
  };
  return j.dump(2) + "\n";
}

TrainedModel read_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, std::string("not JSON: ") + e.what());
  }
  if (get_field<int>(j, "format_version") != kModelFormatVersion) {
    fail(ErrorCode::SchemaError, "unsupported model format_version");
  }
  TrainedModel m;
  m.preprocess = preprocess_from_json(get_field<json>(j, "preprocess"));

  const json sf = get_field<json>(j, "spatial_filter");
  const auto n_comp = get_field<std::size_t>(sf, "n_components");
  const auto n_ch = get_field<std::size_t>(sf, "n_channels");
  const auto rows = get_field<std::vector<double>>(sf, "weights");
  const auto eig = get_field<std::vector<double>>(sf, "eigenvalues");
  if (n_comp == 0 || n_ch == 0 || rows.size() != n_comp * n_ch || eig.size() != n_comp) {
    fail(ErrorCode::SchemaError, "spatial filter sizes are inconsistent");
  }
  m.filter.weights.resize(static_cast<Eigen::Index>(n_comp), static_cast<Eigen::Index>(n_ch));
  for (std::size_t r = 0; r < n_comp; ++r) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      m.filter.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r * n_ch + c];
    }
  }
  m.filter.eigenvalues = to_vector(eig);

  const json norm = get_field<json>(j, "normalizer");
  m.normalizer.means = to_vector(get_field<std::vector<double>>(norm, "means"));
  m.normalizer.stds = to_vector(get_field<std::vector<double>>(norm, "stds"));
  const std::size_t feature_dim = n_comp * frame_count(m.preprocess.window_len_s, m.preprocess.target_rate_hz);
  if (m.normalizer.dim() != feature_dim || static_cast<std::size_t>(m.normalizer.stds.size()) != feature_dim) {
    fail(ErrorCode::SchemaError, "normalizer length " + std::to_string(m.normalizer.dim()) +
                                     " != feature_dim " + std::to_string(feature_dim));
  }
  m.classifier.weights = to_vector(get_field<std::vector<double>>(j, "weights"));
  m.classifier.C = get_field<double>(j, "C");
  if (static_cast<std::size_t>(m.classifier.weights.size()) != feature_dim + 1) {
    fail(ErrorCode::SchemaError, "weights length " + std::to_string(m.classifier.weights.size()) +
                                     " != feature_dim + 1 = " + std::to_string(feature_dim + 1));
  }

  if (j.contains("training")) {
    const json t = get_field<json>(j, "training");
    auto& meta = m.meta;
    get_optional(t, "n_datasets", meta.n_datasets);
    get_optional(t, "n_vectors", meta.n_vectors);
    get_optional(t, "n_error_vectors", meta.n_error_vectors);
    get_optional(t, "n_correct_vectors", meta.n_correct_vectors);
    get_optional(t, "sample_rate_hz", meta.sample_rate_hz);
    get_optional(t, "channel_names", meta.channel_names);
    if (t.contains("plan")) meta.plan = plan_from_json(t.at("plan"));
    if (t.contains("xdawn")) meta.xdawn = xdawn_from_json(t.at("xdawn"));
    if (t.contains("pa1")) meta.pa1 = pa1_from_json(t.at("pa1"));
    if (t.contains("grid_search")) {
      const json& g = t.at("grid_search");
      get_optional(g, "grid", meta.grid.grid);
      get_optional(g, "mean_bacc", meta.grid.mean_bacc);
      get_optional(g, "best_C", meta.grid.best_C);
    }
  }
  return m;
}

nlohmann::json report_to_json(const EvaluationReport& r) {
  auto counts = [](const ConfusionCounts& c) {
    return json{{"tp", c.tp}, {"fn", c.fn}, {"tn", c.tn}, {"fp", c.fp}};
  };
  json episodes = json::array();
  for (const auto& e : r.episodes) {
    episodes.push_back({{"episode_id", e.episode_id},
                        {"label", std::string(to_string(e.truth))},
                        {"n_windows", e.n_windows},
                        {"n_error_windows", e.n_error_windows},
                        {"error_fraction", e.error_fraction},
                        {"verdict", std::string(to_string(e.verdict))}});
  }
  return {{"tpr", r.tpr},
          {"tnr", r.tnr},
          {"bacc", r.bacc},
          {"episode_mean_bacc", r.episode_mean_bacc},
          {"counts", counts(r.counts)},
          {"n_windows", r.counts.positives() + r.counts.negatives()},
          {"verdict_counts", counts(r.verdict_counts)},
          {"episodes", episodes}};
}

std::string write_report(const EvaluationReport& report) { return report_to_json(report).dump(2) + "\n"; }

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return {{"preprocess", preprocess_to_json(c.preprocess)},
          {"plan", plan_to_json(c.plan)},
          {"xdawn", xdawn_to_json(c.xdawn)},
          {"pa1", pa1_to_json(c.pa1)},
          {"evaluation",
           {{"from_s", c.evaluation.from_s},
            {"to_s", c.evaluation.to_s},
            {"verdict_threshold", c.evaluation.verdict_threshold}}},
          {"detection", {{"end_after_gesture_s", c.detection.end_after_gesture_s}}}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (!j.is_object()) fail(ErrorCode::SchemaError, "pipeline config must be an object");
  if (j.contains("preprocess")) c.preprocess = preprocess_from_json(j.at("preprocess"));
  if (j.contains("plan")) {
    const json& p = j.at("plan");
    c.plan = (p.is_string() && p.get<std::string>() == "default") ? default_plan() : plan_from_json(p);
  }
  if (j.contains("xdawn")) c.xdawn = xdawn_from_json(j.at("xdawn"));
  if (j.contains("pa1")) c.pa1 = pa1_from_json(j.at("pa1"));
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    get_optional(e, "from_s", c.evaluation.from_s);
    get_optional(e, "to_s", c.evaluation.to_s);
    get_optional(e, "verdict_threshold", c.evaluation.verdict_threshold);
  }
  if (j.contains("detection")) {
    get_optional(j.at("detection"), "end_after_gesture_s", c.detection.end_after_gesture_s);
  }
  return c;
}

nlohmann::json synth_config_to_json(const SynthConfig& c) {
  return {{"n_channels", c.n_channels},
          {"sample_rate_hz", c.sample_rate_hz},
          {"n_correct", c.n_correct},
          {"n_error", c.n_error},
          {"movement_offset_s", c.movement_offset_s},
          {"gesture_offset_s", c.gesture_offset_s},
          {"episode_length_s", c.episode_length_s},
          {"gap_s", c.gap_s},
          {"noise_rms_uv", c.noise_rms_uv},
          {"alpha_amplitude_uv", c.alpha_amplitude_uv},
          {"alpha_freq_hz", c.alpha_freq_hz},
          {"template_weights", c.template_weights},
          {"template_amplitude_uv", c.template_amplitude_uv},
          {"realization_latency_s", c.realization_latency_s},
          {"realization_jitter_s", c.realization_jitter_s},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  if (!j.is_object()) fail(ErrorCode::SchemaError, "synth config must be an object");
  get_optional(j, "n_channels", c.n_channels);
  get_optional(j, "sample_rate_hz", c.sample_rate_hz);
  get_optional(j, "n_correct", c.n_correct);
  get_optional(j, "n_error", c.n_error);
  get_optional(j, "movement_offset_s", c.movement_offset_s);
  get_optional(j, "gesture_offset_s", c.gesture_offset_s);
  get_optional(j, "episode_length_s", c.episode_length_s);
  get_optional(j, "gap_s", c.gap_s);
  get_optional(j, "noise_rms_uv", c.noise_rms_uv);
  get_optional(j, "alpha_amplitude_uv", c.alpha_amplitude_uv);
  get_optional(j, "alpha_freq_hz", c.alpha_freq_hz);
  get_optional(j, "template_weights", c.template_weights);
  get_optional(j, "template_amplitude_uv", c.template_amplitude_uv);
  get_optional(j, "realization_latency_s", c.realization_latency_s);
  get_optional(j, "realization_jitter_s", c.realization_jitter_s);
  get_optional(j, "seed", c.seed);
  return c;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> data(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size))) {
    fail(ErrorCode::IoError, "cannot read " + path.string());
  }
  return data;
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto data = read_binary_file(path);
  return std::string(data.begin(), data.end());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_binary_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Recording load_recording(const std::filesystem::path& path) {
  const auto data = read_binary_file(path);
  try {
    return read_recording(data);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void save_recording(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot create " + path.string());
  const auto header = encode_recording_header(header_of(rec));
  out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
  // Stream the payload in 1 MiB pieces.
  const auto& s = rec.samples();
  constexpr std::size_t kPiece = 1 << 18;
  std::vector<std::uint8_t> buf;
  for (std::size_t i = 0; i < s.size(); i += kPiece) {
    buf.clear();
    put_samples(buf, std::span<const float>(s).subspan(i, std::min(kPiece, s.size() - i)));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<MarkerEvent> load_markers(const std::filesystem::path& path) {
  try {
    return read_markers(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void save_markers(const std::filesystem::path& path, std::span<const MarkerEvent> markers) {
  write_text_file(path, write_markers(markers));
}

}  // namespace errp
