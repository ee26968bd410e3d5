#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errp/detector.hpp"
#include "errp/io_formats.hpp"
#include "errp/pipeline.hpp"
#include "errp/signal_model.hpp"

namespace errp::stream {

// Wire format: type u8 | payload_len u32 LE | payload.
enum class FrameType : std::uint8_t {
  Hello = 0x01,
  Samples = 0x02,
  Marker = 0x03,
  End = 0x04,
  Detection = 0x10,
};

inline constexpr std::size_t kHeaderBytes = 5;
inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 28;

struct Frame {
  FrameType type{FrameType::End};
  std::vector<std::uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);
void append_frame(std::vector<std::uint8_t>& out, const Frame& frame);

enum class DecodeStatus { Ok, NeedMoreData };

struct DecodeResult {
  DecodeStatus status{DecodeStatus::NeedMoreData};
  Frame frame;
  std::size_t consumed{0};
};

// A partial frame yields NeedMoreData with consumed = 0. Throws UnknownType, or
// LengthMismatch when the declared length cannot belong to the frame type.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

Frame hello_frame(const RecordingHeader& header);
Frame samples_frame(std::uint64_t start_frame, std::span<const float> frames);
Frame marker_frame(const MarkerEvent& marker);
Frame detection_frame(const DetectionEvent& event);
Frame end_frame();

RecordingHeader parse_hello(const Frame& frame);
struct SamplesPayload {
  std::uint64_t start_frame{0};
  std::vector<float> frames;
};
SamplesPayload parse_samples(const Frame& frame, std::size_t n_channels);
MarkerEvent parse_marker(const Frame& frame);
// episode_id is not carried on the wire and comes back as -1.
DetectionEvent parse_detection(const Frame& frame);

// The frames a replay sends, in order: HELLO, then SAMPLES chunks of
// chunk_frames frames, each preceded by the markers whose frame falls inside or
// before it, then any remaining markers and END.
void replay_frames(const Recording& recording, std::span<const MarkerEvent> markers,
                   std::size_t chunk_frames, const std::function<void(const Frame&)>& sink);

// Connected TCP stream; closes on destruction.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  // Throws ConnectionLost.
  void send_all(std::span<const std::uint8_t> bytes);
  // 0 on orderly shutdown by the peer. Throws ConnectionLost.
  std::size_t receive(std::span<std::uint8_t> buffer);
  void shutdown_write();
  // Unblocks a concurrent receive().
  void shutdown_both();

 private:
  int fd_{-1};
};

Socket connect_tcp(const std::string& host, std::uint16_t port);

class Listener {
 public:
  // Port 0 binds an ephemeral port. Loopback only unless any_address is set.
  explicit Listener(std::uint16_t port, bool any_address = false);
  Listener(Listener&&) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  std::uint16_t port() const { return port_; }
  Socket accept();

 private:
  int fd_{-1};
  std::uint16_t port_{0};
};

// Incremental frame reader over a socket.
class FrameReader {
 public:
  explicit FrameReader(Socket& socket) : socket_(socket) {}
  // nullopt on a clean end of stream between frames; ConnectionLost mid-frame.
  std::optional<Frame> next();

 private:
  Socket& socket_;
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_{0};
};

struct ReplayOptions {
  std::size_t chunk_frames{100};
  bool realtime{false};
};

struct ReplayStats {
  std::size_t samples_frames{0};
  std::size_t marker_frames{0};
  std::vector<DetectionEvent> detections;  // as received back from the client
};

// Serves one session on a connected socket and collects the DETECTION frames
// the client sends back until it closes the connection.
ReplayStats replay(Socket& socket, const Recording& recording,
                   std::span<const MarkerEvent> markers, const ReplayOptions& options = {});

// Protocol state machine of the detecting client, independent of transport.
class ListenSession {
 public:
  ListenSession(const TrainedModel& model, const DetectorConfig& config = {},
                bool keep_samples = false);

  // Returns the DETECTION frames to send back. Throws ProtocolViolation on a
  // frame before HELLO or after END, and on unexpected frame types.
  std::vector<Frame> on_frame(const Frame& frame);

  bool started() const { return header_.has_value(); }
  bool finished() const { return finished_; }
  const std::vector<DetectionEvent>& events() const { return events_; }
  const std::vector<MarkerEvent>& markers() const { return markers_; }
  // Recording rebuilt from the received frames; needs keep_samples.
  Recording recording() const;

 private:
  std::vector<Frame> emit(std::vector<DetectionEvent> events);

  const TrainedModel& model_;
  DetectorConfig config_;
  bool keep_samples_;
  std::optional<RecordingHeader> header_;
  std::optional<StreamDetector> detector_;
  bool finished_{false};
  std::vector<DetectionEvent> events_;
  std::vector<MarkerEvent> markers_;
  std::vector<float> samples_;
};

// Runs a ListenSession over a socket until END, then closes the write side.
// Throws ProtocolViolation if the server disconnects before END.
void listen(Socket& socket, ListenSession& session);

}  // namespace errp::stream
