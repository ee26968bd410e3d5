#include "errp/stream.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include "errp/byte_io.hpp"
#include "errp/error.hpp"

namespace errp::stream {

namespace {

constexpr std::size_t kMarkerPayload = 8 + 1 + 4 + 1;
constexpr std::size_t kDetectionPayload = 8 + 8 + 1;

bool known_type(std::uint8_t t) {
  switch (static_cast<FrameType>(t)) {
    case FrameType::Hello:
    case FrameType::Samples:
    case FrameType::Marker:
    case FrameType::End:
    case FrameType::Detection:
      return true;
  }
  return false;
}

void check_length(FrameType type, std::size_t len) {
  bool ok = len <= kMaxPayloadBytes;
  switch (type) {
    case FrameType::Hello: ok = ok && len >= 24; break;
    case FrameType::Samples: ok = ok && len >= 8 && (len - 8) % 4 == 0; break;
    case FrameType::Marker: ok = len == kMarkerPayload; break;
    case FrameType::End: ok = len == 0; break;
    case FrameType::Detection: ok = len == kDetectionPayload; break;
  }
  if (!ok) {
    fail(ErrorCode::LengthMismatch, "payload length " + std::to_string(len) + " invalid for frame type " +
                                        std::to_string(static_cast<int>(type)));
  }
}

void expect_type(const Frame& frame, FrameType type) {
  if (frame.type != type) fail(ErrorCode::InvalidArgument, "unexpected frame type");
}

void set_nodelay(int fd) {
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

[[noreturn]] void sys_fail(ErrorCode code, const std::string& what) {
  fail(code, what + ": " + std::strerror(errno));
}

}  // namespace

void append_frame(std::vector<std::uint8_t>& out, const Frame& frame) {
  check_length(frame.type, frame.payload.size());
  bytes::put_u8(out, static_cast<std::uint8_t>(frame.type));
  bytes::put_u32(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + frame.payload.size());
  append_frame(out, frame);
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> data) {
  DecodeResult result;
  if (data.size() < kHeaderBytes) return result;
  bytes::Reader r(data);
  const std::uint8_t type = r.u8();
  if (!known_type(type)) fail(ErrorCode::UnknownType, "unknown frame type " + std::to_string(type));
  const std::uint32_t len = r.u32();
  check_length(static_cast<FrameType>(type), len);
  if (r.remaining() < len) return result;
  const auto payload = r.take(len);
  result.status = DecodeStatus::Ok;
  result.frame.type = static_cast<FrameType>(type);
  result.frame.payload.assign(payload.begin(), payload.end());
  result.consumed = kHeaderBytes + len;
  return result;
}

Frame hello_frame(const RecordingHeader& header) {
  return {FrameType::Hello, encode_recording_header(header)};
}

Frame samples_frame(std::uint64_t start_frame, std::span<const float> frames) {
  Frame f{FrameType::Samples, {}};
  f.payload.reserve(8 + frames.size() * 4);
  bytes::put_u64(f.payload, start_frame);
  for (float v : frames) bytes::put_f32(f.payload, v);
  return f;
}

Frame marker_frame(const MarkerEvent& m) {
  if (m.episode_id < 0 || m.episode_id > 0xFFFFFFFFLL) {
    fail(ErrorCode::InvalidArgument, "episode id does not fit the wire format");
  }
  Frame f{FrameType::Marker, {}};
  bytes::put_f64(f.payload, m.time_s);
  bytes::put_u8(f.payload, static_cast<std::uint8_t>(m.kind));
  bytes::put_u32(f.payload, static_cast<std::uint32_t>(m.episode_id));
  bytes::put_u8(f.payload, static_cast<std::uint8_t>(m.label));
  return f;
}

Frame detection_frame(const DetectionEvent& e) {
  Frame f{FrameType::Detection, {}};
  bytes::put_f64(f.payload, e.window_end_s);
  bytes::put_f64(f.payload, e.decision_value);
  bytes::put_u8(f.payload, static_cast<std::uint8_t>(e.predicted_label));
  return f;
}

Frame end_frame() { return {FrameType::End, {}}; }

RecordingHeader parse_hello(const Frame& frame) {
  expect_type(frame, FrameType::Hello);
  std::size_t consumed = 0;
  RecordingHeader h;
  try {
    h = decode_recording_header(frame.payload, consumed);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TruncatedFile) throw;
    fail(ErrorCode::LengthMismatch, std::string("HELLO payload: ") + e.what());
  }
  if (consumed != frame.payload.size()) fail(ErrorCode::LengthMismatch, "HELLO carries trailing bytes");
  if (h.n_channels() == 0 || !(h.sample_rate_hz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "HELLO header has no channels or no sample rate");
  }
  return h;
}

SamplesPayload parse_samples(const Frame& frame, std::size_t n_channels) {
  expect_type(frame, FrameType::Samples);
  bytes::Reader r(frame.payload, ErrorCode::LengthMismatch);
  SamplesPayload s;
  s.start_frame = r.u64();
  const std::size_t n = r.remaining() / 4;
  if (n_channels == 0 || n % n_channels != 0) {
    fail(ErrorCode::LengthMismatch, "SAMPLES payload is not a whole number of frames");
  }
  s.frames.resize(n);
  for (auto& v : s.frames) v = r.f32();
  return s;
}

MarkerEvent parse_marker(const Frame& frame) {
  expect_type(frame, FrameType::Marker);
  bytes::Reader r(frame.payload, ErrorCode::LengthMismatch);
  MarkerEvent m;
  m.time_s = r.f64();
  const std::uint8_t kind = r.u8();
  m.episode_id = r.u32();
  const std::uint8_t label = r.u8();
  if (kind > 3) fail(ErrorCode::ProtocolViolation, "marker kind " + std::to_string(kind));
  if (label > 1) fail(ErrorCode::ProtocolViolation, "marker label " + std::to_string(label));
  m.kind = static_cast<MarkerKind>(kind);
  m.label = static_cast<Label>(label);
  return m;
}

DetectionEvent parse_detection(const Frame& frame) {
  expect_type(frame, FrameType::Detection);
  bytes::Reader r(frame.payload, ErrorCode::LengthMismatch);
  DetectionEvent e;
  e.window_end_s = r.f64();
  e.decision_value = r.f64();
  const std::uint8_t label = r.u8();
  if (label > 1) fail(ErrorCode::ProtocolViolation, "detection label " + std::to_string(label));
  e.predicted_label = static_cast<Label>(label);
  return e;
}

void replay_frames(const Recording& recording, std::span<const MarkerEvent> markers,
                   std::size_t chunk_frames, const std::function<void(const Frame&)>& sink) {
  if (chunk_frames == 0) fail(ErrorCode::InvalidArgument, "chunk_frames must be positive");
  std::vector<MarkerEvent> ordered(markers.begin(), markers.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.time_s < b.time_s; });

  sink(hello_frame(header_of(recording)));
  const std::size_t n_frames = recording.n_frames();
  const double rate = recording.sample_rate_hz();
  std::size_t next_marker = 0;
  for (std::size_t start = 0; start < n_frames; start += chunk_frames) {
    const std::size_t count = std::min(chunk_frames, n_frames - start);
    while (next_marker < ordered.size() &&
           frame_index(ordered[next_marker].time_s, rate) < static_cast<std::int64_t>(start + count)) {
      sink(marker_frame(ordered[next_marker++]));
    }
    sink(samples_frame(start, recording.frames(start, count)));
  }
  while (next_marker < ordered.size()) sink(marker_frame(ordered[next_marker++]));
  sink(end_frame());
}

Socket::Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

void Socket::send_all(std::span<const std::uint8_t> data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      sys_fail(ErrorCode::ConnectionLost, "send");
    }
    data = data.subspan(static_cast<std::size_t>(n));
  }
}

std::size_t Socket::receive(std::span<std::uint8_t> buffer) {
  for (;;) {
    const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    sys_fail(ErrorCode::ConnectionLost, "recv");
  }
}

void Socket::shutdown_write() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void Socket::shutdown_both() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket connect_tcp(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
    fail(ErrorCode::ConnectionLost, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> list(found, &::freeaddrinfo);
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      set_nodelay(s.fd());
      return s;
    }
  }
  sys_fail(ErrorCode::ConnectionLost, "connect " + host + ":" + service);
}

Listener::Listener(std::uint16_t port, bool any_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) sys_fail(ErrorCode::IoError, "socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(any_address ? INADDR_ANY : INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 1) != 0) {
    const int saved = errno;
    ::close(fd_);
    errno = saved;
    sys_fail(ErrorCode::IoError, "bind port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Listener::Listener(Listener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Socket Listener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_nodelay(fd);
      return Socket(fd);
    }
    if (errno != EINTR) sys_fail(ErrorCode::ConnectionLost, "accept");
  }
}

std::optional<Frame> FrameReader::next() {
  for (;;) {
    const auto pending = std::span<const std::uint8_t>(buffer_).subspan(offset_);
    DecodeResult r = decode_frame(pending);
    if (r.status == DecodeStatus::Ok) {
      offset_ += r.consumed;
      return std::move(r.frame);
    }
    if (offset_ > 0) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
      offset_ = 0;
    }
    std::uint8_t chunk[1 << 16];
    const std::size_t n = socket_.receive(chunk);
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      fail(ErrorCode::ConnectionLost, "connection closed inside a frame");
    }
    buffer_.insert(buffer_.end(), chunk, chunk + n);
  }
}

ReplayStats replay(Socket& socket, const Recording& recording,
                   std::span<const MarkerEvent> markers, const ReplayOptions& options) {
  ReplayStats stats;
  std::mutex mutex;
  std::exception_ptr reader_error;
  std::thread reader([&] {
    try {
      FrameReader frames(socket);
      while (auto f = frames.next()) {
        if (f->type != FrameType::Detection) {
          fail(ErrorCode::ProtocolViolation, "client sent a non-DETECTION frame");
        }
        const auto e = parse_detection(*f);
        std::lock_guard lock(mutex);
        stats.detections.push_back(e);
      }
    } catch (...) {
      reader_error = std::current_exception();
    }
  });

  const auto t0 = std::chrono::steady_clock::now();
  const double rate = recording.sample_rate_hz();
  std::exception_ptr writer_error;
  try {
    std::vector<std::uint8_t> buffer;
    replay_frames(recording, markers, options.chunk_frames, [&](const Frame& f) {
      if (f.type == FrameType::Samples) {
        ++stats.samples_frames;
        if (options.realtime) {
          const auto start = bytes::Reader(f.payload).u64();
          const std::size_t count = (f.payload.size() - 8) / 4 / recording.n_channels();
          // A chunk becomes available once its last sample has been "recorded".
          const auto due = t0 + std::chrono::duration<double>(static_cast<double>(start + count) / rate);
          std::this_thread::sleep_until(
              std::chrono::time_point_cast<std::chrono::steady_clock::duration>(due));
        }
      } else if (f.type == FrameType::Marker) {
        ++stats.marker_frames;
      }
      buffer.clear();
      append_frame(buffer, f);
      socket.send_all(buffer);
    });
  } catch (...) {
    writer_error = std::current_exception();
  }
  if (writer_error) socket.shutdown_both();
  reader.join();
  if (writer_error) std::rethrow_exception(writer_error);
  if (reader_error) std::rethrow_exception(reader_error);
  return stats;
}

ListenSession::ListenSession(const TrainedModel& model, const DetectorConfig& config,
                             bool keep_samples)
    : model_(model), config_(config), keep_samples_(keep_samples) {}

std::vector<Frame> ListenSession::emit(std::vector<DetectionEvent> events) {
  std::vector<Frame> out;
  out.reserve(events.size());
  for (auto& e : events) {
    out.push_back(detection_frame(e));
    events_.push_back(e);
  }
  return out;
}

std::vector<Frame> ListenSession::on_frame(const Frame& frame) {
  if (finished_) fail(ErrorCode::ProtocolViolation, "frame received after END");
  if (!header_) {
    if (frame.type != FrameType::Hello) fail(ErrorCode::ProtocolViolation, "first frame is not HELLO");
    header_ = parse_hello(frame);
    detector_.emplace(model_, header_->n_channels(), header_->sample_rate_hz, config_);
    return {};
  }
  switch (frame.type) {
    case FrameType::Samples: {
      auto s = parse_samples(frame, header_->n_channels());
      auto events = detector_->push_samples(s.start_frame, s.frames);
      if (keep_samples_) samples_.insert(samples_.end(), s.frames.begin(), s.frames.end());
      return emit(std::move(events));
    }
    case FrameType::Marker: {
      const auto m = parse_marker(frame);
      markers_.push_back(m);
      return emit(detector_->push_marker(m));
    }
    case FrameType::End:
      finished_ = true;
      return emit(detector_->finish());
    case FrameType::Hello:
      fail(ErrorCode::ProtocolViolation, "second HELLO");
    case FrameType::Detection:
      fail(ErrorCode::ProtocolViolation, "DETECTION frame sent to the detector");
  }
  fail(ErrorCode::ProtocolViolation, "unexpected frame");
}

Recording ListenSession::recording() const {
  if (!header_) fail(ErrorCode::ProtocolViolation, "no HELLO received");
  if (!keep_samples_) fail(ErrorCode::InvalidArgument, "session did not keep samples");
  return Recording(header_->sample_rate_hz, header_->channel_names, samples_);
}

void listen(Socket& socket, ListenSession& session) {
  FrameReader reader(socket);
  std::vector<std::uint8_t> out;
  while (!session.finished()) {
    auto frame = reader.next();
    if (!frame) fail(ErrorCode::ProtocolViolation, "server closed the connection before END");
    out.clear();
    for (const auto& f : session.on_frame(*frame)) append_frame(out, f);
    if (!out.empty()) socket.send_all(out);
  }
  // Anything after END violates the protocol; the server should now close.
  socket.shutdown_write();
}

}  // namespace errp::stream
