#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "conjauth/protocol.hpp"

namespace conjauth {

enum class MsgType : std::uint8_t {
  Commit = 0x01,
  Exponents = 0x02,
  Constants = 0x03,
  Response = 0x04,
  Verdict = 0x05,
  Hello = 0x06,
  Error = 0x07,
};

// type (1 byte), payload length (u32 LE), payload.
struct Frame {
  std::uint8_t type = 0;
  Bytes payload;
  friend bool operator==(const Frame&, const Frame&) = default;
};

constexpr std::size_t kFrameHeader = 5;
constexpr std::uint32_t kMaxPayload = 1U << 30;

Bytes encode_frame(const Frame& frame);
// Exactly one frame; throws DecodeError (Truncated, UnknownType, Malformed).
Frame decode_frame(std::span<const std::uint8_t> bytes);
// Splits a byte stream into frames.
std::vector<Frame> split_frames(std::span<const std::uint8_t> bytes);

Frame to_frame(const Message& msg);
// Matrix-bearing messages need the session ring; Hello, Exponents, Verdict
// and Error decode without one.
Message from_frame(const Frame& frame, const RingPtr& ring);

Bytes encode_message(const Message& msg);
Message decode_message(std::span<const std::uint8_t> bytes, const RingPtr& ring);

// Error frame codes.
enum class WireError : std::uint8_t {
  None = 0,
  ProtocolViolation = 1,
  Decode = 2,
  ParameterMismatch = 3,
  Internal = 4,
  Connect = 5,
  Closed = 6,
  PeerError = 7,
  KeyFile = 8,
};

const char* to_string(WireError code);

class ConnectionClosed : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

// Reliable ordered byte stream.
class Stream {
 public:
  virtual ~Stream() = default;
  virtual void write(std::span<const std::uint8_t> data) = 0;
  // Throws ConnectionClosed when the peer closes before `size` bytes arrive.
  virtual void read_exact(std::uint8_t* out, std::size_t size) = 0;
  virtual void close() = 0;
};

// Throws DecodeError(Truncated) when the stream ends inside a frame and
// ConnectionClosed when it ends between frames.
Frame read_frame(Stream& s);
void write_frame(Stream& s, const Frame& frame);

// Connected in-memory stream pair.
std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe();

// Tees everything written and read into a shared byte log.
class RecordingStream : public Stream {
 public:
  RecordingStream(Stream& inner, std::shared_ptr<Bytes> log, std::shared_ptr<std::mutex> mutex);
  void write(std::span<const std::uint8_t> data) override;
  void read_exact(std::uint8_t* out, std::size_t size) override;
  void close() override { inner_.close(); }

 private:
  Stream& inner_;
  std::shared_ptr<Bytes> log_;
  std::shared_ptr<std::mutex> mutex_;
};

class SocketStream : public Stream {
 public:
  explicit SocketStream(int fd) : fd_(fd) {}
  ~SocketStream() override;
  SocketStream(const SocketStream&) = delete;
  SocketStream& operator=(const SocketStream&) = delete;

  void write(std::span<const std::uint8_t> data) override;
  void read_exact(std::uint8_t* out, std::size_t size) override;
  void close() override;

 private:
  int fd_;
};

// "host:port"; throws TransportError.
std::unique_ptr<Stream> connect_tcp(const std::string& address);

struct ProverOutcome {
  WireError error = WireError::None;
  std::string detail;
  std::optional<bool> verdict;
};

// Drives one prover session over `s`. Protocol and decode failures send an
// Error frame and close the stream.
ProverOutcome serve_session(Stream& s, const SchemeParams& sp, const PublicKey& pub, const Responder& responder,
                            Rng rng);

struct VerifierOptions {
  // Sends Constants before Commit. Only useful to exercise the prover's
  // state machine.
  bool constants_first = false;
};

struct VerifierOutcome {
  WireError error = WireError::None;
  std::string detail;
  std::optional<SessionTranscript> transcript;
  // 0 accept, 1 reject, 2 protocol or transport error.
  int exit_code() const;
};

VerifierOutcome verify_session(Stream& s, const SchemeParams& sp, const PublicKey& pub, Rng rng,
                               const VerifierOptions& options = {});

// TCP prover daemon. Each accepted connection is one session, served on its
// own thread.
class ProverServer {
 public:
  ProverServer(LoadedKeyPair keys, std::uint64_t seed);
  ~ProverServer();

  // Binds and listens; "host:port" with port 0 picking a free port.
  void bind(const std::string& address);
  std::uint16_t port() const { return port_; }
  // Serves until stop() or until `max_sessions` sessions finished (0 means
  // no limit). Returns the number of sessions served.
  std::size_t serve(std::size_t max_sessions = 0,
                    const std::function<void(const ProverOutcome&)>& on_session = {});
  void stop();

 private:
  LoadedKeyPair keys_;
  std::uint64_t seed_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
};

// Loads the private key, listens and serves forever (or max_sessions).
int run_prover(const std::string& priv_key_file, const std::string& listen_address, std::uint64_t seed,
               std::size_t max_sessions = 0);
// Loads the public key, runs one session and returns the exit code.
int run_verifier(const std::string& pub_key_file, const std::string& connect_address, std::uint64_t seed,
                 const VerifierOptions& options = {});

}  // namespace conjauth
