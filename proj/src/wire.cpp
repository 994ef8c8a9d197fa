#include "conjauth/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <iostream>
#include <list>
#include <thread>

namespace conjauth {

Bytes encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) throw InvalidParameter("frame payload too large");
  ByteWriter w;
  w.u8(frame.type);
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  w.bytes(frame.payload);
  return w.take();
}

namespace {

bool known_type(std::uint8_t type) { return type >= 0x01 && type <= 0x07; }

void check_type(std::uint8_t type) {
  if (!known_type(type)) throw DecodeError(DecodeErrorKind::UnknownType, "unknown message type " + std::to_string(type));
}

}  // namespace

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Frame frame;
  frame.type = r.u8();
  const std::uint32_t len = r.u32();
  check_type(frame.type);
  const auto payload = r.bytes(len);
  frame.payload.assign(payload.begin(), payload.end());
  r.expect_end();
  return frame;
}

std::vector<Frame> split_frames(std::span<const std::uint8_t> bytes) {
  std::vector<Frame> frames;
  ByteReader r(bytes);
  while (r.remaining() > 0) {
    Frame frame;
    frame.type = r.u8();
    const std::uint32_t len = r.u32();
    check_type(frame.type);
    const auto payload = r.bytes(len);
    frame.payload.assign(payload.begin(), payload.end());
    frames.push_back(std::move(frame));
  }
  return frames;
}

Frame to_frame(const Message& msg) {
  ByteWriter w;
  MsgType type = MsgType::Error;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) {
          type = MsgType::Hello;
          w.u8(m.version);
          w.bytes(encode_params(m.params));
        } else if constexpr (std::is_same_v<T, CommitMsg>) {
          type = MsgType::Commit;
          encode_matrix(w, m.B);
          encode_endomorphism(w, m.phi);
        } else if constexpr (std::is_same_v<T, ExponentsMsg>) {
          type = MsgType::Exponents;
          w.u8(m.exponents.p);
          w.u8(m.exponents.q);
        } else if constexpr (std::is_same_v<T, ConstantsMsg>) {
          type = MsgType::Constants;
          w.u8(m.constants.c1);
          w.u8(m.constants.c2);
          w.u8(m.constants.c3);
          w.u8(m.phi_b_prime ? 1 : 0);
          if (m.phi_b_prime) encode_matrix(w, *m.phi_b_prime);
        } else if constexpr (std::is_same_v<T, ResponseMsg>) {
          type = MsgType::Response;
          encode_matrix(w, m.response);
        } else if constexpr (std::is_same_v<T, VerdictMsg>) {
          type = MsgType::Verdict;
          w.u8(m.accept ? 1 : 0);
        } else {
          type = MsgType::Error;
          w.u8(m.code);
          w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(m.text.data()), m.text.size()));
        }
      },
      msg);
  return {static_cast<std::uint8_t>(type), w.take()};
}

Message from_frame(const Frame& frame, const RingPtr& ring) {
  check_type(frame.type);
  ByteReader r(frame.payload);
  const auto need_ring = [&]() -> const RingPtr& {
    if (!ring) throw DecodeError(DecodeErrorKind::Malformed, "message needs a session ring");
    return ring;
  };
  Message out;
  switch (static_cast<MsgType>(frame.type)) {
    case MsgType::Hello: {
      Hello h;
      h.version = r.u8();
      h.params = decode_params(r);
      out = std::move(h);
      break;
    }
    case MsgType::Commit: {
      MatrixR b = decode_matrix(r, need_ring());
      Endomorphism phi = decode_endomorphism(r, ring);
      out = CommitMsg{std::move(b), std::move(phi)};
      break;
    }
    case MsgType::Exponents: {
      ExponentsMsg e;
      e.exponents.p = r.u8();
      e.exponents.q = r.u8();
      out = e;
      break;
    }
    case MsgType::Constants: {
      ConstantsMsg c;
      c.constants.c1 = r.u8();
      c.constants.c2 = r.u8();
      c.constants.c3 = r.u8();
      const std::uint8_t flag = r.u8();
      if (flag > 1) throw DecodeError(DecodeErrorKind::Malformed, "bad challenge flag");
      if (flag == 1) c.phi_b_prime = decode_matrix(r, need_ring());
      out = std::move(c);
      break;
    }
    case MsgType::Response:
      out = ResponseMsg{decode_matrix(r, need_ring())};
      break;
    case MsgType::Verdict: {
      const std::uint8_t v = r.u8();
      if (v > 1) throw DecodeError(DecodeErrorKind::Malformed, "bad verdict byte");
      out = VerdictMsg{v == 1};
      break;
    }
    case MsgType::Error: {
      ErrorMsg e;
      e.code = r.u8();
      const auto text = r.bytes(r.remaining());
      e.text.assign(text.begin(), text.end());
      out = std::move(e);
      break;
    }
  }
  r.expect_end();
  return out;
}

Bytes encode_message(const Message& msg) { return encode_frame(to_frame(msg)); }

Message decode_message(std::span<const std::uint8_t> bytes, const RingPtr& ring) {
  return from_frame(decode_frame(bytes), ring);
}

const char* to_string(WireError code) {
  switch (code) {
    case WireError::None: return "none";
    case WireError::ProtocolViolation: return "protocol-violation";
    case WireError::Decode: return "decode";
    case WireError::ParameterMismatch: return "parameter-mismatch";
    case WireError::Internal: return "internal";
    case WireError::Connect: return "connect";
    case WireError::Closed: return "closed";
    case WireError::PeerError: return "peer-error";
    case WireError::KeyFile: return "key-file";
  }
  return "unknown";
}

Frame read_frame(Stream& s) {
  std::uint8_t header[kFrameHeader];
  s.read_exact(header, 1);
  try {
    s.read_exact(header + 1, kFrameHeader - 1);
  } catch (const ConnectionClosed&) {
    throw DecodeError(DecodeErrorKind::Truncated, "stream ended inside a frame header");
  }
  Frame frame;
  frame.type = header[0];
  check_type(frame.type);
  const std::uint32_t len = header[1] | (header[2] << 8) | (header[3] << 16) | (std::uint32_t{header[4]} << 24);
  if (len > kMaxPayload) throw DecodeError(DecodeErrorKind::Malformed, "payload length over limit");
  frame.payload.resize(len);
  try {
    if (len > 0) s.read_exact(frame.payload.data(), len);
  } catch (const ConnectionClosed&) {
    throw DecodeError(DecodeErrorKind::Truncated, "stream ended inside a frame payload");
  }
  return frame;
}

void write_frame(Stream& s, const Frame& frame) { s.write(encode_frame(frame)); }

namespace {

// One direction of an in-memory pipe.
struct Channel {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::uint8_t> data;
  bool closed = false;
};

class PipeStream : public Stream {
 public:
  PipeStream(std::shared_ptr<Channel> in, std::shared_ptr<Channel> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~PipeStream() override { close(); }

  void write(std::span<const std::uint8_t> data) override {
    std::lock_guard lock(out_->mutex);
    if (out_->closed) throw ConnectionClosed("pipe closed");
    out_->data.insert(out_->data.end(), data.begin(), data.end());
    out_->ready.notify_all();
  }

  void read_exact(std::uint8_t* out, std::size_t size) override {
    std::unique_lock lock(in_->mutex);
    for (std::size_t got = 0; got < size;) {
      in_->ready.wait(lock, [&] { return !in_->data.empty() || in_->closed; });
      if (in_->data.empty()) throw ConnectionClosed("pipe closed by peer");
      while (got < size && !in_->data.empty()) {
        out[got++] = in_->data.front();
        in_->data.pop_front();
      }
    }
  }

  void close() override {
    for (auto* ch : {in_.get(), out_.get()}) {
      std::lock_guard lock(ch->mutex);
      ch->closed = true;
      ch->ready.notify_all();
    }
  }

 private:
  std::shared_ptr<Channel> in_;
  std::shared_ptr<Channel> out_;
};

}  // namespace

std::pair<std::unique_ptr<Stream>, std::unique_ptr<Stream>> make_pipe() {
  auto ab = std::make_shared<Channel>();
  auto ba = std::make_shared<Channel>();
  return {std::make_unique<PipeStream>(ba, ab), std::make_unique<PipeStream>(ab, ba)};
}

RecordingStream::RecordingStream(Stream& inner, std::shared_ptr<Bytes> log, std::shared_ptr<std::mutex> mutex)
    : inner_(inner), log_(std::move(log)), mutex_(std::move(mutex)) {}

void RecordingStream::write(std::span<const std::uint8_t> data) {
  {
    std::lock_guard lock(*mutex_);
    log_->insert(log_->end(), data.begin(), data.end());
  }
  inner_.write(data);
}

void RecordingStream::read_exact(std::uint8_t* out, std::size_t size) { inner_.read_exact(out, size); }

SocketStream::~SocketStream() { close(); }

void SocketStream::write(std::span<const std::uint8_t> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET) throw ConnectionClosed("peer closed the connection");
      throw TransportError(std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void SocketStream::read_exact(std::uint8_t* out, std::size_t size) {
  std::size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd_, out + got, size - got, 0);
    if (n == 0) throw ConnectionClosed("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == ECONNRESET) throw ConnectionClosed("connection reset");
      throw TransportError(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(n);
  }
}

void SocketStream::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

namespace {

std::pair<std::string, std::string> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw TransportError("address must be host:port, got '" + address + "'");
  std::string host = address.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host.empty() ? "127.0.0.1" : host, address.substr(colon + 1)};
}

struct AddrInfo {
  addrinfo* list = nullptr;
  ~AddrInfo() {
    if (list) ::freeaddrinfo(list);
  }
};

AddrInfo resolve(const std::string& address, bool passive) {
  const auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo info;
  const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &info.list);
  if (rc != 0) throw TransportError("cannot resolve " + address + ": " + ::gai_strerror(rc));
  return info;
}

void log_line(const std::string& line) { std::cerr << "conjauth: " << line << std::endl; }

}  // namespace

std::unique_ptr<Stream> connect_tcp(const std::string& address) {
  AddrInfo info = resolve(address, false);
  std::string last = "no addresses";
  for (addrinfo* ai = info.list; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return std::make_unique<SocketStream>(fd);
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  throw TransportError("cannot connect to " + address + ": " + last);
}

namespace {

void send_error(Stream& s, WireError code, const std::string& text) {
  try {
    write_frame(s, to_frame(ErrorMsg{static_cast<std::uint8_t>(code), text}));
  } catch (const Error&) {
    // Peer already gone.
  }
  s.close();
}

class PeerErrorSignal : public Error {
 public:
  using Error::Error;
};

template <class T>
T expect(const Message& msg) {
  if (const auto* err = std::get_if<ErrorMsg>(&msg)) {
    throw PeerErrorSignal("peer error " + std::string(to_string(static_cast<WireError>(err->code))) + ": " + err->text);
  }
  if (const auto* m = std::get_if<T>(&msg)) return *m;
  throw ProtocolViolation(std::string("unexpected ") + message_name(msg));
}

}  // namespace

ProverOutcome serve_session(Stream& s, const SchemeParams& sp, const PublicKey& pub, const Responder& responder,
                            Rng rng) {
  ProverSession session(sp, pub, responder, rng);
  const RingPtr& ring = pub.A.ring();
  ProverOutcome outcome;
  // The prover reacts to whatever arrives; the state machine rejects
  // anything out of order.
  const auto dispatch = [&](const Message& msg) -> std::optional<Message> {
    if (const auto* err = std::get_if<ErrorMsg>(&msg)) {
      throw PeerErrorSignal("peer error " + std::string(to_string(static_cast<WireError>(err->code))) + ": " +
                            err->text);
    }
    if (const auto* m = std::get_if<CommitMsg>(&msg)) return session.on_commit(*m);
    if (const auto* m = std::get_if<ConstantsMsg>(&msg)) return session.on_constants(*m);
    if (const auto* m = std::get_if<VerdictMsg>(&msg)) {
      session.on_verdict(*m);
      return std::nullopt;
    }
    throw ProtocolViolation(std::string("unexpected ") + message_name(msg));
  };
  try {
    write_frame(s, to_frame(session.start()));
    while (!session.finished()) {
      const Message msg = from_frame(read_frame(s), ring);
      if (auto reply = dispatch(msg)) write_frame(s, to_frame(*reply));
    }
    outcome.verdict = session.verdict();
    s.close();
  } catch (const PeerErrorSignal& e) {
    outcome.error = WireError::PeerError;
    outcome.detail = e.what();
    s.close();
  } catch (const ProtocolViolation& e) {
    outcome.error = WireError::ProtocolViolation;
    outcome.detail = e.what();
    send_error(s, outcome.error, outcome.detail);
  } catch (const DecodeError& e) {
    outcome.error = WireError::Decode;
    outcome.detail = std::string(to_string(e.kind())) + ": " + e.what();
    send_error(s, outcome.error, outcome.detail);
  } catch (const ConnectionClosed& e) {
    outcome.error = WireError::Closed;
    outcome.detail = e.what();
  } catch (const std::exception& e) {
    outcome.error = WireError::Internal;
    outcome.detail = e.what();
    send_error(s, outcome.error, "internal error");
  }
  return outcome;
}

int VerifierOutcome::exit_code() const {
  if (error != WireError::None || !transcript) return 2;
  return transcript->verdict.accept ? 0 : 1;
}

VerifierOutcome verify_session(Stream& s, const SchemeParams& sp, const PublicKey& pub, Rng rng,
                               const VerifierOptions& options) {
  VerifierSession session(sp, pub, rng);
  const RingPtr& ring = pub.A.ring();
  VerifierOutcome outcome;
  try {
    const Hello hello = expect<Hello>(from_frame(read_frame(s), ring));
    if (options.constants_first) {
      Rng extra = Rng::derive(rng.next(), 0);
      write_frame(s, to_frame(ConstantsMsg{verifier_constants(sp, extra), std::nullopt}));
    }
    write_frame(s, to_frame(session.on_hello(hello)));
    const auto exponents = expect<ExponentsMsg>(from_frame(read_frame(s), ring));
    write_frame(s, to_frame(session.on_exponents(exponents)));
    const auto response = expect<ResponseMsg>(from_frame(read_frame(s), ring));
    write_frame(s, to_frame(session.on_response(response)));
    outcome.transcript = session.transcript();
    s.close();
  } catch (const PeerErrorSignal& e) {
    outcome.error = WireError::PeerError;
    outcome.detail = e.what();
    s.close();
  } catch (const ProtocolViolation& e) {
    outcome.error = WireError::ProtocolViolation;
    outcome.detail = e.what();
    send_error(s, outcome.error, outcome.detail);
  } catch (const DecodeError& e) {
    outcome.error = WireError::Decode;
    outcome.detail = std::string(to_string(e.kind())) + ": " + e.what();
    send_error(s, outcome.error, outcome.detail);
  } catch (const ConnectionClosed& e) {
    outcome.error = WireError::Closed;
    outcome.detail = e.what();
  } catch (const std::exception& e) {
    outcome.error = WireError::Internal;
    outcome.detail = e.what();
    send_error(s, outcome.error, "internal error");
  }
  return outcome;
}

ProverServer::ProverServer(LoadedKeyPair keys, std::uint64_t seed) : keys_(std::move(keys)), seed_(seed) {}

ProverServer::~ProverServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void ProverServer::bind(const std::string& address) {
  AddrInfo info = resolve(address, true);
  std::string last = "no addresses";
  for (addrinfo* ai = info.list; ai; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      sockaddr_storage bound{};
      socklen_t len = sizeof bound;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
      port_ = ntohs(bound.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                                                : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
      listen_fd_ = fd;
      return;
    }
    last = std::strerror(errno);
    ::close(fd);
  }
  throw TransportError("cannot listen on " + address + ": " + last);
}

std::size_t ProverServer::serve(std::size_t max_sessions, const std::function<void(const ProverOutcome&)>& on_session) {
  if (listen_fd_ < 0) throw TransportError("server is not bound");
  std::list<std::thread> workers;
  std::mutex report_mutex;
  std::size_t accepted = 0;
  while (!stopping_ && (max_sessions == 0 || accepted < max_sessions)) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      if (stopping_) break;
      throw TransportError(std::string("accept: ") + std::strerror(errno));
    }
    const std::uint64_t index = accepted++;
    workers.emplace_back([this, fd, index, &on_session, &report_mutex] {
      SocketStream stream(fd);
      const ProverOutcome outcome =
          serve_session(stream, keys_.params, keys_.keys.pub, factored_responder(keys_.keys.priv),
                        Rng::derive(seed_, index));
      std::lock_guard lock(report_mutex);
      if (outcome.error != WireError::None) {
        log_line("session " + std::to_string(index) + " error code=" + to_string(outcome.error) + " " +
                 outcome.detail);
      } else {
        log_line("session " + std::to_string(index) + " verdict " +
                 (outcome.verdict.value_or(false) ? "accept" : "reject"));
      }
      if (on_session) on_session(outcome);
    });
  }
  for (auto& t : workers) t.join();
  return accepted;
}

void ProverServer::stop() {
  stopping_ = true;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

int run_prover(const std::string& priv_key_file, const std::string& listen_address, std::uint64_t seed,
               std::size_t max_sessions) {
  std::optional<LoadedKeyPair> keys;
  try {
    keys = decode_private_key(read_file(priv_key_file));
  } catch (const Error& e) {
    log_line(std::string("error code=") + to_string(WireError::KeyFile) + " " + e.what());
    return 2;
  }
  ProverServer server(std::move(*keys), seed);
  try {
    server.bind(listen_address);
  } catch (const TransportError& e) {
    log_line(std::string("error code=") + to_string(WireError::Connect) + " " + e.what());
    return 2;
  }
  std::cout << "listening " << server.port() << std::endl;
  server.serve(max_sessions);
  return 0;
}

int run_verifier(const std::string& pub_key_file, const std::string& connect_address, std::uint64_t seed,
                 const VerifierOptions& options) {
  std::optional<LoadedPublicKey> key;
  try {
    key = decode_public_key(read_file(pub_key_file));
  } catch (const Error& e) {
    log_line(std::string("error code=") + to_string(WireError::KeyFile) + " " + e.what());
    return 2;
  }
  std::unique_ptr<Stream> stream;
  try {
    stream = connect_tcp(connect_address);
  } catch (const TransportError& e) {
    log_line(std::string("error code=") + to_string(WireError::Connect) + " " + e.what());
    return 2;
  }
  const VerifierOutcome outcome = verify_session(*stream, key->params, key->pub, Rng(seed), options);
  if (outcome.error != WireError::None) {
    log_line(std::string("error code=") + to_string(outcome.error) + " " + outcome.detail);
  } else {
    std::cout << (outcome.transcript->verdict.accept ? "accept" : "reject") << std::endl;
  }
  return outcome.exit_code();
}

}  // namespace conjauth
