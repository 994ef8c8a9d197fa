#include "conjauth/protocol.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace conjauth {

namespace mp = boost::multiprecision;

SchemeParams SchemeParams::desk() { return derive(11, 4, 64, 3, 9, 6); }

SchemeParams SchemeParams::derive(std::uint32_t modulus, std::uint32_t k, std::uint32_t N, std::uint32_t n,
                                  std::uint32_t d, std::uint32_t word_len, std::uint32_t exp_bound) {
  SchemeParams sp;
  sp.ring = RingParams::make(modulus, k, N);
  sp.n = n;
  sp.d = d;
  sp.m_min = n * n * n;
  sp.m_max = 2 * n * n * n;
  sp.k0_min = std::max<std::uint32_t>(1, (k + 2) / 3);
  sp.k0_max = k >= 2 ? std::min(k - 1, 2 * k / 3) : 0;
  sp.exp_bound = exp_bound;
  sp.word_len = word_len;
  return sp;
}

std::uint32_t SchemeParams::sparsity() const {
  std::uint32_t s = 1;
  while ((s + 1) * (s + 1) <= d) ++s;
  return s;
}

void SchemeParams::validate() const {
  ring.validate();
  if (n < 1 || n > 255) throw InvalidParameter("n must be in [1, 255]");
  if (d < 1 || d > 65535) throw InvalidParameter("d must be in [1, 65535]");
  if (m_min < 1 || m_min > m_max) throw InvalidParameter("m range must satisfy 1 <= m_min <= m_max");
  if (exp_bound < 1 || exp_bound > 255) throw InvalidParameter("exp_bound must be in [1, 255]");
  if (word_len < 2 || word_len > 255) throw InvalidParameter("word_len must be in [2, 255]");
  if (endo_image_degree < 1) throw InvalidParameter("endo_image_degree must be >= 1");
  if (ring.k >= 2 && (k0_min < 1 || k0_min > k0_max || k0_max >= ring.k)) {
    throw InvalidParameter("k0 range must satisfy 1 <= k0_min <= k0_max < k");
  }
  if (ring.k > 65535) throw InvalidParameter("k must fit in 16 bits");
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ParamCheck& c) { return c.pass; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  lhs=" << c.lhs << "  rhs=" << c.rhs << '\n';
  }
  return os.str();
}

namespace {

mp::cpp_int binomial(std::uint32_t top, std::uint32_t bottom) {
  mp::cpp_int r = 1;
  for (std::uint32_t i = 1; i <= bottom; ++i) {
    r *= top - bottom + i;
    r /= i;
  }
  return r;
}

std::string scientific(const mp::cpp_bin_float_100& v) {
  std::ostringstream os;
  os.precision(4);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::string monomial_count(std::uint32_t N, std::uint32_t k) { return binomial(N + k, k).str(); }

ValidationReport validate_params(const SchemeParams& sp) {
  using Float = mp::cpp_bin_float_100;
  ValidationReport report;
  const Float t(sp.t);
  const mp::cpp_int monomials = binomial(sp.ring.N + sp.ring.k, sp.ring.k);
  report.checks.push_back({"C(N+k,k) >= t", monomials.str(), scientific(t), Float(monomials) >= t});
  report.checks.push_back({"N <= t", std::to_string(sp.ring.N), scientific(t), Float(sp.ring.N) <= t});
  report.checks.push_back({"k <= t", std::to_string(sp.ring.k), scientific(t), Float(sp.ring.k) <= t});
  const Float exponent = Float(sp.m_max) / sp.n;
  const Float growth = mp::pow(Float(sp.d), exponent) * sp.ring.k * mp::log2(Float(sp.ring.N)) * sp.n * sp.n;
  report.checks.push_back({"d^(m/n)*k*log2(N)*n^2 < t at m=" + std::to_string(sp.m_max), scientific(growth),
                           scientific(t), growth < t});
  return report;
}

RingPtr make_ring(const SchemeParams& sp) { return Ring::create(sp.ring); }

KeyPair keygen(const SchemeParams& sp, const RingPtr& ring, Rng& rng) {
  sp.validate();
  if (sp.n < 2) throw InvalidParameter("keygen needs n >= 2");
  MatrixR a = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
  const auto m = static_cast<std::uint32_t>(rng.uniform(sp.m_min, sp.m_max));
  FactoredInvertible x = gen_private_key(ring, sp.n, m, sp.sparsity(), rng);
  MatrixR p = conjugate(x, a);
  return {{std::move(a), std::move(p)}, {std::move(x)}};
}

Commitment verifier_commit(const SchemeParams& sp, const RingPtr& ring, Rng& rng) {
  if (sp.ring.k < 2) throw InvalidParameter("the masked protocol needs k >= 2");
  MatrixR b = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
  const auto k0 = static_cast<std::uint32_t>(rng.uniform(sp.k0_min, sp.k0_max));
  Endomorphism phi = endo_generate(ring, k0, sp.sparsity(), rng, sp.endo_image_degree);
  return {std::move(b), std::move(phi)};
}

Exponents prover_exponents(const SchemeParams& sp, Rng& rng) {
  Exponents e;
  e.p = static_cast<std::uint32_t>(rng.uniform(1, sp.exp_bound));
  e.q = static_cast<std::uint32_t>(rng.uniform(1, sp.exp_bound));
  return e;
}

Constants verifier_constants(const SchemeParams& sp, Rng& rng) {
  const std::int64_t top = sp.ring.modulus - 1;
  Constants c;
  c.c1 = static_cast<std::uint32_t>(rng.uniform(1, top));
  c.c2 = static_cast<std::uint32_t>(rng.uniform(1, top));
  c.c3 = static_cast<std::uint32_t>(rng.uniform(1, top));
  return c;
}

MatrixR compute_challenge(const MatrixR& a, const MatrixR& b, const Exponents& e, const Constants& c) {
  if (a.n() != b.n()) throw DimensionMismatch("challenge matrices differ in size");
  if (e.p < 1 || e.q < 1) throw InvalidParameter("exponents must be positive");
  MatrixR mixed = mat_mul(mat_pow(a, e.p), mat_pow(b, e.q));
  return mat_add(mat_add(mat_scalar_mul(c.c1, a), mat_scalar_mul(c.c2, b)), mat_scalar_mul(c.c3, mixed));
}

MatrixR prover_respond_masked(const PrivateKey& priv, const Endomorphism& phi, const MatrixR& phi_b_prime) {
  if (phi_b_prime.n() != priv.X.n()) throw DimensionMismatch("challenge and key differ in size");
  const std::vector<ElementaryFactor> factors = endo_apply_factors(phi, priv.X);
  if (factors.empty()) return phi_b_prime;
  return conjugate(factors, phi_b_prime);
}

MatrixR prover_respond(const PrivateKey& priv, const Endomorphism& phi, const MatrixR& b_prime) {
  return prover_respond_masked(priv, phi, endo_apply_matrix(phi, b_prime));
}

namespace {

MatrixR apply_with(EndoEvaluator& evaluator, const MatrixR& m) {
  MatrixR out(m.ring(), m.n());
  for (std::uint32_t i = 0; i < m.n(); ++i)
    for (std::uint32_t j = 0; j < m.n(); ++j) out.at(i, j) = evaluator.apply(m.at(i, j));
  return out;
}

}  // namespace

MaskedVerifier::MaskedVerifier(const PublicKey& pub, const Endomorphism& phi, const MatrixR& b)
    : pub_(&pub), phi_(std::make_unique<Endomorphism>(phi)), b_(b) {
  if (!phi.ring()->same_ring(*pub.A.ring())) throw ParameterMismatch("endomorphism and key rings differ");
  evaluator_ = std::make_unique<EndoEvaluator>(*phi_);
}

MaskedVerifier::~MaskedVerifier() = default;
MaskedVerifier::MaskedVerifier(MaskedVerifier&&) noexcept = default;
MaskedVerifier& MaskedVerifier::operator=(MaskedVerifier&&) noexcept = default;

const MatrixR& MaskedVerifier::phi_a() {
  if (!phi_a_) phi_a_ = apply_with(*evaluator_, pub_->A);
  return *phi_a_;
}

const MatrixR& MaskedVerifier::phi_b() {
  if (!phi_b_) phi_b_ = apply_with(*evaluator_, b_);
  return *phi_b_;
}

const MatrixR& MaskedVerifier::phi_p() {
  if (!phi_p_) phi_p_ = apply_with(*evaluator_, pub_->P);
  return *phi_p_;
}

MatrixR MaskedVerifier::apply(const MatrixR& m) { return apply_with(*evaluator_, m); }

MatrixR MaskedVerifier::phi_challenge(const Exponents& e, const Constants& c) {
  return compute_challenge(phi_a(), phi_b(), e, c);
}

Verdict MaskedVerifier::verify(const MatrixR& phi_b_prime, const MatrixR& response, const Word& w) {
  if (!w.is_valid()) return {false, "invalid word"};
  if (response.n() != pub_->A.n() || phi_b_prime.n() != pub_->A.n()) return {false, "dimension mismatch"};
  if (!response.ring()->same_ring(*pub_->A.ring())) return {false, "parameter mismatch"};
  const TruncatedPoly t1 = evaluate_word_trace(w, phi_a(), phi_b_prime);
  const TruncatedPoly t2 = evaluate_word_trace(w, phi_p(), response);
  if (t1 == t2) return {true, ""};
  return {false, "trace mismatch"};
}

Verdict verifier_verify(const PublicKey& pub, const Endomorphism& phi, const MatrixR& b_prime,
                        const MatrixR& response, const Word& w) {
  MaskedVerifier masked(pub, phi, b_prime);
  const MatrixR phi_b_prime = masked.apply(b_prime);
  return masked.verify(phi_b_prime, response, w);
}

const char* message_name(const Message& msg) {
  static constexpr const char* kNames[] = {"Hello", "Commit", "Exponents", "Constants", "Response", "Verdict", "Error"};
  return kNames[msg.index()];
}

Responder factored_responder(PrivateKey priv) {
  return [priv = std::move(priv)](const Endomorphism& phi, const MatrixR& phi_b_prime) {
    return prover_respond_masked(priv, phi, phi_b_prime);
  };
}

ProverSession::ProverSession(SchemeParams sp, const PublicKey& pub, Responder responder, Rng rng)
    : sp_(std::move(sp)), pub_(pub), responder_(std::move(responder)), rng_(rng) {}

Hello ProverSession::start() {
  if (state_ != State::Idle) throw ProtocolViolation("prover already started");
  state_ = State::AwaitCommit;
  return {1, sp_};
}

ExponentsMsg ProverSession::on_commit(const CommitMsg& msg) {
  if (state_ != State::AwaitCommit) throw ProtocolViolation("unexpected Commit");
  if (msg.B.n() != sp_.n || !msg.B.ring()->same_ring(*pub_.A.ring()) || !msg.phi.ring()->same_ring(*pub_.A.ring())) {
    throw ProtocolViolation("commitment does not match the session parameters");
  }
  commit_ = msg;
  exponents_ = prover_exponents(sp_, rng_);
  state_ = State::AwaitConstants;
  return {exponents_};
}

ResponseMsg ProverSession::on_constants(const ConstantsMsg& msg) {
  if (state_ != State::AwaitConstants) throw ProtocolViolation("unexpected Constants");
  const auto& c = msg.constants;
  const std::uint32_t p = sp_.ring.modulus;
  if (c.c1 == 0 || c.c2 == 0 || c.c3 == 0 || c.c1 >= p || c.c2 >= p || c.c3 >= p) {
    throw ProtocolViolation("constants must be nonzero field elements");
  }
  EndoEvaluator evaluator(commit_->phi);
  const MatrixR phi_a = apply_with(evaluator, pub_.A);
  const MatrixR phi_b = apply_with(evaluator, commit_->B);
  const MatrixR phi_b_prime = compute_challenge(phi_a, phi_b, exponents_, c);
  if (msg.phi_b_prime && !(*msg.phi_b_prime == phi_b_prime)) {
    throw ProtocolViolation("transmitted challenge differs from the recomputed one");
  }
  state_ = State::AwaitVerdict;
  return {responder_(commit_->phi, phi_b_prime)};
}

void ProverSession::on_verdict(const VerdictMsg& msg) {
  if (state_ != State::AwaitVerdict) throw ProtocolViolation("unexpected Verdict");
  verdict_ = msg.accept;
  state_ = State::Done;
}

VerifierSession::VerifierSession(SchemeParams sp, const PublicKey& pub, Rng rng)
    : sp_(std::move(sp)), pub_(pub), ring_(pub.A.ring()), rng_(rng) {}

CommitMsg VerifierSession::on_hello(const Hello& msg) {
  if (state_ != State::AwaitHello) throw ProtocolViolation("unexpected Hello");
  if (msg.version != 1) throw ProtocolViolation("unsupported protocol version " + std::to_string(msg.version));
  if (encode_params(msg.params) != encode_params(sp_)) throw ProtocolViolation("prover parameters differ");
  commit_ = verifier_commit(sp_, ring_, rng_);
  masked_.emplace(pub_, commit_->phi, commit_->B);
  state_ = State::AwaitExponents;
  return {commit_->B, commit_->phi};
}

ConstantsMsg VerifierSession::on_exponents(const ExponentsMsg& msg) {
  if (state_ != State::AwaitExponents) throw ProtocolViolation("unexpected Exponents");
  const auto& e = msg.exponents;
  if (e.p < 1 || e.q < 1 || e.p > sp_.exp_bound || e.q > sp_.exp_bound) {
    throw ProtocolViolation("exponents outside [1, exp_bound]");
  }
  exponents_ = e;
  constants_ = verifier_constants(sp_, rng_);
  state_ = State::AwaitResponse;
  return {constants_, std::nullopt};
}

VerdictMsg VerifierSession::on_response(const ResponseMsg& msg) {
  if (state_ != State::AwaitResponse) throw ProtocolViolation("unexpected Response");
  MatrixR phi_b_prime = masked_->phi_challenge(exponents_, constants_);
  Word word = random_word(sp_.word_len, rng_);
  Verdict verdict = masked_->verify(phi_b_prime, msg.response, word);
  const bool accept = verdict.accept;
  transcript_ = SessionTranscript{commit_->B,     commit_->phi,  exponents_, constants_, std::move(phi_b_prime),
                                  msg.response,   std::move(word), std::move(verdict)};
  state_ = State::Done;
  return {accept};
}

const SessionTranscript& VerifierSession::transcript() const {
  if (!transcript_) throw ProtocolViolation("session has no verdict yet");
  return *transcript_;
}

MaskedVerifier& VerifierSession::masked() {
  if (!masked_) throw ProtocolViolation("session has no commitment yet");
  return *masked_;
}

SessionTranscript run_session(const SchemeParams& sp, const KeyPair& keys, std::uint64_t seed) {
  ProverSession prover(sp, keys.pub, factored_responder(keys.priv), Rng::derive(seed, 1));
  VerifierSession verifier(sp, keys.pub, Rng::derive(seed, 2));
  const CommitMsg commit = verifier.on_hello(prover.start());
  const ConstantsMsg constants = verifier.on_exponents(prover.on_commit(commit));
  const VerdictMsg verdict = verifier.on_response(prover.on_constants(constants));
  prover.on_verdict(verdict);
  return verifier.transcript();
}

Verdict verify_beta(const PublicKey& pub, const MatrixR& b, const MatrixR& response, const Word& w) {
  if (!w.is_valid()) return {false, "invalid word"};
  if (response.n() != pub.A.n() || b.n() != pub.A.n()) return {false, "dimension mismatch"};
  if (!response.ring()->same_ring(*pub.A.ring())) return {false, "parameter mismatch"};
  if (evaluate_word_trace(w, pub.A, b) == evaluate_word_trace(w, pub.P, response)) return {true, ""};
  return {false, "trace mismatch"};
}

BetaTranscript beta_session(const SchemeParams& sp, const KeyPair& keys, Rng& rng) {
  MatrixR b = random_matrix(keys.pub.A.ring(), sp.n, sp.sparsity(), true, rng);
  MatrixR response = conjugate(keys.priv.X, b);
  Word word = random_word(sp.word_len, rng);
  Verdict verdict = verify_beta(keys.pub, b, response, word);
  return {std::move(b), std::move(response), std::move(word), std::move(verdict)};
}

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'J', 'A', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kPublicKind = 1;
constexpr std::uint8_t kPrivateKind = 2;

void write_header(ByteWriter& w, const SchemeParams& sp, std::uint8_t kind) {
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(kind);
  w.bytes(encode_params(sp));
}

SchemeParams read_header(ByteReader& r, std::uint8_t kind) {
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw DecodeError(DecodeErrorKind::Malformed, "not a key file (bad magic)");
  }
  const std::uint8_t version = r.u8();
  if (version != kVersion) throw DecodeError(DecodeErrorKind::Malformed, "unsupported key file version");
  const std::uint8_t found = r.u8();
  if (found != kind) {
    throw DecodeError(DecodeErrorKind::Malformed,
                      kind == kPublicKind ? "expected a public key file" : "expected a private key file");
  }
  return decode_params(r);
}

PublicKey read_public(ByteReader& r, const SchemeParams& sp, const RingPtr& ring) {
  MatrixR a = decode_matrix(r, ring);
  MatrixR p = decode_matrix(r, ring);
  if (a.n() != sp.n || p.n() != sp.n) throw DecodeError(DecodeErrorKind::Malformed, "key matrix size differs from n");
  return {std::move(a), std::move(p)};
}

}  // namespace

Bytes encode_params(const SchemeParams& sp) {
  ByteWriter w;
  w.u16(sp.ring.modulus);
  w.u16(sp.ring.k);
  w.u32(sp.ring.N);
  w.u8(sp.n);
  w.u16(sp.d);
  w.u8(sp.word_len);
  w.u8(sp.exp_bound);
  return w.take();
}

SchemeParams decode_params(ByteReader& r) {
  const std::uint32_t modulus = r.u16();
  const std::uint32_t k = r.u16();
  const std::uint32_t N = r.u32();
  const std::uint32_t n = r.u8();
  const std::uint32_t d = r.u16();
  const std::uint32_t word_len = r.u8();
  const std::uint32_t exp_bound = r.u8();
  try {
    SchemeParams sp = SchemeParams::derive(modulus, k, N, n, d, word_len, exp_bound);
    sp.validate();
    return sp;
  } catch (const InvalidParameter& e) {
    throw DecodeError(DecodeErrorKind::Malformed, std::string("parameters: ") + e.what());
  }
}

Bytes encode_public_key(const SchemeParams& sp, const PublicKey& pub) {
  ByteWriter w;
  write_header(w, sp, kPublicKind);
  encode_matrix(w, pub.A);
  encode_matrix(w, pub.P);
  return w.take();
}

Bytes encode_private_key(const SchemeParams& sp, const KeyPair& keys) {
  ByteWriter w;
  write_header(w, sp, kPrivateKind);
  encode_key(w, keys.priv.X);
  encode_matrix(w, keys.pub.A);
  encode_matrix(w, keys.pub.P);
  return w.take();
}

LoadedPublicKey decode_public_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SchemeParams sp = read_header(r, kPublicKind);
  RingPtr ring = make_ring(sp);
  PublicKey pub = read_public(r, sp, ring);
  r.expect_end();
  return {std::move(sp), std::move(ring), std::move(pub)};
}

LoadedKeyPair decode_private_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  SchemeParams sp = read_header(r, kPrivateKind);
  RingPtr ring = make_ring(sp);
  FactoredInvertible x = decode_key(r, ring, sp.n);
  PublicKey pub = read_public(r, sp, ring);
  r.expect_end();
  return {std::move(sp), std::move(ring), {std::move(pub), {std::move(x)}}};
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace conjauth
