#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conjauth/codec.hpp"
#include "conjauth/key.hpp"

namespace conjauth {

struct SchemeParams {
  RingParams ring;          // modulus 11, k 10, N 1000
  std::uint32_t n = 3;
  std::uint32_t d = 25;     // entries are isqrt(d)-sparse
  std::uint32_t m_min = 27;
  std::uint32_t m_max = 54;
  std::uint32_t k0_min = 4;
  std::uint32_t k0_max = 6;
  std::uint32_t exp_bound = 5;
  std::uint32_t word_len = 10;
  std::uint32_t endo_image_degree = 3;
  double t = 1e20;          // advisory security parameter

  // Suggested parameters: n=3, N=1000, d=25, k=10, p=11.
  static SchemeParams paper_defaults() { return {}; }
  // n=3, k=4, N=64, d=9, word_len=6, p=11.
  static SchemeParams desk();
  // Fills m and k0 ranges from n and k: m in [n^3, 2n^3], k0 in
  // [ceil(k/3), floor(2k/3)] clamped to [1, k-1].
  static SchemeParams derive(std::uint32_t modulus, std::uint32_t k, std::uint32_t N, std::uint32_t n,
                             std::uint32_t d, std::uint32_t word_len, std::uint32_t exp_bound = 5);

  std::uint32_t sparsity() const;
  // Structural checks only; throws InvalidParameter.
  void validate() const;

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

struct ParamCheck {
  std::string name;
  std::string lhs;
  std::string rhs;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ParamCheck> checks;
  bool all_pass() const;
  std::string to_string() const;
};

// Advisory security inequalities: C(N+k, k) >= t, N <= t, k <= t and
// d^(m/n) * k * log2(N) * n^2 < t at m = m_max. Never throws.
ValidationReport validate_params(const SchemeParams& sp);

// Exact C(N+k, k) as a decimal string.
std::string monomial_count(std::uint32_t N, std::uint32_t k);

struct PublicKey {
  MatrixR A;
  MatrixR P;
};

struct PrivateKey {
  FactoredInvertible X;
};

struct KeyPair {
  PublicKey pub;
  PrivateKey priv;
};

RingPtr make_ring(const SchemeParams& sp);

KeyPair keygen(const SchemeParams& sp, const RingPtr& ring, Rng& rng);

struct Commitment {
  MatrixR B;
  Endomorphism phi;
};

struct Exponents {
  std::uint32_t p = 1;
  std::uint32_t q = 1;
  friend bool operator==(const Exponents&, const Exponents&) = default;
};

struct Constants {
  std::uint32_t c1 = 1;
  std::uint32_t c2 = 1;
  std::uint32_t c3 = 1;
  friend bool operator==(const Constants&, const Constants&) = default;
};

Commitment verifier_commit(const SchemeParams& sp, const RingPtr& ring, Rng& rng);
Exponents prover_exponents(const SchemeParams& sp, Rng& rng);
Constants verifier_constants(const SchemeParams& sp, Rng& rng);

// c1*A + c2*B + c3*A^p*B^q.
MatrixR compute_challenge(const MatrixR& a, const MatrixR& b, const Exponents& e, const Constants& c);

// phi(X^-1 B' X), computed as phi(X)^-1 phi(B') phi(X) with phi(X) kept
// factored.
MatrixR prover_respond(const PrivateKey& priv, const Endomorphism& phi, const MatrixR& b_prime);
// Same, from an already masked challenge phi(B').
MatrixR prover_respond_masked(const PrivateKey& priv, const Endomorphism& phi, const MatrixR& phi_b_prime);

struct Verdict {
  bool accept = false;
  std::string diagnostic;
};

// Masked public values for one session: phi(A), phi(B) and phi(P), each
// computed on first use with one shared evaluator.
class MaskedVerifier {
 public:
  // Keeps a reference to `pub`; copies phi and B.
  MaskedVerifier(const PublicKey& pub, const Endomorphism& phi, const MatrixR& b);
  ~MaskedVerifier();
  MaskedVerifier(MaskedVerifier&&) noexcept;
  MaskedVerifier& operator=(MaskedVerifier&&) noexcept;

  const Endomorphism& phi() const { return *phi_; }
  const MatrixR& phi_a();
  const MatrixR& phi_b();
  const MatrixR& phi_p();
  MatrixR apply(const MatrixR& m);
  // phi(B') = c1 phi(A) + c2 phi(B) + c3 phi(A)^p phi(B)^q.
  MatrixR phi_challenge(const Exponents& e, const Constants& c);
  // Accept iff trace(w(phi A, phi B')) == trace(w(phi P, response)).
  Verdict verify(const MatrixR& phi_b_prime, const MatrixR& response, const Word& w);

 private:
  const PublicKey* pub_;
  std::unique_ptr<Endomorphism> phi_;
  MatrixR b_;
  std::unique_ptr<EndoEvaluator> evaluator_;
  std::optional<MatrixR> phi_a_;
  std::optional<MatrixR> phi_b_;
  std::optional<MatrixR> phi_p_;
};

Verdict verifier_verify(const PublicKey& pub, const Endomorphism& phi, const MatrixR& b_prime,
                        const MatrixR& response, const Word& w);

struct SessionTranscript {
  MatrixR B;
  Endomorphism phi;
  Exponents exponents;
  Constants constants;
  MatrixR phi_b_prime;
  MatrixR response;
  Word word;
  Verdict verdict;
};

// Protocol messages in session order.
struct Hello {
  std::uint8_t version = 1;
  SchemeParams params;
};
struct CommitMsg {
  MatrixR B;
  Endomorphism phi;
};
struct ExponentsMsg {
  Exponents exponents;
};
struct ConstantsMsg {
  Constants constants;
  // A verifier may also send phi(B'); the prover aborts unless it matches
  // its own recomputation.
  std::optional<MatrixR> phi_b_prime;
};
struct ResponseMsg {
  MatrixR response;
};
struct VerdictMsg {
  bool accept = false;
};
struct ErrorMsg {
  std::uint8_t code = 0;
  std::string text;
};

using Message = std::variant<Hello, CommitMsg, ExponentsMsg, ConstantsMsg, ResponseMsg, VerdictMsg, ErrorMsg>;

const char* message_name(const Message& msg);

// Computes the masked response for a session. The default responder uses a
// factored private key; forgers and recovered conjugators plug in here.
using Responder = std::function<MatrixR(const Endomorphism& phi, const MatrixR& phi_b_prime)>;
Responder factored_responder(PrivateKey priv);

// Prover side of one session. Out-of-order input throws ProtocolViolation.
class ProverSession {
 public:
  ProverSession(SchemeParams sp, const PublicKey& pub, Responder responder, Rng rng);

  Hello start();
  ExponentsMsg on_commit(const CommitMsg& msg);
  ResponseMsg on_constants(const ConstantsMsg& msg);
  void on_verdict(const VerdictMsg& msg);

  bool finished() const { return state_ == State::Done; }
  std::optional<bool> verdict() const { return verdict_; }

 private:
  enum class State { Idle, AwaitCommit, AwaitConstants, AwaitVerdict, Done };
  SchemeParams sp_;
  const PublicKey& pub_;
  Responder responder_;
  Rng rng_;
  State state_ = State::Idle;
  std::optional<CommitMsg> commit_;
  Exponents exponents_;
  std::optional<bool> verdict_;
};

// Verifier side of one session. Holds only public values.
class VerifierSession {
 public:
  VerifierSession(SchemeParams sp, const PublicKey& pub, Rng rng);

  CommitMsg on_hello(const Hello& msg);
  ConstantsMsg on_exponents(const ExponentsMsg& msg);
  VerdictMsg on_response(const ResponseMsg& msg);

  bool finished() const { return state_ == State::Done; }
  // Available once the verdict has been produced.
  const SessionTranscript& transcript() const;
  MaskedVerifier& masked();

 private:
  enum class State { AwaitHello, AwaitExponents, AwaitResponse, Done };
  SchemeParams sp_;
  const PublicKey& pub_;
  RingPtr ring_;
  Rng rng_;
  State state_ = State::AwaitHello;
  std::optional<Commitment> commit_;
  std::optional<MaskedVerifier> masked_;
  Exponents exponents_;
  Constants constants_;
  std::optional<MatrixR> phi_b_prime_;
  std::optional<SessionTranscript> transcript_;
};

// Honest in-process session driven through both state machines.
SessionTranscript run_session(const SchemeParams& sp, const KeyPair& keys, std::uint64_t seed);

struct BetaTranscript {
  MatrixR B;
  MatrixR response;
  Word word;
  Verdict verdict;
};

// trace(w(A, B)) == trace(w(P, response)).
Verdict verify_beta(const PublicKey& pub, const MatrixR& b, const MatrixR& response, const Word& w);
// Unmasked protocol: response = X^-1 B X.
BetaTranscript beta_session(const SchemeParams& sp, const KeyPair& keys, Rng& rng);

// Key files: "CJAT", version 1, a kind byte (1 public, 2 private), the
// parameter block, then A and P, or X followed by A and P.
Bytes encode_params(const SchemeParams& sp);
SchemeParams decode_params(ByteReader& r);

Bytes encode_public_key(const SchemeParams& sp, const PublicKey& pub);
Bytes encode_private_key(const SchemeParams& sp, const KeyPair& keys);

struct LoadedPublicKey {
  SchemeParams params;
  RingPtr ring;
  PublicKey pub;
};
struct LoadedKeyPair {
  SchemeParams params;
  RingPtr ring;
  KeyPair keys;
};

LoadedPublicKey decode_public_key(std::span<const std::uint8_t> bytes);
LoadedKeyPair decode_private_key(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace conjauth
