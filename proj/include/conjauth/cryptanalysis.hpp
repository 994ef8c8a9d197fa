#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conjauth/protocol.hpp"

namespace conjauth {

// Dimensions of the XP = AX system over all monomials of degree <= cap,
// as exact decimal strings.
struct LinearSystemShape {
  std::string rows;
  std::string cols;
  std::string monomials;  // engaged monomials per entry, C(cap + k, k)
};

LinearSystemShape linear_system_shape(const RingParams& ring, std::uint32_t n, std::uint32_t degree_cap);

// Coefficients of XP - AX = 0 over Z_p. Unknown (i, j, mu) is the
// coefficient of monomial mu in X[i][j]; one row per (i, j, nu).
struct LinearSystemModP {
  RingPtr ring;
  std::uint32_t n = 0;
  std::uint32_t degree_cap = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> entries;  // row-major
  std::vector<MonoKey> monomials;     // engaged monomials, graded-lex
  std::vector<MonoKey> row_monomials;

  std::uint8_t at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  std::size_t column(std::uint32_t i, std::uint32_t j, std::size_t mono) const {
    return (static_cast<std::size_t>(i) * n + j) * monomials.size() + mono;
  }
};

constexpr std::size_t kDefaultSystemBudget = std::size_t{1} << 26;

// Throws SizeError with the would-be dimensions when rows * cols exceeds
// `max_cells`. degree_cap is clamped to N-1.
LinearSystemModP build_linear_system(const PublicKey& pub, std::uint32_t degree_cap,
                                     std::size_t max_cells = kDefaultSystemBudget);

// Coefficient vector of X; nullopt when X uses a monomial above the cap.
std::optional<std::vector<std::uint8_t>> flatten_unknowns(const LinearSystemModP& sys, const MatrixR& x);
MatrixR assemble_unknowns(const LinearSystemModP& sys, std::span<const std::uint8_t> v);
// sys * v over Z_p.
std::vector<std::uint8_t> apply_system(const LinearSystemModP& sys, std::span<const std::uint8_t> v);

using NullspaceBasis = std::vector<std::vector<std::uint8_t>>;

// Basis of {v : M v = 0} over Z_p for a row-major rows x cols matrix, by
// Gauss-Jordan elimination. One vector per free column.
NullspaceBasis nullspace_mod_p(std::vector<std::uint8_t> entries, std::size_t rows, std::size_t cols,
                               std::uint32_t modulus);
NullspaceBasis solve_nullspace(const LinearSystemModP& sys);

// Coefficients c with sum c_i basis_i = target, or nullopt.
std::optional<std::vector<std::uint8_t>> express_in_basis(const NullspaceBasis& basis,
                                                          std::span<const std::uint8_t> target,
                                                          std::uint32_t modulus);

// Inverse over the local ring: invert the constant part over Z_p, then sum
// the terminating geometric series. Throws InvalidParameter when M is not
// invertible.
MatrixR local_inverse(const MatrixR& m);

struct Conjugator {
  MatrixR X;
  MatrixR X_inv;
  std::size_t attempts = 0;
};

// Random Z_p combinations of the basis until one is invertible and satisfies
// X'^-1 A X' = P exactly.
std::optional<Conjugator> find_invertible_solution(const LinearSystemModP& sys, const NullspaceBasis& basis,
                                                   const PublicKey& pub, std::size_t budget, Rng& rng);

// Masked response phi(X')^-1 phi(B') phi(X') from an expanded conjugator.
Responder dense_responder(const Conjugator& c);

struct DetForgeryStats {
  std::size_t trials = 0;
  std::size_t honest_det_pass = 0;
  std::size_t honest_trace_pass = 0;
  std::size_t forged_det_pass = 0;
  std::size_t forged_trace_pass = 0;
  std::size_t redraws = 0;  // forgeries redrawn because det(C) was not a unit
};

// Unmasked protocol. The forger answers with a random C, one row scaled so
// det(C) = det(X^-1 B X).
DetForgeryStats forgery_experiment_det(const SchemeParams& sp, std::size_t trials, std::uint64_t seed);

enum class ForgeryStrategy { RandomMatrix, EchoChallenge, TraceMatched };

const char* to_string(ForgeryStrategy s);
std::optional<ForgeryStrategy> parse_strategy(const std::string& name);

struct StrategyStats {
  ForgeryStrategy strategy = ForgeryStrategy::RandomMatrix;
  std::size_t trials = 0;
  std::size_t accepted = 0;
};

struct TraceForgeryReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t honest_accepted = 0;
  std::size_t m1_nonzero = 0;  // counted when check_m1 is set
  double honest_seconds = 0;   // time inside honest sessions only
  double total_seconds = 0;
  std::vector<StrategyStats> strategies;
};

struct TraceForgeryOptions {
  bool check_m1 = false;
  // Stop starting new trials after this many seconds (0 means no limit).
  double deadline_seconds = 0;
  std::function<void(std::size_t trial, const TraceForgeryReport&)> progress;
};

// Per trial: one honest masked session through both state machines, then
// every strategy's forged response checked against the same masked values
// and word. Trial t draws from Rng::derive(seed, t).
TraceForgeryReport forgery_experiment_trace(const SchemeParams& sp, const KeyPair& keys, std::size_t trials,
                                            std::span<const ForgeryStrategy> strategies, std::uint64_t seed,
                                            const TraceForgeryOptions& options = {});

struct KeySizeReport {
  std::uint32_t m = 0;
  double public_formula_bits = 0;   // sqrt(d) * k * log2(N) * n^2
  double private_formula_bits = 0;  // (d * k * log2(N) + log2(n)) * m
  std::size_t matrix_bytes = 0;     // encoded random sqrt(d)-sparse matrix
  std::optional<std::size_t> private_bytes;  // encoded factored key, n >= 2
  std::optional<std::size_t> public_bytes;  // encoded A and P, when measured
};

// Formulas at the given parameters plus measured encodings of a random
// matrix and a generated factored key. P is only formed (and the public key
// measured) when `measure_public` is set, which is expensive at large N.
KeySizeReport key_size_report(const SchemeParams& sp, Rng& rng, bool measure_public = false);

// (phi_i(B'_i), response_i) pairs from `sessions` honest sessions.
std::vector<std::pair<MatrixR, MatrixR>> collect_session_pairs(const SchemeParams& sp, const KeyPair& keys,
                                                               std::size_t sessions, std::uint64_t seed);

}  // namespace conjauth
