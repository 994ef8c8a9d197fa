#include "conjauth/cryptanalysis.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace conjauth {

namespace mp = boost::multiprecision;

namespace {

mp::cpp_int binomial(std::uint32_t top, std::uint32_t bottom) {
  mp::cpp_int r = 1;
  for (std::uint32_t i = 1; i <= bottom; ++i) {
    r *= top - bottom + i;
    r /= i;
  }
  return r;
}

// All monomials of degree <= max_degree in graded-lex order.
std::vector<MonoKey> monomials_up_to(const Ring& ring, std::uint32_t max_degree) {
  std::vector<MonoKey> out;
  std::vector<std::uint32_t> exps(ring.k(), 0);
  const auto rec = [&](auto&& self, std::uint32_t var, std::uint32_t left) -> void {
    if (var + 1 == ring.k()) {
      for (std::uint32_t e = 0; e <= left; ++e) {
        exps[var] = e;
        out.push_back(ring.pack(exps));
      }
      exps[var] = 0;
      return;
    }
    for (std::uint32_t e = 0; e <= left; ++e) {
      exps[var] = e;
      self(self, var + 1, left - e);
    }
    exps[var] = 0;
  };
  rec(rec, 0, max_degree);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t pow_mod(std::uint32_t base, std::uint32_t e, std::uint32_t p) {
  std::uint64_t r = 1;
  std::uint64_t b = base % p;
  for (; e; e >>= 1, b = b * b % p)
    if (e & 1) r = r * b % p;
  return static_cast<std::uint32_t>(r);
}

std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) { return pow_mod(a, p - 2, p); }

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> row_reduce(std::vector<std::uint8_t>& m, std::size_t rows, std::size_t cols,
                                    std::uint32_t p, std::size_t col_limit) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < col_limit && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && m[pivot * cols + c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != r) {
      std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(pivot * cols),
                       m.begin() + static_cast<std::ptrdiff_t>((pivot + 1) * cols),
                       m.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    std::uint8_t* row = m.data() + r * cols;
    const std::uint32_t scale = inv_mod(row[c], p);
    for (std::size_t j = c; j < cols; ++j) row[j] = static_cast<std::uint8_t>(row[j] * scale % p);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      std::uint8_t* other = m.data() + i * cols;
      const std::uint32_t f = other[c];
      if (f == 0) continue;
      const std::uint32_t neg = p - f;
      for (std::size_t j = c; j < cols; ++j) {
        if (row[j]) other[j] = static_cast<std::uint8_t>((other[j] + neg * row[j]) % p);
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

TruncatedPoly coefficient_poly(const RingPtr& ring, std::span<const MonoKey> monos, std::span<const std::uint8_t> v) {
  std::vector<MonoKey> keys;
  std::vector<std::uint8_t> coeffs;
  for (std::size_t i = 0; i < monos.size(); ++i) {
    if (v[i] == 0) continue;
    keys.push_back(monos[i]);
    coeffs.push_back(v[i]);
  }
  return TruncatedPoly::from_canonical(ring, std::move(keys), std::move(coeffs));
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

}  // namespace

LinearSystemShape linear_system_shape(const RingParams& ring, std::uint32_t n, std::uint32_t degree_cap) {
  const std::uint32_t cap = std::min(degree_cap, ring.N - 1);
  const mp::cpp_int engaged = binomial(cap + ring.k, ring.k);
  const mp::cpp_int all = binomial(ring.N - 1 + ring.k, ring.k);
  const mp::cpp_int blocks = mp::cpp_int(n) * n;
  return {mp::cpp_int(blocks * all).str(), mp::cpp_int(blocks * engaged).str(), engaged.str()};
}

LinearSystemModP build_linear_system(const PublicKey& pub, std::uint32_t degree_cap, std::size_t max_cells) {
  const RingPtr& ring = pub.A.ring();
  const std::uint32_t n = pub.A.n();
  if (pub.P.n() != n) throw DimensionMismatch("A and P differ in size");
  const std::uint32_t N = ring->N();
  const std::uint32_t cap = std::min(degree_cap, N - 1);
  std::uint32_t max_entry_degree = 0;
  for (const auto* m : {&pub.A, &pub.P})
    for (const auto& e : m->entries()) max_entry_degree = std::max(max_entry_degree, e.degree());
  const std::uint32_t row_degree = std::min(N - 1, cap + max_entry_degree);

  const mp::cpp_int blocks = mp::cpp_int(n) * n;
  const mp::cpp_int rows_big = blocks * binomial(row_degree + ring->k(), ring->k());
  const mp::cpp_int cols_big = blocks * binomial(cap + ring->k(), ring->k());
  if (rows_big * cols_big > max_cells) {
    throw SizeError("linear system has " + rows_big.str() + " equations in " + cols_big.str() +
                        " unknowns, over the budget of " + std::to_string(max_cells) + " cells",
                    rows_big.str(), cols_big.str());
  }

  LinearSystemModP sys;
  sys.ring = ring;
  sys.n = n;
  sys.degree_cap = cap;
  sys.monomials = monomials_up_to(*ring, cap);
  sys.row_monomials = monomials_up_to(*ring, row_degree);
  const std::size_t per_row_block = sys.row_monomials.size();
  sys.rows = static_cast<std::size_t>(n) * n * per_row_block;
  sys.cols = static_cast<std::size_t>(n) * n * sys.monomials.size();
  sys.entries.assign(sys.rows * sys.cols, 0);

  const std::uint32_t p = ring->modulus();
  const auto row_of = [&](std::uint32_t i, std::uint32_t j, MonoKey nu) {
    const auto it = std::lower_bound(sys.row_monomials.begin(), sys.row_monomials.end(), nu);
    return (static_cast<std::size_t>(i) * n + j) * per_row_block +
           static_cast<std::size_t>(it - sys.row_monomials.begin());
  };
  const auto add = [&](std::size_t r, std::size_t c, std::uint32_t v) {
    std::uint8_t& cell = sys.entries[r * sys.cols + c];
    cell = static_cast<std::uint8_t>((cell + v) % p);
  };
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      for (std::uint32_t s = 0; s < n; ++s) {
        // (XP)[i][j] gains X[i][s] * P[s][j].
        const TruncatedPoly& pe = pub.P.at(s, j);
        for (std::size_t mu = 0; mu < sys.monomials.size(); ++mu) {
          for (std::size_t t = 0; t < pe.size(); ++t) {
            const MonoKey nu = sys.monomials[mu] + pe.keys()[t];
            if (ring->degree(nu) >= N) continue;
            add(row_of(i, j, nu), sys.column(i, s, mu), pe.coeffs()[t]);
          }
        }
        // (AX)[i][j] gains A[i][s] * X[s][j], with a minus sign.
        const TruncatedPoly& ae = pub.A.at(i, s);
        for (std::size_t mu = 0; mu < sys.monomials.size(); ++mu) {
          for (std::size_t t = 0; t < ae.size(); ++t) {
            const MonoKey nu = sys.monomials[mu] + ae.keys()[t];
            if (ring->degree(nu) >= N) continue;
            add(row_of(i, j, nu), sys.column(s, j, mu), p - ae.coeffs()[t]);
          }
        }
      }
    }
  }
  return sys;
}

std::optional<std::vector<std::uint8_t>> flatten_unknowns(const LinearSystemModP& sys, const MatrixR& x) {
  std::vector<std::uint8_t> v(sys.cols, 0);
  for (std::uint32_t i = 0; i < sys.n; ++i) {
    for (std::uint32_t j = 0; j < sys.n; ++j) {
      const TruncatedPoly& e = x.at(i, j);
      for (std::size_t t = 0; t < e.size(); ++t) {
        const auto it = std::lower_bound(sys.monomials.begin(), sys.monomials.end(), e.keys()[t]);
        if (it == sys.monomials.end() || *it != e.keys()[t]) return std::nullopt;
        v[sys.column(i, j, static_cast<std::size_t>(it - sys.monomials.begin()))] = e.coeffs()[t];
      }
    }
  }
  return v;
}

MatrixR assemble_unknowns(const LinearSystemModP& sys, std::span<const std::uint8_t> v) {
  if (v.size() != sys.cols) throw DimensionMismatch("vector length differs from the unknown count");
  MatrixR out(sys.ring, sys.n);
  const std::size_t per = sys.monomials.size();
  for (std::uint32_t i = 0; i < sys.n; ++i)
    for (std::uint32_t j = 0; j < sys.n; ++j)
      out.at(i, j) = coefficient_poly(sys.ring, sys.monomials, v.subspan(sys.column(i, j, 0), per));
  return out;
}

std::vector<std::uint8_t> apply_system(const LinearSystemModP& sys, std::span<const std::uint8_t> v) {
  if (v.size() != sys.cols) throw DimensionMismatch("vector length differs from the unknown count");
  const std::uint32_t p = sys.ring->modulus();
  std::vector<std::uint8_t> out(sys.rows, 0);
  for (std::size_t r = 0; r < sys.rows; ++r) {
    std::uint64_t acc = 0;
    for (std::size_t c = 0; c < sys.cols; ++c) acc += std::uint32_t{sys.at(r, c)} * v[c];
    out[r] = static_cast<std::uint8_t>(acc % p);
  }
  return out;
}

NullspaceBasis nullspace_mod_p(std::vector<std::uint8_t> entries, std::size_t rows, std::size_t cols,
                               std::uint32_t modulus) {
  if (entries.size() != rows * cols) throw DimensionMismatch("entry count differs from rows * cols");
  const std::vector<std::size_t> pivots = row_reduce(entries, rows, cols, modulus, cols);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  NullspaceBasis basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<std::uint8_t> v(cols, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) {
      const std::uint8_t coeff = entries[r * cols + f];
      if (coeff) v[pivots[r]] = static_cast<std::uint8_t>(modulus - coeff);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

NullspaceBasis solve_nullspace(const LinearSystemModP& sys) {
  return nullspace_mod_p(sys.entries, sys.rows, sys.cols, sys.ring->modulus());
}

std::optional<std::vector<std::uint8_t>> express_in_basis(const NullspaceBasis& basis,
                                                          std::span<const std::uint8_t> target,
                                                          std::uint32_t modulus) {
  const std::size_t rows = target.size();
  const std::size_t unknowns = basis.size();
  const std::size_t cols = unknowns + 1;
  std::vector<std::uint8_t> m(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t b = 0; b < unknowns; ++b) {
      if (basis[b].size() != rows) throw DimensionMismatch("basis vector length differs from target");
      m[r * cols + b] = static_cast<std::uint8_t>(basis[b][r] % modulus);
    }
    m[r * cols + unknowns] = static_cast<std::uint8_t>(target[r] % modulus);
  }
  const std::vector<std::size_t> pivots = row_reduce(m, rows, cols, modulus, unknowns);
  for (std::size_t r = pivots.size(); r < rows; ++r) {
    if (m[r * cols + unknowns] != 0) return std::nullopt;
  }
  std::vector<std::uint8_t> coeffs(unknowns, 0);
  for (std::size_t r = 0; r < pivots.size(); ++r) coeffs[pivots[r]] = m[r * cols + unknowns];
  return coeffs;
}

MatrixR local_inverse(const MatrixR& m) {
  const RingPtr& ring = m.ring();
  const std::uint32_t n = m.n();
  const std::uint32_t p = ring->modulus();
  // Gauss-Jordan on [C | I] for the constant part C.
  const std::size_t cols = 2 * std::size_t{n};
  std::vector<std::uint8_t> aug(n * cols, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) aug[i * cols + j] = m.at(i, j).constant_term();
    aug[i * cols + n + i] = 1;
  }
  const auto pivots = row_reduce(aug, n, cols, p, n);
  if (pivots.size() != n) throw InvalidParameter("matrix is not invertible");
  MatrixR c_inv(ring, n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) c_inv.at(i, j) = TruncatedPoly::constant(ring, aug[i * cols + n + j]);
  // C^-1 M = I - U with U nilpotent, so M^-1 = (I + U + U^2 + ...) C^-1.
  const MatrixR identity = MatrixR::identity(ring, n);
  const MatrixR u = mat_sub(identity, mat_mul(c_inv, m));
  MatrixR sum = identity;
  MatrixR power = identity;
  for (std::uint32_t step = 1; step < ring->N(); ++step) {
    power = mat_mul(power, u);
    if (power.is_zero()) break;
    sum = mat_add(sum, power);
  }
  return mat_mul(sum, c_inv);
}

std::optional<Conjugator> find_invertible_solution(const LinearSystemModP& sys, const NullspaceBasis& basis,
                                                   const PublicKey& pub, std::size_t budget, Rng& rng) {
  if (basis.empty()) return std::nullopt;
  const std::uint32_t p = sys.ring->modulus();
  std::vector<std::uint32_t> acc(sys.cols);
  std::vector<std::uint8_t> v(sys.cols);
  for (std::size_t attempt = 1; attempt <= budget; ++attempt) {
    std::fill(acc.begin(), acc.end(), 0);
    for (const auto& b : basis) {
      const auto c = static_cast<std::uint32_t>(rng.below(p));
      if (c == 0) continue;
      for (std::size_t i = 0; i < sys.cols; ++i) acc[i] += c * b[i];
    }
    for (std::size_t i = 0; i < sys.cols; ++i) v[i] = static_cast<std::uint8_t>(acc[i] % p);
    MatrixR x = assemble_unknowns(sys, v);
    if (!is_invertible(x)) continue;
    MatrixR x_inv = local_inverse(x);
    if (mat_mul(mat_mul(x_inv, pub.A), x) == pub.P) return Conjugator{std::move(x), std::move(x_inv), attempt};
  }
  return std::nullopt;
}

Responder dense_responder(const Conjugator& c) {
  return [x = c.X, x_inv = c.X_inv](const Endomorphism& phi, const MatrixR& phi_b_prime) {
    EndoEvaluator evaluator(phi);
    MatrixR fx(x.ring(), x.n());
    MatrixR fx_inv(x.ring(), x.n());
    for (std::uint32_t i = 0; i < x.n(); ++i) {
      for (std::uint32_t j = 0; j < x.n(); ++j) {
        fx.at(i, j) = evaluator.apply(x.at(i, j));
        fx_inv.at(i, j) = evaluator.apply(x_inv.at(i, j));
      }
    }
    return mat_mul(mat_mul(fx_inv, phi_b_prime), fx);
  };
}

DetForgeryStats forgery_experiment_det(const SchemeParams& sp, std::size_t trials, std::uint64_t seed) {
  if (sp.n > 3) throw UnsupportedDimension("determinant forgery experiment needs n <= 3");
  const RingPtr ring = make_ring(sp);
  DetForgeryStats stats;
  const auto det_test = [](const PublicKey& pub, const MatrixR& b, const MatrixR& resp, const Word& w) {
    return determinant(evaluate_word(w, pub.A, b)) == determinant(evaluate_word(w, pub.P, resp));
  };
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(seed, t);
    const KeyPair keys = keygen(sp, ring, rng);
    const BetaTranscript honest = beta_session(sp, keys, rng);
    ++stats.trials;
    if (honest.verdict.accept) ++stats.honest_trace_pass;
    if (det_test(keys.pub, honest.B, honest.response, honest.word)) ++stats.honest_det_pass;

    const TruncatedPoly target = determinant(honest.response);
    MatrixR forged = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
    TruncatedPoly det_c = determinant(forged);
    while (!is_unit(det_c)) {
      ++stats.redraws;
      forged = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
      det_c = determinant(forged);
    }
    const TruncatedPoly scale = poly_mul(target, poly_inverse(det_c));
    for (std::uint32_t j = 0; j < sp.n; ++j) forged.at(0, j) = poly_mul(scale, forged.at(0, j));
    if (det_test(keys.pub, honest.B, forged, honest.word)) ++stats.forged_det_pass;
    if (verify_beta(keys.pub, honest.B, forged, honest.word).accept) ++stats.forged_trace_pass;
  }
  return stats;
}

const char* to_string(ForgeryStrategy s) {
  switch (s) {
    case ForgeryStrategy::RandomMatrix: return "random-matrix";
    case ForgeryStrategy::EchoChallenge: return "echo-challenge";
    case ForgeryStrategy::TraceMatched: return "trace-matched";
  }
  return "unknown";
}

std::optional<ForgeryStrategy> parse_strategy(const std::string& name) {
  for (auto s : {ForgeryStrategy::RandomMatrix, ForgeryStrategy::EchoChallenge, ForgeryStrategy::TraceMatched}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

namespace {

MatrixR random_masked_matrix(const SchemeParams& sp, const RingPtr& ring, const Endomorphism& phi, Rng& rng) {
  const std::vector<std::uint32_t> kept = phi.kept_variables();
  MatrixR out(ring, sp.n);
  for (std::uint32_t i = 0; i < sp.n; ++i)
    for (std::uint32_t j = 0; j < sp.n; ++j) out.at(i, j) = random_sparse_poly(ring, sp.sparsity(), true, rng, 0, kept);
  return out;
}

}  // namespace

TraceForgeryReport forgery_experiment_trace(const SchemeParams& sp, const KeyPair& keys, std::size_t trials,
                                            std::span<const ForgeryStrategy> strategies, std::uint64_t seed,
                                            const TraceForgeryOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const RingPtr& ring = keys.pub.A.ring();
  TraceForgeryReport report;
  report.seed = seed;
  for (auto s : strategies) report.strategies.push_back({s, 0, 0});
  for (std::size_t t = 0; t < trials; ++t) {
    if (options.deadline_seconds > 0 && seconds_since(start) > options.deadline_seconds) break;
    Rng rng = Rng::derive(seed, t);
    const auto session_start = std::chrono::steady_clock::now();
    ProverSession prover(sp, keys.pub, factored_responder(keys.priv), Rng(rng.next()));
    VerifierSession verifier(sp, keys.pub, Rng(rng.next()));
    const CommitMsg commit = verifier.on_hello(prover.start());
    const ConstantsMsg constants = verifier.on_exponents(prover.on_commit(commit));
    const VerdictMsg verdict = verifier.on_response(prover.on_constants(constants));
    prover.on_verdict(verdict);
    report.honest_seconds += seconds_since(session_start);
    ++report.trials;
    if (verdict.accept) ++report.honest_accepted;

    const SessionTranscript& tr = verifier.transcript();
    MaskedVerifier& masked = verifier.masked();
    if (options.check_m1 && !evaluate_word(tr.word, masked.phi_a(), tr.phi_b_prime).is_zero()) ++report.m1_nonzero;
    for (auto& st : report.strategies) {
      MatrixR forged(ring, sp.n);
      switch (st.strategy) {
        case ForgeryStrategy::RandomMatrix:
          forged = random_masked_matrix(sp, ring, tr.phi, rng);
          break;
        case ForgeryStrategy::EchoChallenge:
          forged = tr.phi_b_prime;
          break;
        case ForgeryStrategy::TraceMatched: {
          forged = random_masked_matrix(sp, ring, tr.phi, rng);
          const TruncatedPoly delta = poly_sub(trace(tr.phi_b_prime), trace(forged));
          forged.at(0, 0) = poly_add(forged.at(0, 0), delta);
          break;
        }
      }
      ++st.trials;
      if (masked.verify(tr.phi_b_prime, forged, tr.word).accept) ++st.accepted;
    }
    if (options.progress) options.progress(t, report);
  }
  report.total_seconds = seconds_since(start);
  return report;
}

KeySizeReport key_size_report(const SchemeParams& sp, Rng& rng, bool measure_public) {
  const RingPtr ring = make_ring(sp);
  KeySizeReport r;
  const double log_n = std::log2(static_cast<double>(sp.ring.N));
  const double sqrt_d = std::sqrt(static_cast<double>(sp.d));
  r.public_formula_bits = sqrt_d * sp.ring.k * log_n * sp.n * sp.n;
  const MatrixR b = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
  r.matrix_bytes = encode(b).size();
  r.m = static_cast<std::uint32_t>(rng.uniform(sp.m_min, sp.m_max));
  r.private_formula_bits = (static_cast<double>(sp.d) * sp.ring.k * log_n + std::log2(static_cast<double>(sp.n))) * r.m;
  // Elementary factors need two distinct indices.
  if (sp.n < 2) return r;
  const FactoredInvertible x = gen_private_key(ring, sp.n, r.m, sp.sparsity(), rng);
  r.private_bytes = encode(x).size();
  if (measure_public) {
    const MatrixR p = conjugate(x, b);
    r.public_bytes = encode(b).size() + encode(p).size();
  }
  return r;
}

std::vector<std::pair<MatrixR, MatrixR>> collect_session_pairs(const SchemeParams& sp, const KeyPair& keys,
                                                               std::size_t sessions, std::uint64_t seed) {
  std::vector<std::pair<MatrixR, MatrixR>> pairs;
  for (std::size_t s = 0; s < sessions; ++s) {
    SessionTranscript tr = run_session(sp, keys, Rng::derive(seed, s).next());
    pairs.emplace_back(std::move(tr.phi_b_prime), std::move(tr.response));
  }
  return pairs;
}

}  // namespace conjauth
