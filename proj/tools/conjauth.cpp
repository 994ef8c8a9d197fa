#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "conjauth/cryptanalysis.hpp"
#include "conjauth/wire.hpp"

using namespace conjauth;

namespace {

constexpr int kUsage = 64;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CONJAUTH_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("CONJAUTH_SEED is not a 64-bit integer: " + std::string(env));
  }
  throw UsageError("no seed: pass --seed or set CONJAUTH_SEED");
}

struct ParamOptions {
  std::string preset;
  std::string file;
};

void add_param_options(CLI::App* cmd, ParamOptions& opts, const std::string& default_preset) {
  opts.preset = default_preset;
  cmd->add_option("--preset", opts.preset, "parameter preset")
      ->check(CLI::IsMember({"paper", "desk"}))
      ->capture_default_str();
  cmd->add_option("--params-file", opts.file, "JSON overrides: modulus, k, N, n, d, word_len, exp_bound, t")
      ->check(CLI::ExistingFile);
}

// Preset first, then any fields from the JSON file; m and k0 ranges follow
// from n and k unless given explicitly.
SchemeParams load_params(const ParamOptions& opts) {
  SchemeParams sp = opts.preset == "desk" ? SchemeParams::desk() : SchemeParams::paper_defaults();
  if (opts.file.empty()) return sp;
  nlohmann::json j;
  try {
    std::ifstream in(opts.file);
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cannot parse " + opts.file + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError(opts.file + ": expected a JSON object");
  const auto get = [&](const char* key, std::uint32_t fallback) {
    return j.contains(key) ? j.at(key).get<std::uint32_t>() : fallback;
  };
  try {
    const double t = j.value("t", sp.t);
    SchemeParams out = SchemeParams::derive(get("modulus", sp.ring.modulus), get("k", sp.ring.k), get("N", sp.ring.N),
                                            get("n", sp.n), get("d", sp.d), get("word_len", sp.word_len),
                                            get("exp_bound", sp.exp_bound));
    out.m_min = get("m_min", out.m_min);
    out.m_max = get("m_max", out.m_max);
    out.k0_min = get("k0_min", out.k0_min);
    out.k0_max = get("k0_max", out.k0_max);
    out.t = t;
    out.validate();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(opts.file + ": " + e.what());
  } catch (const InvalidParameter& e) {
    throw UsageError(opts.file + ": " + e.what());
  }
}

Bytes read_or_usage(const std::string& path) {
  try {
    return read_file(path);
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

void print_params(const SchemeParams& sp) {
  std::cout << "params: p=" << sp.ring.modulus << " k=" << sp.ring.k << " N=" << sp.ring.N << " n=" << sp.n
            << " d=" << sp.d << " m=[" << sp.m_min << "," << sp.m_max << "] k0=[" << sp.k0_min << "," << sp.k0_max
            << "] exp_bound=" << sp.exp_bound << " word_len=" << sp.word_len << "\n";
}

int cmd_keygen(const ParamOptions& po, std::optional<std::uint64_t> seed_flag, const std::string& out_pub,
               const std::string& out_priv) {
  const SchemeParams sp = load_params(po);
  const std::uint64_t seed = resolve_seed(seed_flag);
  const RingPtr ring = make_ring(sp);
  Rng rng(seed);
  const auto t = Clock::now();
  const KeyPair keys = keygen(sp, ring, rng);
  write_file(out_pub, encode_public_key(sp, keys.pub));
  write_file(out_priv, encode_private_key(sp, keys));
  print_params(sp);
  std::cout << "m=" << keys.priv.X.m() << " keygen " << since(t) << " s\n"
            << "wrote " << out_pub << " and " << out_priv << "\n";
  return 0;
}

int cmd_session(const std::string& pub_file, const std::string& priv_file, std::optional<std::uint64_t> seed_flag,
                const std::string& transcript_file, bool verbose) {
  const std::uint64_t seed = resolve_seed(seed_flag);
  const LoadedPublicKey pub = decode_public_key(read_or_usage(pub_file));
  const LoadedKeyPair priv = decode_private_key(read_or_usage(priv_file));
  if (encode_params(pub.params) != encode_params(priv.params)) throw UsageError("key files use different parameters");

  auto [a, b] = make_pipe();
  auto log = std::make_shared<Bytes>();
  auto mutex = std::make_shared<std::mutex>();
  RecordingStream prover_end(*a, log, mutex);
  RecordingStream verifier_end(*b, log, mutex);
  ProverOutcome prover;
  std::thread t([&] {
    prover = serve_session(prover_end, priv.params, priv.keys.pub, factored_responder(priv.keys.priv),
                           Rng::derive(seed, 1));
  });
  // The verifier only sees the public key file.
  const VerifierOutcome v = verify_session(verifier_end, pub.params, pub.pub, Rng::derive(seed, 2));
  t.join();
  if (!transcript_file.empty()) write_file(transcript_file, *log);

  if (v.error != WireError::None) {
    std::cerr << "conjauth: error code=" << to_string(v.error) << " " << v.detail << "\n";
    return v.exit_code();
  }
  const SessionTranscript& tr = *v.transcript;
  print_params(pub.params);
  std::cout << "phi: k0=" << tr.phi.k0() << " omitted=";
  for (std::size_t i = 0; i < tr.phi.omitted().size(); ++i) std::cout << (i ? "," : "") << "x" << tr.phi.omitted()[i] + 1;
  std::cout << "\nexponents: p=" << tr.exponents.p << " q=" << tr.exponents.q << "\n"
            << "constants: c1=" << tr.constants.c1 << " c2=" << tr.constants.c2 << " c3=" << tr.constants.c3 << "\n"
            << "word: " << tr.word.to_string() << "\n"
            << "frames: " << split_frames(*log).size() << ", " << log->size() << " bytes\n";
  if (verbose) {
    std::cout << "B:\n" << tr.B.to_string() << "\nphi(B'):\n" << tr.phi_b_prime.to_string() << "\nresponse:\n"
              << tr.response.to_string() << "\n";
  }
  if (!tr.verdict.diagnostic.empty()) std::cout << "diagnostic: " << tr.verdict.diagnostic << "\n";
  std::cout << (tr.verdict.accept ? "accept" : "reject") << std::endl;
  return v.exit_code();
}

int cmd_params_check(const ParamOptions& po, std::optional<double> t) {
  SchemeParams sp = load_params(po);
  if (t) sp.t = *t;
  print_params(sp);
  std::cout << validate_params(sp).to_string();
  return 0;
}

struct LinearOptions {
  std::string pub;
  ParamOptions params;
  std::uint32_t degree_cap = 1;
  std::size_t budget = 10000;
  std::size_t max_cells = kDefaultSystemBudget;
  bool shape_only = false;
  bool show = false;
};

int cmd_attack_linear(const LinearOptions& o, std::optional<std::uint64_t> seed_flag) {
  if (o.shape_only) {
    const SchemeParams sp = load_params(o.params);
    const LinearSystemShape s = linear_system_shape(sp.ring, sp.n, o.degree_cap);
    print_params(sp);
    std::cout << "equations " << s.rows << "\nunknowns " << s.cols << "\nmonomials per entry " << s.monomials << "\n";
    return 0;
  }
  if (o.pub.empty()) throw UsageError("attack linear needs --pub or --shape-only");
  const std::uint64_t seed = resolve_seed(seed_flag);
  const LoadedPublicKey key = decode_public_key(read_or_usage(o.pub));
  print_params(key.params);
  const auto t = Clock::now();
  std::optional<LinearSystemModP> sys;
  try {
    sys = build_linear_system(key.pub, o.degree_cap, o.max_cells);
  } catch (const SizeError& e) {
    std::cout << "system too large to build: " << e.rows() << " equations x " << e.cols() << " unknowns\n";
    return 1;
  }
  std::cout << "equations " << sys->rows << "\nunknowns " << sys->cols << "\n";
  const NullspaceBasis basis = solve_nullspace(*sys);
  std::cout << "nullspace dimension " << basis.size() << "\n";
  Rng rng(seed);
  const auto c = find_invertible_solution(*sys, basis, key.pub, o.budget, rng);
  if (!c) {
    std::cout << "no invertible solution within " << o.budget << " attempts (" << since(t) << " s)\n";
    return 1;
  }
  std::cout << "recovered conjugator after " << c->attempts << " attempts; X'^-1 A X' = P verified (" << since(t)
            << " s)\n";
  if (o.show) std::cout << c->X.to_string() << "\n";
  return 0;
}

int cmd_attack_forge(const std::string& strategy, std::size_t trials, std::optional<std::uint64_t> seed_flag,
                     const std::string& priv_file, const ParamOptions& po) {
  const std::uint64_t seed = resolve_seed(seed_flag);
  std::cout << "strategy\ttrials\taccepted\trejected\tacceptance\tseed\n";
  const auto row = [&](const std::string& name, std::size_t n, std::size_t acc) {
    std::cout << name << "\t" << n << "\t" << acc << "\t" << n - acc << "\t"
              << (n ? static_cast<double>(acc) / static_cast<double>(n) : 0.0) << "\t" << seed << "\n";
  };
  if (strategy == "det-matched") {
    const SchemeParams sp = load_params(po);
    const DetForgeryStats s = forgery_experiment_det(sp, trials, seed);
    row("det-matched/det-test", s.trials, s.forged_det_pass);
    row("det-matched/trace-test", s.trials, s.forged_trace_pass);
    row("honest/det-test", s.trials, s.honest_det_pass);
    row("honest/trace-test", s.trials, s.honest_trace_pass);
    return 0;
  }
  std::vector<ForgeryStrategy> strategies;
  if (strategy == "all") {
    strategies = {ForgeryStrategy::RandomMatrix, ForgeryStrategy::EchoChallenge, ForgeryStrategy::TraceMatched};
  } else if (const auto s = parse_strategy(strategy)) {
    strategies = {*s};
  } else {
    throw UsageError("unknown strategy " + strategy);
  }
  std::optional<LoadedKeyPair> keys;
  if (!priv_file.empty()) {
    keys = decode_private_key(read_or_usage(priv_file));
  } else {
    const SchemeParams sp = load_params(po);
    const RingPtr ring = make_ring(sp);
    Rng rng = Rng::derive(seed, 0xffff);
    keys = LoadedKeyPair{sp, ring, keygen(sp, ring, rng)};
  }
  const TraceForgeryReport r = forgery_experiment_trace(keys->params, keys->keys, trials, strategies, seed);
  row("honest", r.trials, r.honest_accepted);
  for (const auto& s : r.strategies) row(to_string(s.strategy), s.trials, s.accepted);
  return 0;
}

int cmd_bench(const std::string& what, const ParamOptions& po, std::size_t iterations,
              std::optional<std::uint64_t> seed_flag) {
  const SchemeParams sp = load_params(po);
  const std::uint64_t seed = resolve_seed(seed_flag);
  const RingPtr ring = make_ring(sp);
  Rng rng(seed);
  print_params(sp);
  if (what == "poly-mul") {
    std::vector<std::pair<TruncatedPoly, TruncatedPoly>> inputs;
    for (std::size_t i = 0; i < iterations; ++i) {
      // Products of entries, the shapes conjugation produces.
      TruncatedPoly a = random_sparse_poly(ring, sp.sparsity(), true, rng);
      TruncatedPoly b = random_sparse_poly(ring, sp.sparsity(), true, rng);
      for (int r = 0; r < 2; ++r) {
        a = poly_mul(a, random_sparse_poly(ring, sp.sparsity(), true, rng));
        b = poly_mul(b, random_sparse_poly(ring, sp.sparsity(), true, rng));
      }
      inputs.emplace_back(std::move(a), std::move(b));
    }
    std::size_t terms = 0;
    const auto t = Clock::now();
    for (const auto& [a, b] : inputs) terms += poly_mul(a, b).size();
    const double s = since(t);
    std::cout << "poly-mul: " << iterations << " products, " << terms << " result terms, " << s << " s, "
              << 1e6 * s / static_cast<double>(iterations) << " us/op\n";
  } else if (what == "conjugate") {
    const auto t0 = Clock::now();
    const FactoredInvertible x = gen_private_key(ring, sp.n, sp.m_min, sp.sparsity(), rng);
    const MatrixR a = random_matrix(ring, sp.n, sp.sparsity(), true, rng);
    std::size_t terms = 0;
    const auto t = Clock::now();
    for (std::size_t i = 0; i < iterations; ++i) terms = conjugate(x, a).total_terms();
    const double s = since(t);
    std::cout << "conjugate: m=" << x.m() << ", " << terms << " terms in P, " << s / static_cast<double>(iterations)
              << " s/op (setup " << std::chrono::duration<double>(t - t0).count() << " s)\n";
  } else {
    const auto kg = Clock::now();
    const KeyPair keys = keygen(sp, ring, rng);
    const double keygen_s = since(kg);
    std::size_t accepted = 0;
    const auto t = Clock::now();
    for (std::size_t i = 0; i < iterations; ++i) accepted += run_session(sp, keys, seed + i).verdict.accept;
    const double s = since(t);
    std::cout << "session: keygen " << keygen_s << " s, " << iterations << " sessions, " << accepted << " accepted, "
              << s / static_cast<double>(iterations) << " s/session\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conjauth: matrix-conjugation authentication over truncated polynomial rings"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  const auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", seed, "64-bit seed (fallback: CONJAUTH_SEED)"); };

  ParamOptions keygen_params;
  std::string out_pub;
  std::string out_priv;
  auto* keygen_cmd = app.add_subcommand("keygen", "generate a key pair");
  add_seed(keygen_cmd);
  keygen_cmd->add_option("--out-pub", out_pub, "public key file")->required();
  keygen_cmd->add_option("--out-priv", out_priv, "private key file")->required();
  add_param_options(keygen_cmd, keygen_params, "desk");

  std::string priv_file;
  std::string listen = "127.0.0.1:7410";
  std::size_t max_sessions = 0;
  auto* prove_cmd = app.add_subcommand("prove", "serve prover sessions over TCP");
  prove_cmd->add_option("--priv", priv_file, "private key file")->required()->check(CLI::ExistingFile);
  prove_cmd->add_option("--listen", listen, "host:port, port 0 picks a free one")->capture_default_str();
  prove_cmd->add_option("--max-sessions", max_sessions, "stop after this many sessions (0: serve forever)");
  add_seed(prove_cmd);

  std::string pub_file;
  std::string connect;
  bool constants_first = false;
  auto* verify_cmd = app.add_subcommand("verify", "run one verifier session against a prover");
  verify_cmd->add_option("--pub", pub_file, "public key file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--connect", connect, "host:port")->required();
  add_seed(verify_cmd);
  verify_cmd->add_flag("--constants-first", constants_first, "send Constants before Commit (protocol test)");

  std::string transcript_file;
  bool verbose = false;
  auto* session_cmd = app.add_subcommand("session", "run an honest session in-process and print the transcript");
  session_cmd->add_option("--pub", pub_file, "public key file")->required()->check(CLI::ExistingFile);
  session_cmd->add_option("--priv", priv_file, "private key file")->required()->check(CLI::ExistingFile);
  add_seed(session_cmd);
  session_cmd->add_option("--transcript", transcript_file, "write the frame stream to this file");
  session_cmd->add_flag("-v,--verbose", verbose, "print the matrices too");

  auto* params_cmd = app.add_subcommand("params", "parameter tools");
  params_cmd->require_subcommand(1);
  ParamOptions check_params;
  std::optional<double> t_value;
  auto* check_cmd = params_cmd->add_subcommand("check", "evaluate the advisory security inequalities");
  check_cmd->add_option("--t", t_value, "security parameter t");
  add_param_options(check_cmd, check_params, "paper");

  auto* attack_cmd = app.add_subcommand("attack", "cryptanalysis experiments");
  attack_cmd->require_subcommand(1);
  LinearOptions lin;
  auto* linear_cmd = attack_cmd->add_subcommand("linear", "XP = AX linear-system attack");
  linear_cmd->add_option("--pub", lin.pub, "public key file")->check(CLI::ExistingFile);
  linear_cmd->add_option("--degree-cap", lin.degree_cap, "largest monomial degree engaged in X")->capture_default_str();
  linear_cmd->add_option("--budget", lin.budget, "random combinations tried")->capture_default_str();
  linear_cmd->add_option("--max-cells", lin.max_cells, "largest system (rows x cols) to build")->capture_default_str();
  linear_cmd->add_flag("--shape-only", lin.shape_only, "report the system size for --preset/--params-file only");
  linear_cmd->add_flag("--show", lin.show, "print the recovered conjugator");
  add_param_options(linear_cmd, lin.params, "paper");
  add_seed(linear_cmd);

  std::string strategy = "all";
  std::size_t trials = 1000;
  std::string forge_priv;
  ParamOptions forge_params;
  auto* forge_cmd = attack_cmd->add_subcommand("forge", "forgery acceptance statistics");
  forge_cmd->add_option("--strategy", strategy, "random-matrix, echo-challenge, trace-matched, det-matched or all")
      ->capture_default_str();
  forge_cmd->add_option("--trials", trials, "trials")->capture_default_str();
  forge_cmd->add_option("--priv", forge_priv, "use this key pair instead of generating one")->check(CLI::ExistingFile);
  add_param_options(forge_cmd, forge_params, "desk");
  add_seed(forge_cmd);

  std::string bench_what;
  std::size_t iterations = 10;
  ParamOptions bench_params;
  auto* bench_cmd = app.add_subcommand("bench", "timing benchmarks");
  bench_cmd->add_option("what", bench_what, "poly-mul, conjugate or session")
      ->required()
      ->check(CLI::IsMember({"poly-mul", "conjugate", "session"}));
  bench_cmd->add_option("--iterations", iterations, "repetitions")->capture_default_str();
  add_param_options(bench_cmd, bench_params, "desk");
  add_seed(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*keygen_cmd) return cmd_keygen(keygen_params, seed, out_pub, out_priv);
    if (*prove_cmd) return run_prover(priv_file, listen, resolve_seed(seed), max_sessions);
    if (*verify_cmd) return run_verifier(pub_file, connect, resolve_seed(seed), VerifierOptions{constants_first});
    if (*session_cmd) return cmd_session(pub_file, priv_file, seed, transcript_file, verbose);
    if (*check_cmd) return cmd_params_check(check_params, t_value);
    if (*linear_cmd) return cmd_attack_linear(lin, seed);
    if (*forge_cmd) return cmd_attack_forge(strategy, trials, seed, forge_priv, forge_params);
    if (*bench_cmd) return cmd_bench(bench_what, bench_params, iterations, seed);
  } catch (const UsageError& e) {
    std::cerr << "conjauth: " << e.what() << "\n";
    return kUsage;
  } catch (const DecodeError& e) {
    std::cerr << "conjauth: error code=" << to_string(WireError::KeyFile) << " " << to_string(e.kind()) << ": "
              << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "conjauth: error code=" << to_string(WireError::Internal) << " " << e.what() << "\n";
    return 2;
  }
  return kUsage;
}
