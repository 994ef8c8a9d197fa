#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conjauth/cryptanalysis.hpp"
#include "conjauth/wire.hpp"

namespace py = pybind11;
using namespace conjauth;

namespace {

py::bytes to_py(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_py(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

struct RingHandle {
  RingPtr ptr;
};

py::dict report_dict(const TraceForgeryReport& r) {
  py::dict strategies;
  for (const auto& s : r.strategies) strategies[to_string(s.strategy)] = py::make_tuple(s.trials, s.accepted);
  py::dict d;
  d["seed"] = r.seed;
  d["trials"] = r.trials;
  d["honest_accepted"] = r.honest_accepted;
  d["m1_nonzero"] = r.m1_nonzero;
  d["honest_seconds"] = r.honest_seconds;
  d["strategies"] = strategies;
  return d;
}

}  // namespace

PYBIND11_MODULE(_conjauth, m) {
  m.doc() = "Matrix-conjugation authentication over truncated polynomial rings.";

  py::register_exception<Error>(m, "ConjauthError");
  py::register_exception<DecodeError>(m, "DecodeError");

  py::class_<RingParams>(m, "RingParams")
      .def_readonly("modulus", &RingParams::modulus)
      .def_readonly("k", &RingParams::k)
      .def_readonly("N", &RingParams::N);

  py::class_<SchemeParams>(m, "SchemeParams")
      .def_static("paper_defaults", &SchemeParams::paper_defaults)
      .def_static("desk", &SchemeParams::desk)
      .def_static("derive", &SchemeParams::derive, py::arg("modulus"), py::arg("k"), py::arg("N"), py::arg("n"),
                  py::arg("d"), py::arg("word_len"), py::arg("exp_bound") = 5)
      .def_readonly("ring", &SchemeParams::ring)
      .def_readwrite("n", &SchemeParams::n)
      .def_readwrite("d", &SchemeParams::d)
      .def_readwrite("m_min", &SchemeParams::m_min)
      .def_readwrite("m_max", &SchemeParams::m_max)
      .def_readwrite("k0_min", &SchemeParams::k0_min)
      .def_readwrite("k0_max", &SchemeParams::k0_max)
      .def_readwrite("exp_bound", &SchemeParams::exp_bound)
      .def_readwrite("word_len", &SchemeParams::word_len)
      .def_readwrite("t", &SchemeParams::t)
      .def("sparsity", &SchemeParams::sparsity)
      .def("validate", &SchemeParams::validate);

  py::class_<RingHandle>(m, "Ring")
      .def(py::init([](std::uint32_t modulus, std::uint32_t k, std::uint32_t N) {
             return RingHandle{Ring::create(RingParams::make(modulus, k, N))};
           }),
           py::arg("modulus"), py::arg("k"), py::arg("N"))
      .def_property_readonly("params", [](const RingHandle& r) { return r.ptr->params(); });
  m.def("make_ring", [](const SchemeParams& sp) { return RingHandle{make_ring(sp)}; });

  py::class_<TruncatedPoly>(m, "Poly")
      .def(py::init([](const RingHandle& r) { return TruncatedPoly(r.ptr); }))
      .def_static("constant", [](const RingHandle& r, std::uint32_t c) { return TruncatedPoly::constant(r.ptr, c); })
      .def_static(
          "variable",
          [](const RingHandle& r, std::uint32_t var, std::uint32_t coeff) {
            return TruncatedPoly::variable(r.ptr, var, coeff);
          },
          py::arg("ring"), py::arg("var"), py::arg("coeff") = 1)
      .def("__len__", &TruncatedPoly::size)
      .def("is_zero", &TruncatedPoly::is_zero)
      .def("__str__", &TruncatedPoly::to_string)
      .def("__repr__", [](const TruncatedPoly& a) { return "Poly(" + a.to_string() + ")"; })
      .def(py::self == py::self)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(-py::self)
      .def("__pow__", &poly_pow);
  m.def("is_unit", &is_unit);
  m.def("poly_inverse", &poly_inverse);

  py::class_<MatrixR>(m, "Matrix")
      .def_static("identity", [](const RingHandle& r, std::uint32_t n) { return MatrixR::identity(r.ptr, n); })
      .def_property_readonly("n", &MatrixR::n)
      .def("__getitem__", [](const MatrixR& a, std::pair<std::uint32_t, std::uint32_t> ij) {
        if (ij.first >= a.n() || ij.second >= a.n()) throw py::index_error();
        return a.at(ij.first, ij.second);
      })
      .def("__str__", &MatrixR::to_string)
      .def("__eq__", [](const MatrixR& a, const MatrixR& b) { return a == b; })
      .def("__add__", &mat_add)
      .def("__sub__", &mat_sub)
      .def("__matmul__", &mat_mul)
      .def("total_terms", &MatrixR::total_terms);
  m.def("trace", &trace);
  m.def("determinant", &determinant);
  m.def("is_invertible", &is_invertible);
  m.def("random_matrix", [](const RingHandle& ring, std::uint32_t n, std::uint32_t sparsity, std::uint64_t seed) {
    Rng rng(seed);
    return random_matrix(ring.ptr, n, sparsity, true, rng);
  });

  py::class_<Word>(m, "Word")
      .def_static("parse", &Word::parse)
      .def("__str__", &Word::to_string)
      .def("is_valid", &Word::is_valid)
      .def("__eq__", [](const Word& a, const Word& b) { return a.to_string() == b.to_string(); });
  m.def("evaluate_word", &evaluate_word);

  py::class_<PublicKey>(m, "PublicKey").def_readonly("A", &PublicKey::A).def_readonly("P", &PublicKey::P);
  py::class_<KeyPair>(m, "KeyPair")
      .def_readonly("public", &KeyPair::pub)
      .def_property_readonly("m", [](const KeyPair& k) { return k.priv.X.m(); })
      .def("conjugate", [](const KeyPair& k, const MatrixR& a) { return conjugate(k.priv.X, a); });

  m.def("keygen", [](const SchemeParams& sp, std::uint64_t seed) {
    Rng rng(seed);
    return keygen(sp, make_ring(sp), rng);
  });

  py::class_<Verdict>(m, "Verdict").def_readonly("accept", &Verdict::accept).def_readonly("diagnostic", &Verdict::diagnostic);
  py::class_<SessionTranscript>(m, "SessionTranscript")
      .def_readonly("B", &SessionTranscript::B)
      .def_readonly("phi_b_prime", &SessionTranscript::phi_b_prime)
      .def_readonly("response", &SessionTranscript::response)
      .def_readonly("word", &SessionTranscript::word)
      .def_readonly("verdict", &SessionTranscript::verdict)
      .def_property_readonly("exponents",
                             [](const SessionTranscript& t) { return py::make_tuple(t.exponents.p, t.exponents.q); })
      .def_property_readonly("constants", [](const SessionTranscript& t) {
        return py::make_tuple(t.constants.c1, t.constants.c2, t.constants.c3);
      });
  m.def("run_session", &run_session, py::arg("params"), py::arg("keys"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  m.def("validate_params", [](const SchemeParams& sp) {
    py::list out;
    for (const auto& c : validate_params(sp).checks) out.append(py::make_tuple(c.name, c.lhs, c.rhs, c.pass));
    return out;
  });
  m.def("monomial_count", [](std::uint32_t N, std::uint32_t k) { return py::int_(py::str(monomial_count(N, k))); });

  m.def("encode_public_key", [](const SchemeParams& sp, const KeyPair& k) { return to_py(encode_public_key(sp, k.pub)); });
  m.def("encode_private_key", [](const SchemeParams& sp, const KeyPair& k) { return to_py(encode_private_key(sp, k)); });
  m.def("decode_private_key", [](const py::bytes& b) {
    LoadedKeyPair l = decode_private_key(from_py(b));
    return py::make_tuple(l.params, l.keys);
  });
  m.def("verdict_frame", [](bool accept) { return to_py(encode_message(VerdictMsg{accept})); });

  m.def("linear_system_shape", [](const SchemeParams& sp, std::uint32_t degree_cap) {
    const LinearSystemShape s = linear_system_shape(sp.ring, sp.n, degree_cap);
    return py::make_tuple(py::int_(py::str(s.rows)), py::int_(py::str(s.cols)));
  });
  m.def(
      "linear_attack",
      [](const KeyPair& keys, std::uint32_t degree_cap, std::size_t budget, std::uint64_t seed) -> py::object {
        const LinearSystemModP sys = build_linear_system(keys.pub, degree_cap);
        const NullspaceBasis basis = solve_nullspace(sys);
        Rng rng(seed);
        const auto c = find_invertible_solution(sys, basis, keys.pub, budget, rng);
        py::dict d;
        d["rows"] = sys.rows;
        d["cols"] = sys.cols;
        d["nullity"] = basis.size();
        d["conjugator"] = c ? py::cast(c->X) : py::none();
        return std::move(d);
      },
      py::arg("keys"), py::arg("degree_cap"), py::arg("budget") = 10000, py::arg("seed") = 0);

  m.def(
      "forgery_experiment",
      [](const SchemeParams& sp, const KeyPair& keys, std::size_t trials, std::uint64_t seed) {
        const std::vector<ForgeryStrategy> all{ForgeryStrategy::RandomMatrix, ForgeryStrategy::EchoChallenge,
                                               ForgeryStrategy::TraceMatched};
        TraceForgeryOptions opts;
        opts.check_m1 = true;
        TraceForgeryReport r;
        {
          py::gil_scoped_release release;
          r = forgery_experiment_trace(sp, keys, trials, all, seed, opts);
        }
        return report_dict(r);
      },
      py::arg("params"), py::arg("keys"), py::arg("trials"), py::arg("seed"));
  m.def("det_forgery_experiment", [](const SchemeParams& sp, std::size_t trials, std::uint64_t seed) {
    const DetForgeryStats s = forgery_experiment_det(sp, trials, seed);
    py::dict d;
    d["trials"] = s.trials;
    d["honest_det_pass"] = s.honest_det_pass;
    d["honest_trace_pass"] = s.honest_trace_pass;
    d["forged_det_pass"] = s.forged_det_pass;
    d["forged_trace_pass"] = s.forged_trace_pass;
    return d;
  });
}
