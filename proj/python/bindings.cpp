#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ultraloc/io.hpp"

namespace py = pybind11;
using namespace ultraloc;
using io::json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string(what) + ": " + e.what());
  }
}

py::tuple split(std::span<const LogComplex> f) {
  py::array_t<double> lm(f.size()), ph(f.size());
  auto l = lm.mutable_unchecked<1>();
  auto p = ph.mutable_unchecked<1>();
  for (std::size_t k = 0; k < f.size(); ++k) {
    l(k) = f[k].logmag;
    p(k) = f[k].phase;
  }
  return py::make_tuple(lm, ph);
}

LocopPlan default_plan() {
  return LocopPlan{TFPlan{Grid1D::with_radius(10.0, 0.05), PhaseGrid{Grid1D::with_radius(6.0, 0.1), Grid1D::with_radius(6.0, 0.1)}},
                   ConvolutionPlan{PhaseGrid{Grid1D::with_radius(6.0, 0.05), Grid1D::with_radius(5.0, 0.05)}}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Log-domain phase-space transforms, localisation operators and property suites";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result([&]() { return py::exception<Error>(m, "UltralocError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error.get_stored(), py::make_tuple(to_string(e.kind()), e.what()));
    }
  });

  m.def("set_threads", &set_thread_count, py::arg("threads"));

  m.def(
      "assoc",
      [](const std::string& seq, double rho) {
        return AssociatedFunction(io::weight_sequence_from_json(parse(seq, "sequence"))) (rho);
      },
      py::arg("sequence"), py::arg("rho"));
  m.def(
      "assoc_exponent_fit",
      [](const std::string& seq, double lo, double hi, int samples) {
        const auto f = assoc_exponent_fit(AssociatedFunction(io::weight_sequence_from_json(parse(seq, "sequence"))), lo, hi, samples);
        return json{{"k", f.k}, {"A", f.A}, {"B", f.B}, {"loglog_slope", f.loglog_slope}}.dump();
      },
      py::arg("sequence"), py::arg("rho_lo") = 10.0, py::arg("rho_hi") = 1e4, py::arg("samples") = 64);
  m.def(
      "check_conditions",
      [](const std::string& seq) { return io::to_json(check_conditions(io::weight_sequence_from_json(parse(seq, "sequence")))).dump(); },
      py::arg("sequence"));

  m.def(
      "window_eval",
      [](const std::string& w, const std::vector<double>& xs) {
        const auto spec = io::window_from_json(parse(w, "window"));
        std::vector<LogComplex> v;
        for (double x : xs) v.push_back(eval(spec, x));
        return split(v);
      },
      py::arg("window"), py::arg("x"));

  m.def(
      "stft",
      [](const std::string& signal, const std::string& window, double radius, double step, const std::string& phase) {
        const auto f = io::window_from_json(parse(signal, "signal"), "signal");
        const auto w = io::window_from_json(parse(window, "window"));
        const TFPlan plan{Grid1D::with_radius(radius, step), io::phase_grid_from_json(parse(phase, "phase_grid"))};
        const auto V = stft(SampledFunction::sample(plan.signal, profile(f).eval), w, plan);
        auto lp = split(V.values.values());
        return py::make_tuple(plan.phase.x.points(), plan.phase.xi.points(), lp[0], lp[1], V.truncation_warning);
      },
      py::arg("signal"), py::arg("window"), py::arg("radius"), py::arg("step"), py::arg("phase_grid"));

  m.def(
      "locop",
      [](const std::string& symbol, const std::string& w1, const std::string& w2, const std::string& psi, const std::string& theta,
         const std::string& route) {
        const auto a = io::symbol_from_json(parse(symbol, "symbol"));
        const auto p1 = io::window_from_json(parse(w1, "w1"), "w1"), p2 = io::window_from_json(parse(w2, "w2"), "w2");
        const auto ps = profile(io::window_from_json(parse(psi, "psi"), "psi"));
        const auto th = profile(io::window_from_json(parse(theta, "theta"), "theta"));
        py::gil_scoped_release release;
        if (route == "direct") return io::to_json(locop_direct(a, p1, p2, ps, th, default_plan())).dump();
        if (route == "weyl") return io::to_json(locop_via_weyl(a, p1, p2, ps, th, default_plan())).dump();
        throw Error(ErrorKind::InvalidParameter, "route must be 'direct' or 'weyl'");
      },
      py::arg("symbol"), py::arg("w1"), py::arg("w2"), py::arg("psi"), py::arg("theta"), py::arg("route") = "weyl");

  m.def(
      "property_suite",
      [](const std::string& name, std::size_t samples, std::uint64_t seed) {
        PropertyReport r;
        if (name == "product_split") r = check_product_split(samples, seed);
        else if (name == "geometric_mean_decay") r = check_geometric_mean_decay(samples, seed);
        else if (name == "peetre_type") r = check_peetre_type(samples, seed);
        else if (name == "subadditive_bracket") r = check_subadditive_bracket(samples, seed);
        else throw Error(ErrorKind::InvalidParameter, "unknown suite '" + name + "'");
        return io::to_json(r).dump();
      },
      py::arg("name"), py::arg("samples") = 10000, py::arg("seed") = 0);
  m.def("plateau_cutoff", &plateau_cutoff, py::arg("x"));
  m.def(
      "divergence_demo", [](double l, double q, int n) { return io::to_json(divergence_demo(l, q, n)).dump(); }, py::arg("l"),
      py::arg("q") = 1.0, py::arg("n_max") = 8);
  m.def(
      "threshold_scan",
      [](double r, double q, std::vector<double> ls) { return io::to_json(threshold_scan(r, q, std::move(ls))).dump(); },
      py::arg("r"), py::arg("q") = 1.0, py::arg("ls") = std::vector<double>{});
}
