// One line per acceptance criterion; exit status 1 when any fails.
// usage: acceptance <ultraloc-cli> <config-dir> <work-dir>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>

#include "oracles/oracles.hpp"
#include "ultraloc/quantize.hpp"
#include "ultraloc/verify.hpp"

using namespace ultraloc;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::abs(b); }

SymbolTerm term(GrowthFactor f, TemperedFactor g = {}, UltradiffOp p = {}) {
  return SymbolTerm{std::move(p), std::move(f), std::move(g)};
}

TemperedFactor gauss_xi(double a = 1.0, double c = 0.0, cd amp = 1.0, UltradiffOp op = {}) {
  return TemperedFactor{GaussianFactor{a, c, amp}, std::move(op)};
}

Profile gauss_profile(double a, double c, double nu) { return profile(GaussianWindow{a, c, nu}); }

const GaussianWindow kPhi1{1.0, 0.2, 0.3};
const GaussianWindow kPhi2{1.5, -0.1, -0.2};

LocopPlan gaussian_plan() {
  return LocopPlan{TFPlan{Grid1D::with_radius(10.0, 0.05), PhaseGrid{Grid1D::with_radius(6.0, 0.1), Grid1D::with_radius(6.0, 0.1)}},
                   ConvolutionPlan{PhaseGrid{Grid1D::with_radius(6.0, 0.05), Grid1D::with_radius(5.0, 0.05)}}};
}

cd oracle_window(const WindowSpec& w, double t) {
  if (auto* g = std::get_if<GaussianWindow>(&w)) return oracle::gauss(t, g->a, g->center, g->freq);
  const auto& s = std::get<SubGaussianWindow>(w);
  return std::exp(-s.r * std::pow(std::sqrt(1.0 + t * t), s.q));
}

Outcome reconstruction() {
  struct Triple {
    WindowSpec f, phi, psi;
  };
  const Triple triples[] = {
      {GaussianWindow{1.0, 0.3, 0.2}, GaussianWindow{1.0}, GaussianWindow{2.0, 0.2}},
      {SubGaussianWindow{1.0, 2.0}, GaussianWindow{1.0}, SubGaussianWindow{2.0, 2.0}},
      {GaussianWindow{0.5, -0.4, 0.3}, SubGaussianWindow{1.0, 2.0}, GaussianWindow{1.5, 0.1, -0.2}},
  };
  const Grid1D t = Grid1D::with_radius(8.0, 0.05);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(8.0, 0.1), Grid1D::with_radius(5.0, 0.05)}};
  double worst = 0.0;
  for (const auto& tr : triples) {
    const auto f = SampledFunction::sample(t, profile(tr.f).eval);
    const auto back = stft_adjoint(stft(f, tr.phi, plan).values, tr.psi, t);
    const cd c = oracle::integrate_cx([&](double s) { return oracle_window(tr.psi, s) * std::conj(oracle_window(tr.phi, s)); }, -12, 12);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      num += std::norm(back.values[k].to_complex() - c * f[k].to_complex());
      den += std::norm(f[k].to_complex());
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst <= 1e-6, fmt("max relative L2 error %.2e over 3 triples", worst)};
}

Outcome wigner_stft() {
  const GaussianWindow f{1.0, 0.3, 0.2}, g{2.0, -0.1, -0.4};
  const Grid1D t = Grid1D::with_radius(8.0, 0.02);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.5)}};
  const auto W = wigner(f, g, plan);
  const auto fs_ = SampledFunction::sample(t, profile(f).eval);
  const auto gr = reflect(profile(g));
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const double x = plan.phase.x[i], xi = plan.phase.xi[j];
      const cd rhs = 2.0 * std::exp(cd(0, 4 * kPi * x * xi)) * stft_point(fs_, gr, 2 * x, 2 * xi).to_complex();
      worst = std::max(worst, rel(W.values.at(i, j).to_complex(), rhs));
    }
  return {worst <= 1e-6, fmt("max relative deviation %.2e on 5x5 probes", worst)};
}

Outcome duality() {
  const PhaseGrid pg{Grid1D::with_radius(6.0, 0.05), Grid1D::with_radius(6.0, 0.05)};
  const WeylSymbol b{SampledFunction::sample(pg,
                                             [](double x, double xi) {
                                               return LogComplex::polar(-kPi * (0.5 * x * x + (xi - 0.3) * (xi - 0.3)), 0.7 * xi - 0.2 * x);
                                             }),
                     "gaussian"};
  const auto psi = gauss_profile(1.0, 0.3, 0.4), theta = gauss_profile(0.7, -0.2, -0.1);
  const cd lhs = weyl_pair(b, psi, theta).value.to_complex();
  const auto W = wigner(psi, conjugate(theta), TFPlan{Grid1D::with_radius(8.0, 0.05), pg});
  std::vector<LogComplex> prod(pg.size());
  for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = b.b[p] * W.values[p];
  const double r = rel(quad(SampledFunction(pg, prod)).value.to_complex(), lhs);
  return {r <= 1e-6, fmt("relative gap %.2e", r)};
}

Outcome route_equivalence() {
  const std::vector<TensorSymbol> battery{
      TensorSymbol{{term(GaussianFactor{1.0}, gauss_xi())}},
      TensorSymbol{{term(GaussianFactor{0.5, 0.4, {1.0, 0.5}}, gauss_xi(2.0, -0.3))}},
      TensorSymbol{{term(GaussianFactor{1.0}, gauss_xi()), term(GaussianFactor{0.8, -0.5}, gauss_xi(0.7, 0.6, -0.7))}},
      TensorSymbol{{term(GaussianFactor{1.0}, gauss_xi(1.2), UltradiffOp{{1.0, 0.3}})}},
      TensorSymbol{{term(GaussianFactor{0.6}, gauss_xi(1.0, 0.0, 1.0, UltradiffOp{{1.0, 0.2, 0.05}}))}},
  };
  const auto plan = gaussian_plan();
  const auto psi = gauss_profile(1.0, 0.3, 0.4), theta = gauss_profile(0.7, -0.2, -0.1);
  double worst = 0.0;
  for (const auto& a : battery) {
    const cd d = locop_direct(a, kPhi1, kPhi2, psi, theta, plan).value.to_complex();
    const cd v = locop_via_weyl(a, kPhi1, kPhi2, psi, theta, plan).value.to_complex();
    worst = std::max(worst, rel(v, d));
  }
  return {worst <= 1e-5, fmt("max relative gap %.2e over 5 mild symbols", worst)};
}

Outcome a1_identity() {
  const auto psi = gauss_profile(1.0, 0.3, 0.4), theta = gauss_profile(0.7, -0.2, -0.1);
  const TensorSymbol one{{term(ConstantFactor{}, TemperedFactor{})}};
  const cd d = locop_direct(one, kPhi1, kPhi2, psi, theta, gaussian_plan()).value.to_complex();
  const cd ip = oracle::integrate_cx([](double t) { return oracle::gauss(t, 1.5, -0.1, -0.2) * std::conj(oracle::gauss(t, 1.0, 0.2, 0.3)); }, -8, 8);
  const cd pt = oracle::integrate_cx([](double x) { return oracle::gauss(x, 1.0, 0.3, 0.4) * oracle::gauss(x, 0.7, -0.2, -0.1); }, -8, 8);
  const double r = rel(d, ip * pt);
  return {r <= 1e-6, fmt("relative gap %.2e", r)};
}

Outcome wigner_decay() {
  const SubGaussianWindow w{1.0, 1.0};
  const TFPlan plan{Grid1D::with_radius(60.0, 0.05), PhaseGrid{Grid1D::with_radius(12.0, 0.1), Grid1D::with_radius(3.0, 0.1)}};
  const std::vector<double> cs{8.0, 4.0, 2.0, 1.0, 0.5};
  const auto ok = wigner_decay_fit(w, w, 0.9, 1.0, WeightSequence::gevrey(1.0), cs, plan);
  const auto bad = wigner_decay_fit(w, w, 1.05, 1.0, WeightSequence::gevrey(1.0), cs, plan);
  return {ok.feasible && ok.C <= 1e3 && ok.c_prime > 0.0 && !bad.feasible,
          fmt("r'=0.9: C=%.3g c'=%.3g; r'=1.05 violation %.3g", ok.C, ok.c_prime, bad.max_violation) +
              (bad.feasible ? " (feasible)" : " (infeasible)")};
}

Outcome wigner_envelope() {
  const DoubleExpWindow d{1.0, 1.0};
  const TFPlan plan{Grid1D::with_radius(8.0, 0.01), PhaseGrid{Grid1D::with_radius(3.0, 0.05), Grid1D::with_radius(6.0, 0.1)}};
  const auto env = wigner_envelope_fit(d, d, 0.5, 1.0, WeightSequence::gevrey(2.0), {2.0, 1.0, 0.5, 0.25, 0.1}, plan);
  return {env.feasible && env.C <= 1e3, fmt("C=%.3g c=%.3g", env.C, env.c_prime) + (env.feasible ? "" : " (infeasible)")};
}

bool all_finite(const WeylSymbol& b) {
  return std::all_of(b.b.values().begin(), b.b.values().end(), [](const LogComplex& z) { return std::isfinite(z.logmag); });
}

cd weyl_route(const TensorSymbol& a, const WindowSpec& w, const Profile& psi, const Profile& theta, double xr, double dm, double xir,
              double dxi, bool& finite) {
  const ConvolutionPlan plan{PhaseGrid{Grid1D::with_radius(xr, dm), Grid1D::with_radius(xir, dxi)}};
  const auto b = convolve_symbol_wigner(a, w, w, plan);
  finite = finite && all_finite(b) && !b.truncation_warning;
  const auto r = weyl_pair(b, psi, theta);
  finite = finite && !r.truncation_warning;
  return r.value.to_complex();
}

Outcome exp_regime() {
  const SubGaussianWindow w{1.0, 1.0};
  const TensorSymbol a{{term(ExpPowerFactor{1.5, 1.0}, gauss_xi())}};
  const auto psi = gauss_profile(1.0, 0.3, 0.4), theta = gauss_profile(0.7, -0.2, -0.1);
  bool finite = true;
  const cd coarse = weyl_route(a, w, psi, theta, 6.0, 0.05, 4.0, 0.05, finite);
  const cd fine = weyl_route(a, w, psi, theta, 6.0, 0.025, 4.0, 0.025, finite);
  const auto scan = threshold_scan(1.0, 1.0);
  const double r = rel(fine, coarse);
  return {finite && r <= 1e-4 && scan.brackets,
          fmt("refinement %.2e, transition in (%.2f, %.2f]", r, scan.last_finite, scan.first_divergent) + (finite ? "" : ", non-finite b")};
}

Outcome double_exp_regime() {
  const DoubleExpWindow w{1.0, 1.0};
  const TensorSymbol a{{term(DoubleExpGrowthFactor{0.5, 1.0}, gauss_xi())}};
  const Profile psi{[](double x) { return LogComplex{-std::exp(bracket(x - 0.2)), 2 * kPi * 0.3 * x}; }};
  const Profile theta{[](double x) { return LogComplex{-std::exp(bracket(x + 0.1)), 0.0}; }};
  bool finite = true;
  const cd coarse = weyl_route(a, w, psi, theta, 4.0, 0.05, 6.0, 0.05, finite);
  const cd fine = weyl_route(a, w, psi, theta, 4.0, 0.025, 6.0, 0.025, finite);
  const double r = rel(fine, coarse);
  return {finite && r <= 1e-4, fmt("refinement %.2e", r) + (finite ? ", b finite" : ", non-finite b")};
}

Outcome divergence() {
  const auto d = divergence_demo(1.0, 1.0, 8);
  return {d.strictly_increasing && d.superlinear,
          fmt("ln I_1=%.3g ln I_8=%.4g, last ratio %.3f", d.log_values.front(), d.log_values.back(), d.last_ratio)};
}

Outcome inequality_suites() {
  const std::uint64_t seed = 20261015;
  const PropertyReport rs[] = {check_product_split(10000, seed), check_geometric_mean_decay(10000, seed),
                               check_peetre_type(10000, seed), check_subadditive_bracket(10000, seed)};
  bool pass = true;
  double worst = kNegInf;
  for (const auto& r : rs) {
    pass = pass && r.pass && r.samples == 10000;
    worst = std::max(worst, r.max_violation);
  }
  return {pass, fmt("4 x 10^4 samples, max scaled violation %.2e", worst)};
}

Outcome exponent_fit() {
  double worst = 0.0;
  std::string detail;
  for (double sigma : {0.5, 1.0, 2.0}) {
    const auto f = assoc_exponent_fit(AssociatedFunction(WeightSequence::gevrey(sigma)));
    worst = std::max(worst, std::abs(f.k * sigma - 1.0));
    detail += fmt("sigma=%g k=%.4f ", sigma, f.k);
  }
  return {worst <= 0.1, detail + fmt("(max deviation %.1f%%)", 100 * worst)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::directory_iterator(a)) fa.push_back(e.path().filename());
  for (const auto& e : fs::directory_iterator(b)) fb.push_back(e.path().filename());
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) {
    why = "file sets differ in " + a.string();
    return false;
  }
  for (const auto& f : fa) {
    std::ifstream x(a / f, std::ios::binary), y(b / f, std::ios::binary);
    const std::string sx{std::istreambuf_iterator<char>(x), {}}, sy{std::istreambuf_iterator<char>(y), {}};
    if (sx != sy) {
      why = (a / f).string() + " differs";
      return false;
    }
  }
  return true;
}

Outcome determinism(const std::string& cli, const fs::path& configs, const fs::path& work) {
  const std::pair<const char*, const char*> runs[] = {{"transform", "transform_full.json"},
                                                      {"verify", "verify_default.json"},
                                                      {"locop", "locop_mild.json"},
                                                      {"weights", "weights_gevrey.json"}};
  fs::remove_all(work);
  fs::create_directories(work);
  int compared = 0;
  for (const auto& [cmd, cfg] : runs) {
    for (const char* threads : {"1", "3"}) {
      const auto out = work / (std::string(cmd) + "_" + threads);
      const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + (configs / cfg).string() + "\" --out \"" + out.string() +
                               "\" --seed 42 --threads " + threads + " > \"" + (work / "log.txt").string() + "\" 2>&1";
      if (std::system(line.c_str()) != 0) return {false, std::string(cmd) + " exited nonzero"};
    }
    std::string why;
    if (!same_tree(work / (std::string(cmd) + "_1"), work / (std::string(cmd) + "_3"), why)) return {false, why};
    ++compared;
  }
  return {true, fmt("%g commands re-run (1 vs 3 threads), outputs byte-identical", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <ultraloc-cli> <config-dir> <work-dir>\n", argv[0]);
    return 2;
  }
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"reconstruction identity", reconstruction},
      {"Wigner-STFT identity", wigner_stft},
      {"Weyl-Wigner duality", duality},
      {"route equivalence", route_equivalence},
      {"A_1 identity", a1_identity},
      {"Wigner decay fit", wigner_decay},
      {"double-exponential envelope fit", wigner_envelope},
      {"exponential growth regime", exp_regime},
      {"double-exponential growth regime", double_exp_regime},
      {"divergent pairing sequence", divergence},
      {"inequality suites", inequality_suites},
      {"associated-function exponent", exponent_fit},
      {"CLI determinism", [&] { return determinism(argv[1], argv[2], argv[3]); }},
  };
  int failed = 0, n = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("AC%-2d %s  %s: %s\n", ++n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria pass\n", n - failed, n);
  return failed ? 1 : 0;
}
