#include <doctest.h>

#include "oracles/oracles.hpp"
#include "ultraloc/tf.hpp"

using namespace ultraloc;
using cd = std::complex<double>;

namespace {

SampledFunction sample_window(const WindowSpec& w, const Grid1D& g) {
  return SampledFunction::sample(g, [&](double x) { return eval(w, x); });
}

double rel(cd a, cd b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("stft of the standard Gaussian") {
  const GaussianWindow phi{1.0};
  const Grid1D t = Grid1D::with_radius(8.0, 0.05);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.5)}};
  const auto f = sample_window(phi, t);
  const auto V = stft(f, phi, plan);
  CHECK_FALSE(V.truncation_warning);

  CHECK(std::abs(V.values.at(2, 2).to_complex() - 1.0) < 1e-12);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double x = plan.phase.x[i], xi = plan.phase.xi[j];
      CHECK(std::abs(std::exp(V.values.at(i, j).logmag) - std::exp(-kPi * (x * x + xi * xi) / 2)) < 1e-6);
      // brute-force oracle at the same point
      const cd ref = oracle::integrate_c(
          [&](double s) { return oracle::gauss(s, 1.0) * std::exp(cd(0, -2 * kPi * xi * s)) * oracle::gauss(s - x, 1.0); },
          -10.0, 10.0);
      CHECK(std::abs(V.values.at(i, j).to_complex() - ref) < 1e-10);
    }
  }

  const auto zero = SampledFunction::sample(t, [](double) { return LogComplex::zero(); });
  const auto Z = stft(zero, phi, plan);
  for (const auto& v : Z.values.values()) CHECK(v.is_zero());
}

TEST_CASE("fft bridge agrees with direct quadrature") {
  const Grid1D t = Grid1D::with_radius(10.0, 0.05);
  const auto f = sample_window(GaussianWindow{0.7, 0.4, 0.3}, t);
  for (const WindowSpec& w : std::vector<WindowSpec>{GaussianWindow{1.3}, SubGaussianWindow{1.0, 2.0}}) {
    const auto direct = stft(f, w, TFPlan::fft_compatible(t, 3.0, 4, 3.0, TFMethod::Direct));
    const auto fft = stft(f, w, TFPlan::fft_compatible(t, 3.0, 4, 3.0, TFMethod::FftBridge));
    const double top = std::exp(direct.values.max_logmag());
    double worst = 0.0;
    for (std::size_t k = 0; k < direct.values.size(); ++k)
      worst = std::max(worst, std::abs(direct.values[k].to_complex() - fft.values[k].to_complex()));
    CHECK(worst <= 1e-8 * top);
  }

  const TFPlan bad{t, PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.3)}, TFMethod::FftBridge};
  CHECK_THROWS_AS(stft(f, GaussianWindow{}, bad), Error);

  const auto huge = SampledFunction::sample(t, [](double x) { return LogComplex{x > 9.0 ? 750.0 : 0.0, 0.0}; });
  try {
    (void)stft(huge, GaussianWindow{}, TFPlan::fft_compatible(t, 1.0, 4, 1.0, TFMethod::FftBridge));
    FAIL("expected overflow refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Overflow);
  }
}

TEST_CASE("adjoint and reconstruction") {
  const Grid1D t = Grid1D::with_radius(7.0, 0.05);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(7.0, 0.1), Grid1D::with_radius(4.0, 0.05)}};
  const GaussianWindow phi{1.0}, psi{2.0, 0.2};
  const auto f = sample_window(GaussianWindow{1.0, 0.3, 0.2}, t);
  const auto V = stft(f, phi, plan);

  // <V f, F> = <f, V* F> for a Gaussian phase-space probe F
  const auto F = SampledFunction::sample(plan.phase, [](double x, double xi) {
    return LogComplex::polar(-kPi * ((x - 0.5) * (x - 0.5) + xi * xi), 2.0 * kPi * 0.7 * x);
  });
  std::vector<LogComplex> prod(F.size());
  for (std::size_t k = 0; k < F.size(); ++k) prod[k] = V.values[k] * F[k].conj();
  const cd lhs = quad(SampledFunction(plan.phase, prod)).value.to_complex();
  const auto VF = stft_adjoint(F, phi, t);
  const cd rhs = inner(f, VF.values).to_complex();
  CHECK(rel(lhs, rhs) < 1e-8);

  const auto zeroF = SampledFunction::sample(plan.phase, [](double, double) { return LogComplex::zero(); });
  for (const auto& v : stft_adjoint(zeroF, phi, t).values.values()) CHECK(v.is_zero());

  // V*_psi V_phi f = (psi, phi) f
  const auto back = stft_adjoint(V.values, psi, t);
  const cd c = inner(profile(psi), profile(phi), t).to_complex();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    num += std::norm(back.values[k].to_complex() - c * f[k].to_complex());
    den += std::norm(f[k].to_complex());
  }
  CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("Wigner transform of Gaussians") {
  const GaussianWindow phi{1.0};
  const TFPlan plan{Grid1D::with_radius(8.0, 0.02), PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.5)}};
  const auto W = wigner(phi, phi, plan);
  CHECK_FALSE(W.truncation_warning);
  CHECK_FALSE(W.interpolated);
  const double w00 = oracle::integrate([](double y) { return std::sqrt(2.0) * std::exp(-kPi * y * y / 2); }, -20, 20);
  CHECK(w00 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(W.values.at(2, 2).to_complex() - w00) < 1e-10);

  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double x = plan.phase.x[i], xi = plan.phase.xi[j];
      const cd ref = oracle::integrate_c(
          [&](double y) {
            return std::exp(cd(0, -2 * kPi * y * xi)) * oracle::gauss(x + y / 2, 1.0) * std::conj(oracle::gauss(x - y / 2, 1.0));
          },
          -20.0, 20.0);
      CHECK(std::abs(W.values.at(i, j).to_complex() - ref) < 1e-6);
      CHECK(std::abs(W.values.at(i, j).to_complex() - 2.0 * std::exp(-2 * kPi * (x * x + xi * xi))) < 1e-6);
    }
  }
}

TEST_CASE("Wigner-STFT identity and symmetries") {
  const GaussianWindow f{1.0, 0.3, 0.2}, g{2.0, -0.1, -0.4};
  const Grid1D t = Grid1D::with_radius(8.0, 0.02);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.5)}};
  const auto W = wigner(f, g, plan);
  const auto fs = sample_window(f, t);
  const Profile gcheck = reflect(profile(g));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double x = plan.phase.x[i], xi = plan.phase.xi[j];
      const cd via = 2.0 * std::exp(cd(0, 4 * kPi * x * xi)) * stft_point(fs, gcheck, 2 * x, 2 * xi).to_complex();
      CHECK(rel(W.values.at(i, j).to_complex(), via) < 1e-6);
    }
  }

  // W(f, f) is real
  const auto Wff = wigner(f, f, plan);
  for (const auto& v : Wff.values.values()) CHECK(std::abs(v.to_complex().imag()) < 1e-10);

  // translation covariance: W(T_s f)(x, xi) = W(f)(x - s, xi)
  const double s = 0.5;
  const Profile pf = profile(GaussianWindow{1.0, 0.3});
  const Profile shifted{[&](double u) { return pf(u - s); }, true};
  const TFPlan moved{t, PhaseGrid{Grid1D(-1.0 + s, 0.5, 5), plan.phase.xi}};
  const auto W1 = wigner(shifted, shifted, moved);
  const auto W0 = wigner(pf, pf, plan);
  for (std::size_t k = 0; k < W0.values.size(); ++k)
    CHECK(std::abs(W1.values[k].to_complex() - W0.values[k].to_complex()) < 1e-8);

  // marginal: iint W(f, f) = ||f||^2
  const TFPlan full{t, PhaseGrid{Grid1D::with_radius(4.0, 0.05), Grid1D::with_radius(4.0, 0.05)}};
  const auto Wfull = wigner(f, f, full);
  CHECK(std::abs(quad(Wfull.values).value.to_complex() - 1.0) < 1e-6);
}

TEST_CASE("Wigner of sampled inputs") {
  const Grid1D t = Grid1D::with_radius(8.0, 0.02);
  const GaussianWindow phi{1.0};
  const auto s = sample_window(phi, t);
  const TFPlan plan{t, PhaseGrid{Grid1D::with_radius(1.0, 0.5), Grid1D::with_radius(1.0, 0.5)}};
  const auto Ws = wigner(s, s, plan);
  const auto Wc = wigner(phi, phi, plan);
  CHECK_FALSE(Ws.interpolated);
  for (std::size_t k = 0; k < Ws.values.size(); ++k)
    CHECK(std::abs(Ws.values[k].to_complex() - Wc.values[k].to_complex()) < 1e-9);

  const TFPlan off{t, PhaseGrid{Grid1D(-0.99, 0.5, 5), plan.phase.xi}};
  CHECK(wigner(s, s, off).interpolated);
}

TEST_CASE("Wigner decay fits") {
  const SubGaussianWindow w{1.0, 1.0};
  const auto seq = WeightSequence::gevrey(1.0);
  const std::vector<double> cs{8.0, 4.0, 2.0, 1.0, 0.5};
  const TFPlan plan{Grid1D::with_radius(60.0, 0.05),
                    PhaseGrid{Grid1D::with_radius(12.0, 0.1), Grid1D::with_radius(3.0, 0.1)}};
  const auto ok = wigner_decay_fit(w, w, 0.9, 1.0, seq, cs, plan);
  CHECK(ok.feasible);
  CHECK(ok.C <= 1e3);
  CHECK(ok.c_prime > 0.0);
  const auto bad = wigner_decay_fit(w, w, 1.05, 1.0, seq, cs, plan);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.max_violation > 0.0);

  const GaussianWindow g{1.0};
  const TFPlan gp{Grid1D::with_radius(12.0, 0.05), PhaseGrid{Grid1D::with_radius(4.0, 0.1), Grid1D::with_radius(3.0, 0.1)}};
  const auto gf = wigner_decay_fit(g, g, 0.5 * kPi * 0.9, 2.0, WeightSequence::gevrey(0.5), {4.0, 2.0, 1.0}, gp);
  CHECK(gf.feasible);

  const DoubleExpWindow d{1.0, 1.0};
  const TFPlan dp{Grid1D::with_radius(8.0, 0.01), PhaseGrid{Grid1D::with_radius(3.0, 0.05), Grid1D::with_radius(6.0, 0.1)}};
  const auto env = wigner_envelope_fit(d, d, 0.5, 1.0, WeightSequence::gevrey(2.0), {2.0, 1.0, 0.5, 0.25, 0.1}, dp);
  CHECK(env.feasible);
  CHECK(env.C <= 1e3);
}
