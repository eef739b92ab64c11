#include "ultraloc/windows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ultraloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void validate(const WindowSpec& w) {
  std::visit(overloaded{
                 [](const GaussianWindow& g) {
                   if (!positive(g.a)) throw Error(ErrorKind::InvalidParameter, "Gaussian width a must be positive");
                   if (!std::isfinite(g.center) || !std::isfinite(g.freq))
                     throw Error(ErrorKind::InvalidParameter, "Gaussian center/freq must be finite");
                 },
                 [](const SubGaussianWindow& s) {
                   if (!positive(s.r)) throw Error(ErrorKind::InvalidParameter, "SubGaussian r must be positive");
                   if (!(s.q >= 1.0) || !std::isfinite(s.q))
                     throw Error(ErrorKind::InvalidParameter, "SubGaussian q must be >= 1");
                 },
                 [](const DoubleExpWindow& d) {
                   if (!positive(d.t)) throw Error(ErrorKind::InvalidParameter, "DoubleExp t must be positive");
                   if (!positive(d.q)) throw Error(ErrorKind::InvalidParameter, "DoubleExp q must be positive");
                 },
                 [](const SampledWindow&) {},
             },
             w);
}

std::string describe(const WindowSpec& w) {
  char buf[128];
  std::visit(overloaded{
                 [&](const GaussianWindow& g) {
                   std::snprintf(buf, sizeof buf, "Gaussian(a=%g, center=%g, freq=%g)", g.a, g.center, g.freq);
                 },
                 [&](const SubGaussianWindow& s) { std::snprintf(buf, sizeof buf, "SubGaussian(r=%g, q=%g)", s.r, s.q); },
                 [&](const DoubleExpWindow& d) { std::snprintf(buf, sizeof buf, "DoubleExp(t=%g, q=%g)", d.t, d.q); },
                 [&](const SampledWindow& s) { std::snprintf(buf, sizeof buf, "Sampled(n=%zu)", s.samples.size()); },
             },
             w);
  return buf;
}

LogComplex eval(const WindowSpec& w, double x) {
  return std::visit(overloaded{
                        [x](const GaussianWindow& g) {
                          const double u = x - g.center;
                          return LogComplex::polar(0.25 * std::log(2.0 * g.a) - kPi * g.a * u * u,
                                                   2.0 * kPi * g.freq * x);
                        },
                        [x](const SubGaussianWindow& s) {
                          return LogComplex{-s.r * std::pow(bracket(x), s.q), 0.0};
                        },
                        [x](const DoubleExpWindow& d) {
                          return LogComplex{-d.t * std::exp(std::pow(bracket(x), d.q)), 0.0};
                        },
                        [x](const SampledWindow& s) { return interpolate_at(s.samples, x); },
                    },
                    w);
}

double analytic_half_width(const WindowSpec& w) {
  return std::visit(overloaded{
                        [](const GaussianWindow&) { return std::numeric_limits<double>::infinity(); },
                        [](const SubGaussianWindow&) { return 1.0; },
                        [](const DoubleExpWindow& d) { return d.q <= 1.0 ? 1.0 : 0.0; },
                        [](const SampledWindow&) { return 0.0; },
                    },
                    w);
}

LogComplex eval_analytic(const WindowSpec& w, std::complex<double> z) {
  const auto bz = [](std::complex<double> v, double q) {
    const auto b = std::sqrt(1.0 + v * v);
    return q == 1.0 ? b : std::pow(b, q);
  };
  const std::complex<double> L = std::visit(
      overloaded{
          [&](const GaussianWindow& g) {
            const auto u = z - g.center;
            return 0.25 * std::log(2.0 * g.a) - kPi * g.a * u * u + std::complex<double>(0.0, 2.0 * kPi * g.freq) * z;
          },
          [&](const SubGaussianWindow& s) { return -s.r * bz(z, s.q); },
          [&](const DoubleExpWindow& d) { return -d.t * std::exp(bz(z, d.q)); },
          [&](const SampledWindow&) -> std::complex<double> {
            throw Error(ErrorKind::InvalidParameter, "sampled windows have no analytic continuation");
          },
      },
      w);
  return LogComplex::polar(L.real(), L.imag());
}

double log_slope(const WindowSpec& w, double x) {
  return std::visit(overloaded{
                        [x](const GaussianWindow& g) { return -2.0 * kPi * g.a * (x - g.center); },
                        [x](const SubGaussianWindow& s) {
                          return -s.r * s.q * std::pow(bracket(x), s.q - 2.0) * x;
                        },
                        [x](const DoubleExpWindow& d) {
                          const double b = bracket(x);
                          return -d.t * std::exp(std::pow(b, d.q)) * d.q * std::pow(b, d.q - 2.0) * x;
                        },
                        [](const SampledWindow&) { return 0.0; },
                    },
                    w);
}

Profile profile(const WindowSpec& w) {
  if (const auto* s = std::get_if<SampledWindow>(&w)) return interpolate(s->samples);
  return Profile{[w](double x) { return eval(w, x); }, true};
}

double effective_radius(const WindowSpec& w, double drop) {
  return std::visit(overloaded{
                        [drop](const GaussianWindow& g) { return std::abs(g.center) + std::sqrt(drop / (kPi * g.a)); },
                        [drop](const SubGaussianWindow& s) {
                          const double b = std::pow(1.0 + drop / s.r, 1.0 / s.q);
                          return std::sqrt(b * b - 1.0);
                        },
                        [drop](const DoubleExpWindow& d) {
                          const double b = std::pow(std::log(std::exp(1.0) + drop / d.t), 1.0 / d.q);
                          return std::sqrt(b * b - 1.0);
                        },
                        [drop](const SampledWindow& s) {
                          const auto& g = s.samples.grid1d();
                          const double top = s.samples.max_logmag();
                          double r = 0.0;
                          for (std::size_t k = 0; k < g.size(); ++k)
                            if (s.samples[k].logmag >= top - drop) r = std::max(r, std::abs(g[k]));
                          return r;
                        },
                    },
                    w);
}

std::optional<DecayRate> subgaussian_rate(const WindowSpec& w) {
  if (const auto* g = std::get_if<GaussianWindow>(&w)) return DecayRate{kPi * g->a, 2.0};
  if (const auto* s = std::get_if<SubGaussianWindow>(&w)) return DecayRate{s->r, s->q};
  return std::nullopt;
}

namespace {

// Shared sweep: for each alpha in [1, alpha_max] and grid point, the log of
// |d^alpha w| minus the log of the alpha-specific bound (bound excludes C^alpha).
struct Sweep {
  std::vector<std::vector<double>> ratio;      // [alpha][x]
  std::vector<std::vector<double>> log_error;  // [alpha][x], relative to the bound
};

Sweep derivative_sweep(const WindowSpec& w, int alpha_max, const Grid1D& grid, double step,
                       const std::function<double(int, double)>& log_bound) {
  if (alpha_max < 0 || alpha_max > 6) throw Error(ErrorKind::InvalidParameter, "alpha_max must be in [0, 6]");
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParameter, "step must be positive");
  const Profile prof = profile(w);
  Sweep s;
  s.ratio.assign(alpha_max + 1, std::vector<double>(grid.size(), kNegInf));
  s.log_error.assign(alpha_max + 1, std::vector<double>(grid.size(), kNegInf));
  parallel_for(grid.size(), [&](std::size_t k) {
    const double x = grid[k];
    const double h = step / (1.0 + std::abs(log_slope(w, x)));
    s.ratio[0][k] = prof(x).logmag - log_bound(0, x);
    for (int a = 1; a <= alpha_max; ++a) {
      const auto d = finite_diff_log(prof.eval, x, a, h * std::max(1.0, 0.5 * a), false);
      const double lb = log_bound(a, x);
      s.ratio[a][k] = d.value.logmag - lb;
      s.log_error[a][k] = d.log_error - lb;
    }
  });
  return s;
}

DerivativeFit fit_from_sweep(const Sweep& s) {
  DerivativeFit fit;
  const int alpha_max = static_cast<int>(s.ratio.size()) - 1;
  fit.C_alpha.assign(alpha_max + 1, 1.0);
  double log_c = 0.0;
  for (int a = 1; a <= alpha_max; ++a) {
    const double top = *std::max_element(s.ratio[a].begin(), s.ratio[a].end());
    const double worst_err = *std::max_element(s.log_error[a].begin(), s.log_error[a].end());
    if (top == kNegInf) continue;
    const double rel = std::exp(worst_err - top);
    fit.max_rel_error = std::max(fit.max_rel_error, rel);
    if (!(rel <= 1e-3))
      throw Error(ErrorKind::StepCollapse,
                  "finite-difference error exceeds 1e-3 of the fitted bound at order " + std::to_string(a));
    fit.C_alpha[a] = std::exp(top / a);
    log_c = std::max(log_c, top / a);
  }
  fit.C = std::exp(log_c);
  fit.feasible = fit.C <= 1e6;
  return fit;
}

}  // namespace

DerivativeFit verify_subgauss_derivative_bound(const SubGaussianWindow& w, int alpha_max, const Grid1D& grid,
                                               double step) {
  validate(w);
  auto bound = [&](int a, double x) {
    const double b = bracket(x);
    return std::lgamma(a + 1.0) - w.r * std::pow(b, w.q) + std::pow(b, w.q - 1.0);
  };
  auto fit = fit_from_sweep(derivative_sweep(w, alpha_max, grid, step, bound));
  return fit;
}

DerivativeFit verify_doubleexp_derivative_bound(const DoubleExpWindow& w, double rho, double tau, int alpha_max,
                                                const Grid1D& grid, double step) {
  validate(w);
  if (!(tau > 0.0) || !(tau < w.t)) throw Error(ErrorKind::InvalidParameter, "tau must lie in (0, t)");
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidParameter, "rho must be positive");
  auto bound = [&](int a, double x) {
    return (1.0 + rho) * std::lgamma(a + 1.0) - tau * std::exp(std::pow(bracket(x), w.q));
  };
  return fit_from_sweep(derivative_sweep(w, alpha_max, grid, step, bound));
}

SeminormEstimate seminorm_estimate(const WindowSpec& w, const WeightSequence& seq, double r_prime, double q, double h,
                                   int alpha_max, const Grid1D& grid, double step) {
  validate(w);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "h must be positive");
  // bound(a, x) = -(a ln h + r' <x>^q - ln M_a), so ratio = log of the seminorm integrand
  auto bound = [&](int a, double x) { return -(a * std::log(h) + r_prime * std::pow(bracket(x), q) - seq.log_value(a)); };
  const auto s = derivative_sweep(w, alpha_max, grid, step, bound);
  SeminormEstimate est;
  std::vector<double> per_x(grid.size(), kNegInf);
  for (const auto& row : s.ratio)
    for (std::size_t k = 0; k < grid.size(); ++k) per_x[k] = std::max(per_x[k], row[k]);
  est.log_value = *std::max_element(per_x.begin(), per_x.end());
  est.value = std::exp(est.log_value);
  est.tail_growing = tail_monitor(per_x, outer_band_mask(grid)).growing;
  return est;
}

}  // namespace ultraloc
