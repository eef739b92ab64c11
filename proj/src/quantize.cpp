#include "ultraloc/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "sums.hpp"

namespace ultraloc {

using namespace detail;

namespace {

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double window_freq(const WindowSpec& w) {
  const auto* g = std::get_if<GaussianWindow>(&w);
  return g ? std::abs(g->freq) : 0.0;
}

// s -> int gt(eta) e^{2 pi i s eta} d eta, times Pt(-2 pi s). A constant base
// has a point mass at s = 0 instead.
class XiDual {
 public:
  explicit XiDual(const TemperedFactor& g) : g_(g) {}

  bool is_delta() const { return std::holds_alternative<ConstantFactor>(g_.base); }
  LogComplex delta_weight() const {
    return LogComplex::from_complex(std::get<ConstantFactor>(g_.base).value * g_.op.symbol(0.0));
  }

  /// ln of the base transform, without the polynomial factor
  LogComplex base(double s) const {
    if (const auto* gf = std::get_if<GaussianFactor>(&g_.base)) {
      // amp a^{-1/2} e^{-pi s^2 / a} e^{2 pi i s c}
      return LogComplex::from_complex(gf->amp) *
             LogComplex::polar(-0.5 * std::log(gf->a) - kPi * s * s / gf->a, 2.0 * kPi * s * gf->center);
    }
    const auto& sf = std::get<SampledFactor>(g_.base).samples;
    const auto& eta = sf.grid1d();
    std::vector<LogComplex> terms(sf.size());
    const double log_d = std::log(eta.dx());
    for (std::size_t k = 0; k < sf.size(); ++k) terms[k] = sf[k].scaled(log_trap_weight(k, sf.size(), log_d));
    const Scaled sc = rescale(terms);
    return finish(sc, phased_sum(sc, 2.0 * kPi * s, eta.x0(), eta.dx()));
  }

  LogComplex operator()(double s) const {
    return base(s) * LogComplex::from_complex(g_.op.symbol(-2.0 * kPi * s));
  }

  bool analytic() const { return std::holds_alternative<GaussianFactor>(g_.base); }

  /// continuation of operator() to complex s, Gaussian base only
  LogComplex at(cd s) const {
    const auto& gf = std::get<GaussianFactor>(g_.base);
    const cd L = -0.5 * std::log(gf.a) - kPi * s * s / gf.a + cd(0.0, 2.0 * kPi * gf.center) * s;
    return LogComplex::from_complex(gf.amp) * LogComplex::polar(L.real(), L.imag()) *
           LogComplex::from_complex(g_.op.symbol(-2.0 * kPi * s));
  }

  /// |s| beyond which the base transform is negligible
  double support(double drop) const {
    if (const auto* gf = std::get_if<GaussianFactor>(&g_.base)) return std::sqrt((drop + 20.0) * gf->a / kPi);
    return 0.5 / std::get<SampledFactor>(g_.base).samples.grid1d().dx();
  }

 private:
  const TemperedFactor& g_;
};

struct KernelRow {
  double top = kNegInf;
  std::vector<cd> rel;
  /// ln int |K_u(s) g(s)| ds, a bound for every xi
  double log_abs = kNegInf;
};

// Trapezoid samples of K_u g along the line s = sigma + i tau.
struct Contour {
  double tau = 0.0;
  double s0 = 0.0, ds = 0.0;
  Scaled sc;
  /// ln sum |terms| ds
  double log_abs = kNegInf;
};

// G(u, xi) = int K_u(s) g(s) e^{-2 pi i s xi} ds with K_u(s) = phi2(u + s/2) conj phi1(u - s/2).
// When the windows and g continue analytically, large |xi| is summed along
// Im s = -eta sign(xi) instead of the real line.
class KernelTable {
 public:
  KernelTable(const WindowSpec& w1, const WindowSpec& w2, const TemperedFactor& g, double drop, double s_step_max,
              double xi_max)
      : w1_(w1), w2_(w2), dual_(g), drop_(drop) {
    r_ = effective_radius(w1, 40.0) + effective_radius(w2, 40.0);
    ds_max_ = std::min(s_step_max, 0.25 / (xi_max + window_freq(w1) + window_freq(w2) + 2.0));
    strip_ = 2.0 * std::min(analytic_half_width(w1), analytic_half_width(w2));
    if (!dual_.analytic()) strip_ = 0.0;
    eta_max_ = std::min(0.8 * strip_, 3.0);
  }

  KernelRow row(double u, const Grid1D* xi) const {
    KernelRow out;
    if (dual_.is_delta()) {
      const LogComplex v = eval(w2_, u) * eval(w1_, u).conj() * dual_.delta_weight();
      out.top = v.logmag;
      out.log_abs = v.logmag;
      if (xi) out.rel.assign(xi->size(), v.is_zero() ? cd(0.0) : std::polar(1.0, v.phase));
      return out;
    }
    const Contour c0 = contour(u, 0.0);
    out.log_abs = c0.log_abs;
    if (!xi) return out;
    if (c0.sc.a.empty()) {
      out.rel.assign(xi->size(), cd(0.0));
      return out;
    }

    const int levels = eta_max_ > 0.0 ? 4 : 0;
    std::vector<Contour> up(levels), down(levels);
    std::vector<char> have_up(levels, 0), have_down(levels, 0);
    auto value = [&](const Contour& c, double x) {
      const double lift = 2.0 * kPi * c.tau * x;
      const LogComplex v = finish(c.sc, phased_sum(c.sc, -2.0 * kPi * x, c.s0, c.ds)).scaled(std::log(c.ds) + lift);
      return std::pair{v, v.logmag - (c.log_abs + lift)};
    };

    std::vector<LogComplex> g(xi->size());
    for (std::size_t j = 0; j < xi->size(); ++j) {
      const double x = (*xi)[j];
      auto [best, margin] = value(c0, x);
      for (int l = 0; l < levels && margin < -14.0 && x != 0.0; ++l) {
        auto& cache = x > 0.0 ? down : up;
        auto& have = x > 0.0 ? have_down : have_up;
        if (!have[l]) {
          const double eta = eta_max_ * static_cast<double>(l + 1) / levels;
          cache[l] = shifted(u, x > 0.0 ? -eta : eta, c0);
          have[l] = 1;
        }
        if (cache[l].sc.a.empty()) continue;
        const auto [v, m] = value(cache[l], x);
        if (m > margin) best = v, margin = m;
      }
      g[j] = best;
    }
    for (const auto& v : g) out.top = std::max(out.top, v.logmag);
    out.rel.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
      out.rel[j] = g[j].is_zero() ? cd(0.0) : std::polar(std::exp(g[j].logmag - out.top), g[j].phase);
    return out;
  }

 private:
  LogComplex term(double u, cd s) const {
    if (s.imag() == 0.0) return eval(w2_, u + 0.5 * s.real()) * eval(w1_, u - 0.5 * s.real()).conj() * dual_(s.real());
    return eval_analytic(w2_, u + 0.5 * s) * eval_analytic(w1_, std::conj(u - 0.5 * s)).conj() * dual_.at(s);
  }

  double level(double u, cd s) const {
    if (s.imag() == 0.0)
      return eval(w2_, u + 0.5 * s.real()).logmag + eval(w1_, u - 0.5 * s.real()).logmag + dual_.base(s.real()).logmag;
    return term(u, s).logmag;
  }

  // A shifted line reuses the sigma grid of the real one, widened until its
  // own tails have dropped.
  Contour shifted(double u, double tau, const Contour& real) const {
    Contour c;
    c.tau = tau;
    double ds = real.ds;
    if (std::isfinite(strip_)) ds = std::min(ds, (strip_ - std::abs(tau)) / 6.0);
    const double a = real.s0 + static_cast<double>(real.sc.lo) * real.ds;
    const double b = real.s0 + static_cast<double>(real.sc.hi - 1) * real.ds;
    const auto n0 = static_cast<long>(std::ceil((b - a) / ds));
    std::vector<LogComplex> mid(static_cast<std::size_t>(n0 + 1)), left, right;
    double top = kNegInf;
    for (long k = 0; k <= n0; ++k) {
      mid[static_cast<std::size_t>(k)] = term(u, cd(a + static_cast<double>(k) * ds, tau));
      top = std::max(top, mid[static_cast<std::size_t>(k)].logmag);
    }
    if (top == kNegInf) return c;
    auto grow = [&](std::vector<LogComplex>& side, double from, double dir) {
      long below = 0;
      for (long j = 1; j < 200000 && below < 4; ++j) {
        const auto v = term(u, cd(from + dir * static_cast<double>(j) * ds, tau));
        side.push_back(v);
        top = std::max(top, v.logmag);
        below = v.logmag < top - drop_ ? below + 1 : 0;
      }
    };
    grow(left, a, -1.0);
    grow(right, a + static_cast<double>(n0) * ds, 1.0);
    std::vector<LogComplex> terms(left.rbegin(), left.rend());
    terms.insert(terms.end(), mid.begin(), mid.end());
    terms.insert(terms.end(), right.begin(), right.end());
    c.s0 = a - static_cast<double>(left.size()) * ds;
    c.ds = ds;
    c.sc = rescale(terms, 80.0);
    double abs_sum = 0.0;
    for (const auto& t : c.sc.a) abs_sum += std::abs(t);
    c.log_abs = c.sc.top + std::log(abs_sum) + std::log(ds);
    return c;
  }

  Contour contour(double u, double tau) const {
    Contour c;
    c.tau = tau;
    auto lev = [&](double s) { return level(u, cd(s, tau)); };

    // coarse scan, then a golden-section climb around the best point
    const double S = std::min(2.0 * std::abs(u) + 2.0 * r_ + 2.0, dual_.support(drop_));
    const double cs = std::min(0.05, S / 100.0);
    const auto n_coarse = static_cast<long>(std::ceil(S / cs));
    double best = 0.0, best_v = kNegInf;
    for (long j = -n_coarse; j <= n_coarse; ++j) {
      const double s = static_cast<double>(j) * cs;
      const double v = lev(s);
      if (v > best_v) best_v = v, best = s;
    }
    if (best_v == kNegInf) return c;
    double lo = best - cs, hi = best + cs;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(best)); ++it) {
      const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
      if (lev(a) >= lev(b)) hi = b; else lo = a;
    }
    const double p = lev(0.5 * (lo + hi)) >= best_v ? 0.5 * (lo + hi) : best;
    const double lp = lev(p);

    auto curvature = [&](double h) { return -(lev(p + h) - 2.0 * lp + lev(p - h)) / (h * h); };
    double kappa = std::max(curvature(1e-4), 1e-12);
    kappa = std::max(kappa, curvature(std::min(0.2, 0.2 / std::sqrt(kappa))));
    double ds = std::isfinite(kappa) && kappa > 0.0 ? std::min(ds_max_, 0.5 / std::sqrt(kappa)) : ds_max_;

    // extent: stop after a run of points below the cutoff
    auto extent = [&](int dir) {
      long j = 0, below = 0;
      const long cap = 200000;
      while (j < cap) {
        ++j;
        if (lev(p + dir * static_cast<double>(j) * ds) < lp - drop_) {
          if (++below >= 4) break;
        } else {
          below = 0;
        }
      }
      return j;
    };
    const long jl = extent(-1), jr = extent(1);
    const std::size_t n = static_cast<std::size_t>(jl + jr + 1);
    c.s0 = p - static_cast<double>(jl) * ds;
    c.ds = ds;
    std::vector<LogComplex> terms(n);
    for (std::size_t k = 0; k < n; ++k) terms[k] = term(u, cd(c.s0 + static_cast<double>(k) * ds, tau));
    c.sc = rescale(terms, 80.0);
    double abs_sum = 0.0;
    for (const auto& a : c.sc.a) abs_sum += std::abs(a);
    c.log_abs = c.sc.top + std::log(abs_sum) + std::log(ds);
    return c;
  }

  const WindowSpec& w1_;
  const WindowSpec& w2_;
  XiDual dual_;
  double drop_;
  double r_ = 0.0;
  double ds_max_ = 0.05;
  double strip_ = 0.0;
  double eta_max_ = 0.0;
};

// Radius beyond which f(y) K_{x-y}(0) has dropped 30 below its size at |x| = X.
double auto_y_radius(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, double X) {
  const double r12 = effective_radius(w1, 40.0) + effective_radius(w2, 40.0);
  auto kb = [&](double d) { return eval(w2, d).logmag + eval(w1, d).logmag; };
  double kb_max = kNegInf;
  for (double d = -r12; d <= r12; d += 0.05) kb_max = std::max(kb_max, kb(d));
  double radius = X + r12;
  for (const auto& t : a.terms) {
    auto F = [&](double y) { return eval_factor(t.x_factor, y).logmag; };
    const double ref = std::max(F(X), F(-X)) + kb_max;
    auto tail = [&](double d) {
      return std::max({F(X + d) + kb(d), F(X + d) + kb(-d), F(-X - d) + kb(d), F(-X - d) + kb(-d)});
    };
    const double step = 0.25, cap = 400.0;
    double found = cap;
    for (double d = 0.0; d < cap; d += step) {
      bool holds = true;
      for (int k = 0; k < 40 && holds; ++k) holds = tail(d + k * step) <= ref - 30.0;
      if (holds) {
        found = d + 1.0;
        break;
      }
    }
    radius = std::max(radius, X + found);
  }
  return radius;
}

std::string grid_text(const PhaseGrid& g) {
  return fmt("x: %zu pts dx %g, xi: %zu pts dxi %g", g.x.size(), g.x.dx(), g.xi.size(), g.xi.dx());
}

}  // namespace

TailVerdict y_tail_probe(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, double x,
                         double y_radius, double dy) {
  validate(a);
  const auto y = Grid1D::with_radius(y_radius, dy);
  const auto mask = outer_band_mask(y);
  TailVerdict worst;
  for (const auto& t : a.terms) {
    const KernelTable table(w1, w2, t.xi_factor, 45.0, 0.05, 0.0);
    std::vector<double> lv(y.size());
    parallel_for(y.size(), [&](std::size_t k) {
      lv[k] = eval_x_part(t, y[k]).logmag + table.row(x - y[k], nullptr).log_abs;
    });
    const auto v = tail_monitor(lv, mask);
    if (v.growing || worst.inner_max == kNegInf) worst = v;
    if (v.growing) break;
  }
  return worst;
}

WeylSymbol convolve_symbol_wigner(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2,
                                  const ConvolutionPlan& plan) {
  validate(a);
  validate(w1);
  validate(w2);
  const auto& pg = plan.b_grid;
  if (!pg.x.is_symmetric() || !pg.xi.is_symmetric())
    throw Error(ErrorKind::InvalidParameter, "convolution grid must be symmetric");
  const double X = pg.x.radius(), dm = pg.x.dx();

  const auto adm = admissibility(a, w1, w2);
  WeylSymbol out{SampledFunction(pg, std::vector<LogComplex>(pg.size())), {}, false, {}, std::nullopt};
  if (adm.verdict != Admissibility::Admissible) {
    const double probe_radius = plan.y_radius > 0.0 ? plan.y_radius : X + 60.0;
    for (double x : {0.0, -X, X}) {
      if (y_tail_probe(a, w1, w2, x, probe_radius, dm).growing)
        throw Error(ErrorKind::DivergentIntegrand,
                    fmt("y-integrand tail non-decreasing at x=%g (", x) + adm.reason + ")");
    }
    if (adm.verdict == Admissibility::NotAdmissible) throw Error(ErrorKind::NotAdmissible, adm.reason);
    out.warnings.push_back("admissibility unknown: " + adm.reason);
  }

  const double Y = plan.y_radius > 0.0 ? plan.y_radius : auto_y_radius(a, w1, w2, X);
  const auto y = Grid1D::with_radius(Y, dm);
  const auto ymask = outer_band_mask(y);
  const std::size_t nx = pg.x.size(), nk = pg.xi.size(), ny = y.size();
  const std::size_t Kx = (nx - 1) / 2, Ky = (ny - 1) / 2;
  const std::size_t nu = 2 * (Kx + Ky) + 1;
  const double log_dy = std::log(dm);
  const double xi_max = pg.xi.radius();

  std::vector<std::vector<LogComplex>> per_term;
  bool divergent = false;
  double divergent_x = 0.0;
  for (const auto& t : a.terms) {
    const KernelTable table(w1, w2, t.xi_factor, plan.drop, plan.s_step_max, xi_max);
    std::vector<KernelRow> rows(nu);
    parallel_for(nu, [&](std::size_t n) {
      const double u = (static_cast<double>(n) - static_cast<double>(Kx + Ky)) * dm;
      rows[n] = table.row(u, &pg.xi);
    });
    std::vector<LogComplex> f(ny);
    parallel_for(ny, [&](std::size_t k) { f[k] = eval_x_part(t, y[k]).scaled(log_trap_weight(k, ny, log_dy)); });

    std::vector<LogComplex> vals(nx * nk);
    std::vector<char> grow(nx, 0), trunc(nx, 0);
    parallel_for(nx, [&](std::size_t i) {
      // u index of x_i - y_k is i - k + 2 Ky
      std::vector<double> lv(ny);
      double top = kNegInf;
      for (std::size_t k = 0; k < ny; ++k) {
        lv[k] = f[k].logmag + rows[i + 2 * Ky - k].top;
        top = std::max(top, lv[k]);
      }
      if (top == kNegInf) return;
      if (tail_monitor(lv, ymask).growing) grow[i] = 1;
      if (std::max(lv.front(), lv.back()) - top > std::log(1e-10)) trunc[i] = 1;
      // cancellation is judged per xi against that column's own absolute sum
      std::vector<cd> acc(nk, 0.0);
      std::vector<double> mass(nk, 0.0);
      for (std::size_t k = 0; k < ny; ++k) {
        if (lv[k] < top - 60.0) continue;
        const cd c = std::polar(std::exp(lv[k] - top), f[k].phase);
        const double cm = std::abs(c);
        const auto& rel = rows[i + 2 * Ky - k].rel;
        for (std::size_t j = 0; j < nk; ++j) {
          acc[j] += c * rel[j];
          mass[j] += cm * std::abs(rel[j]);
        }
      }
      for (std::size_t j = 0; j < nk; ++j) {
        const double mag = std::abs(acc[j]);
        if (mass[j] > 0.0 && mag >= 1e-13 * mass[j]) vals[i * nk + j] = LogComplex::polar(top + std::log(mag), std::arg(acc[j]));
      }
    });
    for (std::size_t i = 0; i < nx; ++i) {
      if (grow[i] && !divergent) divergent = true, divergent_x = pg.x[i];
      out.truncation_warning = out.truncation_warning || trunc[i];
    }
    per_term.push_back(std::move(vals));
  }
  if (divergent)
    throw Error(ErrorKind::DivergentIntegrand, fmt("y-integrand tail non-decreasing at x=%g", divergent_x));

  std::vector<LogComplex> b(nx * nk);
  std::vector<LogComplex> terms(per_term.size());
  for (std::size_t p = 0; p < b.size(); ++p) {
    for (std::size_t t = 0; t < per_term.size(); ++t) terms[t] = per_term[t][p];
    b[p] = logc_sum(terms).value;
  }
  out.b = SampledFunction(pg, std::move(b));
  out.provenance = fmt("a * W(%s, %s), ", describe(w2).c_str(), describe(w1).c_str()) + grid_text(pg) +
                   fmt(", y radius %g", Y);
  if (out.truncation_warning) out.warnings.push_back("y-integrand above 1e-10 of its max at the y boundary");
  return out;
}

GelfandFit gelfand_bound_fit(const WeylSymbol& W, const WeightSequence& seq, double x_radius,
                             const std::vector<RSequence>& candidates, std::vector<double> decay_candidates,
                             double c_max) {
  const auto& pg = W.b.phase_grid();
  const std::size_t nx = pg.x.size(), nk = pg.xi.size();
  std::vector<double> row_max(nk, kNegInf);
  for (std::size_t i = 0; i < nx; ++i) {
    if (std::abs(pg.x[i]) > x_radius + 1e-12) continue;
    for (std::size_t j = 0; j < nk; ++j) row_max[j] = std::max(row_max[j], W.b.at(i, j).logmag);
  }
  const auto mask = outer_band_mask(pg.xi);
  const double log_cmax = std::log(c_max);

  auto fit = [&](const std::function<double(double)>& env, double& logC) {
    std::vector<double> r(nk);
    logC = kNegInf;
    for (std::size_t j = 0; j < nk; ++j) {
      r[j] = row_max[j] - env(std::abs(pg.xi[j]));
      logC = std::max(logC, r[j]);
    }
    return logC <= log_cmax && !tail_monitor(r, mask).growing;
  };

  GelfandFit g;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double logC = 0.0;
    const bool ok = fit([&](double rho) { return nrp_eval(seq, candidates[c], rho); }, logC);
    if (c == 0 || ok) g.C = std::exp(logC);
    if (ok) {
      g.feasible = true;
      g.candidate = static_cast<int>(c);
      break;
    }
  }
  std::sort(decay_candidates.begin(), decay_candidates.end(), std::greater<>());
  const AssociatedFunction M(seq);
  for (double c : decay_candidates) {
    double logC = 0.0;
    if (fit([&](double rho) { return -M(c * rho); }, logC)) {
      g.decay_feasible = true;
      g.decay_C = std::exp(logC);
      g.decay_c = c;
      break;
    }
  }
  return g;
}

PairingResult weyl_pair(const WeylSymbol& W, const Profile& psi, const Profile& theta) {
  const auto& b = W.b;
  if (!b.is_phase_space()) throw Error(ErrorKind::InvalidParameter, "Weyl symbol must live on a phase grid");
  const auto& pg = b.phase_grid();
  const Grid1D& m = pg.x;
  const Grid1D& xi = pg.xi;
  if (m.size() < 5 || xi.size() < 3) throw Error(ErrorKind::InvalidParameter, "Weyl symbol grid too small");
  const std::size_t nx = (m.size() + 1) / 2, nk = xi.size();
  const double h = 2.0 * m.dx(), log_h = std::log(h), log_dxi = std::log(xi.dx());

  PairingResult res;
  res.route = "weyl";
  std::vector<LogComplex> th(nx), ps(nx);
  double p_top = kNegInf, p_edge = kNegInf;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = m[2 * i];
    th[i] = theta(x).scaled(log_trap_weight(i, nx, log_h));
    ps[i] = psi(x).scaled(log_trap_weight(i, nx, log_h));
    p_top = std::max({p_top, th[i].logmag, ps[i].logmag});
    if (i == 0 || i + 1 == nx) p_edge = std::max({p_edge, th[i].logmag, ps[i].logmag});
  }
  if (p_edge - p_top > std::log(1e-10)) {
    res.truncation_warning = true;
    res.warnings.push_back("psi or theta not decayed at the edge of the symbol grid");
  }

  const double b_top = b.max_logmag();
  if (b_top == kNegInf) {
    res.value = LogComplex::zero();
    return res;
  }
  // xi-decay judged on the rows the probes actually reach
  std::vector<double> reach(m.size(), kNegInf);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < nx; ++k) reach[i + k] = std::max(reach[i + k], th[i].logmag + ps[k].logmag);
  double w_top = kNegInf, w_edge = kNegInf;
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t j = 0; j < nk; ++j) w_top = std::max(w_top, reach[r] + b.at(r, j).logmag);
    w_edge = std::max({w_edge, reach[r] + b.at(r, 0).logmag, reach[r] + b.at(r, nk - 1).logmag});
  }
  const bool direct = w_edge - w_top <= std::log(1e-10);

  auto pair_at = [&](double eps) {
    std::vector<Scaled> rows(m.size());
    parallel_for(m.size(), [&](std::size_t r) {
      std::vector<LogComplex> t(nk);
      for (std::size_t j = 0; j < nk; ++j)
        t[j] = b.at(r, j).scaled(log_trap_weight(j, nk, log_dxi) - eps * xi[j] * xi[j]);
      rows[r] = rescale(t, 80.0);
    });
    double top = kNegInf;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t k = 0; k < nx; ++k) top = std::max(top, th[i].logmag + ps[k].logmag + rows[i + k].top);
    if (top == kNegInf) return LogComplex::zero();
    std::vector<cd> acc(nx, 0.0);
    parallel_for(nx, [&](std::size_t i) {
      for (std::size_t k = 0; k < nx; ++k) {
        const auto& row = rows[i + k];
        const double lw = th[i].logmag + ps[k].logmag + row.top - top;
        if (lw < -60.0) continue;
        const double omega = 2.0 * kPi * (m[2 * i] - m[2 * k]);
        acc[i] += std::polar(std::exp(lw), th[i].phase + ps[k].phase) * phased_sum(row, omega, xi.x0(), xi.dx());
      }
    });
    cd total = 0.0;
    for (const auto& v : acc) total += v;
    return finish_scaled_sum(top, total, nx * nx).value;
  };

  if (direct) {
    res.value = pair_at(0.0);
    return res;
  }

  // Gaussian damping e^{-eps xi^2}, eps in {4, 2, 1} eps0, extrapolated to 0
  const double eps0 = 20.0 / (xi.radius() * xi.radius());
  res.epsilons = {4.0 * eps0, 2.0 * eps0, eps0};
  const LogComplex v4 = pair_at(4.0 * eps0), v2 = pair_at(2.0 * eps0), v1 = pair_at(eps0);
  const double scale = std::max({v4.logmag, v2.logmag, v1.logmag});
  if (scale == kNegInf) {
    res.value = LogComplex::zero();
    return res;
  }
  const cd c4 = v4.scaled(-scale).to_complex(), c2 = v2.scaled(-scale).to_complex(),
           c1 = v1.scaled(-scale).to_complex();
  const cd quad = c4 / 3.0 - 2.0 * c2 + 8.0 / 3.0 * c1;
  const cd lin = 2.0 * c1 - c2;
  res.spread = std::abs(quad - lin) / std::max(std::abs(quad), 1e-300);
  res.value = LogComplex::from_complex(quad).scaled(scale);
  res.warnings.push_back(fmt("xi-damping extrapolated from eps0=%g, spread %.3g", eps0, res.spread));
  if (res.spread > 1e-3)
    throw Error(ErrorKind::ExtrapolationUnstable, fmt("damping extrapolation spread %.3g exceeds 1e-3", res.spread));
  return res;
}

namespace {

void require_mild(const TensorSymbol& a, const LocopPlan& plan) {
  validate(a);
  if (!is_mild(a, plan.tf.phase.x, WeightSequence::gevrey(plan.mild_sigma), plan.mild_h))
    throw Error(ErrorKind::NotMild,
                "symbol exceeds ultrapolynomial growth on the grid; use the convolution route (locop_via_weyl)");
}

SampledFunction symbol_on(const TensorSymbol& a, const PhaseGrid& pg) {
  const std::size_t nx = pg.x.size(), nk = pg.xi.size();
  std::vector<std::vector<LogComplex>> xs, ks;
  for (const auto& t : a.terms) {
    std::vector<LogComplex> xv(nx), kv(nk);
    for (std::size_t i = 0; i < nx; ++i) xv[i] = eval_x_part(t, pg.x[i]);
    for (std::size_t j = 0; j < nk; ++j) kv[j] = eval_xi_part(t, pg.xi[j]);
    xs.push_back(std::move(xv));
    ks.push_back(std::move(kv));
  }
  std::vector<LogComplex> v(nx * nk), terms(a.terms.size());
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nk; ++j) {
      for (std::size_t t = 0; t < terms.size(); ++t) terms[t] = xs[t][i] * ks[t][j];
      v[i * nk + j] = logc_sum(terms).value;
    }
  return SampledFunction(pg, std::move(v));
}

}  // namespace

PairingResult locop_direct(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                           const Profile& theta, const LocopPlan& plan) {
  require_mild(a, plan);
  const auto& pg = plan.tf.phase;
  const auto ps = SampledFunction::sample(plan.tf.signal, psi.eval);
  const auto tb = SampledFunction::sample(plan.tf.signal, [&](double t) { return theta(t).conj(); });
  const auto V1 = stft(ps, w1, plan.tf);
  const auto V2 = stft(tb, w2, plan.tf);
  const auto sym = symbol_on(a, pg);
  std::vector<LogComplex> v(pg.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = sym[p] * V1.values[p] * V2.values[p].conj();
  const auto q = quad(SampledFunction(pg, std::move(v)));

  PairingResult res;
  res.route = "direct";
  res.value = q.value;
  res.truncation_warning = q.truncation_warning || V1.truncation_warning || V2.truncation_warning;
  if (q.truncation_warning) res.warnings.push_back("phase-space integrand not decayed at the grid boundary");
  if (V1.truncation_warning || V2.truncation_warning) res.warnings.push_back("probe not decayed on the signal grid");
  return res;
}

PairingResult locop_via_weyl(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                             const Profile& theta, const LocopPlan& plan) {
  const auto b = convolve_symbol_wigner(a, w1, w2, plan.conv);
  auto res = weyl_pair(b, psi, theta);
  res.route = "convolution-weyl";
  if (b.truncation_warning) res.truncation_warning = true;
  res.warnings.insert(res.warnings.begin(), b.warnings.begin(), b.warnings.end());
  return res;
}

LineResult locop_apply(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                       const LocopPlan& plan) {
  require_mild(a, plan);
  const auto ps = SampledFunction::sample(plan.tf.signal, psi.eval);
  const auto V1 = stft(ps, w1, plan.tf);
  const auto sym = symbol_on(a, plan.tf.phase);
  std::vector<LogComplex> v(plan.tf.phase.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = sym[p] * V1.values[p];
  auto out = stft_adjoint(SampledFunction(plan.tf.phase, std::move(v)), w2, plan.tf.signal);
  if (V1.truncation_warning) {
    out.truncation_warning = true;
    out.warnings.push_back("probe not decayed on the signal grid");
  }
  return out;
}

}  // namespace ultraloc
