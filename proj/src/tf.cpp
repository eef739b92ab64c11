#include "ultraloc/tf.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>

#include "sums.hpp"

namespace ultraloc {

using namespace detail;

TFPlan TFPlan::fft_compatible(const Grid1D& signal, double x_radius, std::size_t x_stride, double xi_radius,
                              TFMethod method) {
  if (x_stride == 0) throw Error(ErrorKind::InvalidParameter, "x_stride must be positive");
  const double dxi = 1.0 / (static_cast<double>(signal.size()) * signal.dx());
  if (xi_radius * 2.0 >= static_cast<double>(signal.size()) * dxi)
    throw Error(ErrorKind::InvalidParameter, "frequency radius exceeds the DFT band");
  return TFPlan{signal,
                PhaseGrid{Grid1D::with_radius(x_radius, signal.dx() * static_cast<double>(x_stride)),
                          Grid1D::with_radius(xi_radius, dxi)},
                method};
}

TFPlan TFPlan::for_window(const WindowSpec& w, double dx, double x_radius, double xi_radius, double dxi) {
  const double sr = x_radius + effective_radius(w, 40.0);
  return TFPlan{Grid1D::with_radius(sr, dx),
                PhaseGrid{Grid1D::with_radius(x_radius, dx * std::max(1.0, std::round(0.1 / dx))),
                          Grid1D::with_radius(xi_radius, dxi)},
                TFMethod::Direct};
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))), size(n) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
  std::size_t size;
};

struct FftwPlan {
  explicit FftwPlan(std::size_t n) : buffer(n) {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buffer.data, buffer.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  FftwBuffer buffer;
  fftw_plan plan;
};

PhaseResult stft_fft(const SampledFunction& f, const Profile& w, const TFPlan& plan) {
  const Grid1D& t = f.grid1d();
  const Grid1D& xg = plan.phase.x;
  const Grid1D& kg = plan.phase.xi;
  const double prod = t.dx() * kg.dx();
  const double nd = std::round(1.0 / prod);
  if (std::abs(nd * prod - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidParameter, "fft bridge needs dxi = 1/(N dx) with integer N");
  const auto N = static_cast<std::size_t>(nd);
  if (N < t.size() || N < kg.size())
    throw Error(ErrorKind::InvalidParameter, "fft length shorter than the signal or frequency grid");

  const auto flin = to_linear(f);
  const FftwPlan fp(N);
  std::vector<LogComplex> out(plan.phase.size());
  bool overflow = false;
  std::string overflow_msg;
  std::mutex overflow_mutex;

  parallel_for(xg.size(), [&](std::size_t i) {
    FftwBuffer buf(N);
    const double x = xg[i];
    for (std::size_t k = 0; k < N; ++k) buf.data[k][0] = buf.data[k][1] = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const LogComplex wv = w(t[k] - x).conj();
      if (wv.logmag >= 700.0) {
        std::lock_guard lock(overflow_mutex);
        overflow = true;
        overflow_msg = "window sample exceeds logmag 700 at t=" + std::to_string(t[k]);
        return;
      }
      const double wt = (k == 0 || k + 1 == t.size()) ? 0.5 : 1.0;
      const cd v = flin[k] * wv.to_complex() * wt * std::polar(1.0, -2.0 * kPi * kg.x0() * t.dx() * double(k));
      buf.data[k][0] = v.real();
      buf.data[k][1] = v.imag();
    }
    fftw_execute_dft(fp.plan, buf.data, buf.data);
    for (std::size_t j = 0; j < kg.size(); ++j) {
      const cd v = cd(buf.data[j][0], buf.data[j][1]) * std::polar(t.dx(), -2.0 * kPi * kg[j] * t.x0());
      out[i * kg.size() + j] = LogComplex::from_complex(v);
    }
  });
  if (overflow) throw Error(ErrorKind::Overflow, overflow_msg);
  PhaseResult r{SampledFunction(plan.phase, std::move(out)), false, false, {}};
  r.truncation_warning = boundary_warning(f);
  return r;
}

}  // namespace

PhaseResult stft(const SampledFunction& f, const Profile& w, const TFPlan& plan) {
  const Grid1D& t = f.grid1d();
  if (!(t == plan.signal)) throw Error(ErrorKind::InvalidParameter, "signal grid does not match the plan");
  if (plan.method == TFMethod::FftBridge) return stft_fft(f, w, plan);

  const Grid1D& xg = plan.phase.x;
  const Grid1D& kg = plan.phase.xi;
  const double log_dt = std::log(t.dx());
  std::vector<LogComplex> out(plan.phase.size());
  parallel_for(xg.size(), [&](std::size_t i) {
    std::vector<LogComplex> terms(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
      terms[k] = (f[k] * w(t[k] - xg[i]).conj()).scaled(log_trap_weight(k, t.size(), log_dt));
    const Scaled s = rescale(terms);
    for (std::size_t j = 0; j < kg.size(); ++j)
      out[i * kg.size() + j] = finish(s, phased_sum(s, -2.0 * kPi * kg[j], t.x0(), t.dx()));
  });
  PhaseResult r{SampledFunction(plan.phase, std::move(out)), false, false, {}};
  r.truncation_warning = boundary_warning(f);
  if (r.truncation_warning) r.warnings.push_back("signal not decayed below 1e-14 at the grid boundary");
  return r;
}

PhaseResult stft(const SampledFunction& f, const WindowSpec& w, const TFPlan& plan) {
  validate(w);
  return stft(f, profile(w), plan);
}

LogComplex stft_point(const SampledFunction& f, const Profile& w, double x, double xi) {
  const Grid1D& t = f.grid1d();
  const double log_dt = std::log(t.dx());
  std::vector<LogComplex> terms(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    terms[k] = (f[k] * w(t[k] - x).conj()).scaled(log_trap_weight(k, t.size(), log_dt));
  const Scaled s = rescale(terms);
  return finish(s, phased_sum(s, -2.0 * kPi * xi, t.x0(), t.dx()));
}

LineResult stft_adjoint(const SampledFunction& F, const Profile& w, const Grid1D& out) {
  const PhaseGrid& pg = F.phase_grid();
  const std::size_t ny = pg.x.size();
  const std::size_t ne = pg.xi.size();
  const double log_cell = std::log(pg.x.dx() * pg.xi.dx());

  // Row maxima and row-relative values with trapezoid weights folded in.
  std::vector<double> row_top(ny, kNegInf);
  std::vector<std::vector<LogComplex>> rows(ny, std::vector<LogComplex>(ne));
  for (std::size_t i = 0; i < ny; ++i) {
    const double wy = (i == 0 || i + 1 == ny) ? std::log(0.5) : 0.0;
    for (std::size_t j = 0; j < ne; ++j) {
      const double we = (j == 0 || j + 1 == ne) ? std::log(0.5) : 0.0;
      rows[i][j] = F.at(i, j).scaled(wy + we + log_cell);
    }
  }
  std::vector<Scaled> scaled(ny);
  for (std::size_t i = 0; i < ny; ++i) {
    scaled[i] = rescale(rows[i], 80.0);
    row_top[i] = scaled[i].top;
  }

  std::vector<LogComplex> vals(out.size());
  parallel_for(out.size(), [&](std::size_t m) {
    const double x = out[m];
    std::vector<LogComplex> wx(ny);
    double top = kNegInf;
    for (std::size_t i = 0; i < ny; ++i) {
      wx[i] = w(x - pg.x[i]);
      if (row_top[i] != kNegInf && !wx[i].is_zero()) top = std::max(top, row_top[i] + wx[i].logmag);
    }
    if (top == kNegInf) return;
    cd acc = 0.0;
    for (std::size_t i = 0; i < ny; ++i) {
      if (row_top[i] == kNegInf || wx[i].is_zero()) continue;
      const double rel = row_top[i] + wx[i].logmag - top;
      if (rel < -80.0) continue;
      const cd inner_sum = phased_sum(scaled[i], 2.0 * kPi * x, pg.xi.x0(), pg.xi.dx());
      acc += std::polar(std::exp(rel), wx[i].phase) * inner_sum;
    }
    vals[m] = finish_scaled_sum(top, acc, ny * ne).value;
  });

  LineResult r{SampledFunction(out, std::move(vals)), false, {}};
  double frame = kNegInf;
  for (std::size_t i = 0; i < ny; ++i) {
    frame = std::max({frame, F.at(i, 0).logmag, F.at(i, ne - 1).logmag});
  }
  for (std::size_t j = 0; j < ne; ++j) frame = std::max({frame, F.at(0, j).logmag, F.at(ny - 1, j).logmag});
  const double top = F.max_logmag();
  r.truncation_warning = top != kNegInf && frame - top > std::log(1e-14);
  if (r.truncation_warning) r.warnings.push_back("phase-space input not decayed at the grid frame");
  return r;
}

LineResult stft_adjoint(const SampledFunction& F, const WindowSpec& w, const Grid1D& out) {
  validate(w);
  return stft_adjoint(F, profile(w), out);
}

namespace {

PhaseResult wigner_on(const Profile& f, const Profile& g, const PhaseGrid& pg, const Grid1D& y) {
  const std::size_t nx = pg.x.size();
  const std::size_t nk = pg.xi.size();
  const double log_dy = std::log(y.dx());
  std::vector<LogComplex> out(pg.size());
  std::vector<char> warn(nx, 0);
  parallel_for(nx, [&](std::size_t i) {
    const double x = pg.x[i];
    std::vector<LogComplex> terms(y.size());
    for (std::size_t k = 0; k < y.size(); ++k)
      terms[k] = (f(x + 0.5 * y[k]) * g(x - 0.5 * y[k]).conj()).scaled(log_trap_weight(k, y.size(), log_dy));
    const Scaled s = rescale(terms);
    if (s.top != kNegInf && std::max(terms.front().logmag, terms.back().logmag) - s.top > std::log(1e-14))
      warn[i] = 1;
    for (std::size_t j = 0; j < nk; ++j)
      out[i * nk + j] = finish(s, phased_sum(s, -2.0 * kPi * pg.xi[j], y.x0(), y.dx()));
  });
  PhaseResult r{SampledFunction(pg, std::move(out)), false, false, {}};
  r.truncation_warning = std::any_of(warn.begin(), warn.end(), [](char c) { return c != 0; });
  if (r.truncation_warning) r.warnings.push_back("Wigner y-integrand not decayed at the y-grid boundary");
  return r;
}

}  // namespace

PhaseResult wigner(const Profile& f, const Profile& g, const TFPlan& plan) {
  const Grid1D y = Grid1D::with_radius(2.0 * plan.signal.radius(), plan.signal.dx());
  auto r = wigner_on(f, g, plan.phase, y);
  r.interpolated = !f.exact || !g.exact;
  return r;
}

PhaseResult wigner(const WindowSpec& f, const WindowSpec& g, const TFPlan& plan) {
  validate(f);
  validate(g);
  return wigner(profile(f), profile(g), plan);
}

PhaseResult wigner(const SampledFunction& f, const SampledFunction& g, const TFPlan& plan) {
  const Grid1D& t = f.grid1d();
  if (!(t == g.grid1d())) throw Error(ErrorKind::InvalidParameter, "Wigner inputs must share a grid");
  const Grid1D y = Grid1D::with_radius(2.0 * t.radius(), 2.0 * t.dx());
  auto r = wigner_on(interpolate(f), interpolate(g), plan.phase, y);
  bool aligned = true;
  for (std::size_t i = 0; i < plan.phase.x.size(); ++i) {
    const double p = (plan.phase.x[i] - t.x0()) / t.dx();
    if (std::abs(p - std::round(p)) > 1e-9) aligned = false;
  }
  r.interpolated = !aligned;
  if (!aligned) r.warnings.push_back("x-grid not aligned with samples; half-point values interpolated");
  return r;
}

LogComplex wigner_point(const Profile& f, const Profile& g, double x, double xi, const Grid1D& y) {
  const double log_dy = std::log(y.dx());
  std::vector<LogComplex> terms(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    terms[k] = (f(x + 0.5 * y[k]) * g(x - 0.5 * y[k]).conj()).scaled(log_trap_weight(k, y.size(), log_dy));
  const Scaled s = rescale(terms);
  return finish(s, phased_sum(s, -2.0 * kPi * xi, y.x0(), y.dx()));
}

LogComplex inner(const SampledFunction& f, const SampledFunction& g) {
  if (!(f.grid1d() == g.grid1d())) throw Error(ErrorKind::InvalidParameter, "inner product needs a shared grid");
  std::vector<LogComplex> v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v[k] = f[k] * g[k].conj();
  return quad(SampledFunction(f.grid1d(), std::move(v))).value;
}

LogComplex inner(const Profile& f, const Profile& g, const Grid1D& grid) {
  return quad(SampledFunction::sample(grid, [&](double t) { return f(t) * g(t).conj(); })).value;
}

DecayFit fit_phase_bound(const SampledFunction& W, std::vector<double> c_candidates,
                         const std::function<double(double, double, double)>& log_envelope, double c_max) {
  if (c_candidates.empty()) throw Error(ErrorKind::InvalidParameter, "no c candidates");
  std::sort(c_candidates.begin(), c_candidates.end(), std::greater<>());
  const PhaseGrid& pg = W.phase_grid();
  const std::size_t nx = pg.x.size();
  const std::size_t nk = pg.xi.size();
  const auto xmask = outer_band_mask(pg.x);
  const auto kmask = outer_band_mask(pg.xi);

  DecayFit best;
  bool have = false;
  for (double c : c_candidates) {
    std::vector<double> by_x(nx, kNegInf), by_k(nk, kNegInf);
    double top = kNegInf;
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < nk; ++j) {
        const auto& v = W.at(i, j);
        if (v.is_zero()) continue;
        const double r = v.logmag - log_envelope(c, pg.x[i], pg.xi[j]);
        by_x[i] = std::max(by_x[i], r);
        by_k[j] = std::max(by_k[j], r);
        top = std::max(top, r);
      }
    }
    const auto tx = tail_monitor(by_x, xmask);
    const auto tk = tail_monitor(by_k, kmask);
    DecayFit fit;
    fit.C = std::exp(top);
    fit.c_prime = c;
    const double excess = std::max(tx.outer_max - tx.inner_max, tk.outer_max - tk.inner_max);
    fit.max_violation = std::max(top - std::log(c_max), excess);
    fit.feasible = top <= std::log(c_max) && !tx.growing && !tk.growing;
    if (tx.growing) fit.notes.push_back("bound ratio still growing at the x boundary");
    if (tk.growing) fit.notes.push_back("bound ratio still growing at the xi boundary");
    if (top > std::log(c_max)) fit.notes.push_back("fitted C exceeds the cap");
    if (fit.feasible) return fit;
    if (!have) {
      best = fit;
      have = true;
    }
    if (fit.max_violation < best.max_violation) best = fit;
  }
  return best;
}

DecayFit wigner_decay_fit(const WindowSpec& f, const WindowSpec& g, double r_prime, double q,
                          const WeightSequence& seq, std::vector<double> c_candidates, const TFPlan& plan,
                          double c_max) {
  if (!(r_prime > 0.0)) throw Error(ErrorKind::InvalidParameter, "r' must be positive");
  const auto W = wigner(f, g, plan);
  const AssociatedFunction M(seq);
  auto env = [&](double c, double x, double xi) {
    return -2.0 * r_prime * std::pow(bracket(x), q) - M(c * std::abs(xi));
  };
  auto fit = fit_phase_bound(W.values, std::move(c_candidates), env, c_max);
  fit.r_prime = r_prime;
  for (auto& w : W.warnings) fit.notes.push_back(w);
  return fit;
}

DecayFit wigner_envelope_fit(const WindowSpec& f, const WindowSpec& g, double tau, double q,
                             const WeightSequence& seq, std::vector<double> c_candidates, const TFPlan& plan,
                             double c_max) {
  const auto W = wigner(f, g, plan);
  const AssociatedFunction M(seq);
  auto env = [&](double c, double x, double xi) {
    const double b = std::pow(bracket(x), q);
    return -c * b - M(c * std::abs(xi)) - tau * std::exp(b);
  };
  auto fit = fit_phase_bound(W.values, std::move(c_candidates), env, c_max);
  for (auto& w : W.warnings) fit.notes.push_back(w);
  return fit;
}

}  // namespace ultraloc
