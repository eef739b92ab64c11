#include "ultraloc/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace ultraloc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::PrefixTooShort: return "prefix-too-short";
    case ErrorKind::StepCollapse: return "step-collapse";
    case ErrorKind::Overflow: return "overflow-refusal";
    case ErrorKind::NotAdmissible: return "not-admissible";
    case ErrorKind::DivergentIntegrand: return "divergent-integrand";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::ExtrapolationUnstable: return "extrapolation-unstable";
    case ErrorKind::NotMild: return "not-mild";
    case ErrorKind::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

double wrap_phase(double phase) {
  double w = std::remainder(phase, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

LogComplex LogComplex::polar(double logmag, double phase) {
  if (logmag == kNegInf) return zero();
  return {logmag, wrap_phase(phase)};
}

LogComplex LogComplex::from_complex(std::complex<double> z) {
  if (z == 0.0) return zero();
  return {std::log(std::abs(z)), std::arg(z)};
}

std::complex<double> LogComplex::to_complex() const {
  if (is_zero()) return {0.0, 0.0};
  return std::polar(std::exp(logmag), phase);
}

LogComplex LogComplex::scaled(double log_factor) const {
  if (is_zero()) return zero();
  return {logmag + log_factor, phase};
}

LogComplex logc_mul(LogComplex a, LogComplex b) {
  if (a.is_zero() || b.is_zero()) return LogComplex::zero();
  return {a.logmag + b.logmag, wrap_phase(a.phase + b.phase)};
}

SumResult logc_sum(std::span<const LogComplex> terms) {
  double top = kNegInf;
  std::size_t nonzero = 0;
  const LogComplex* single = nullptr;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    ++nonzero;
    single = &t;
    top = std::max(top, t.logmag);
  }
  if (nonzero == 0) return {};
  if (nonzero == 1) return {*single, false};

  double re = 0.0;
  double im = 0.0;
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    const double m = std::exp(t.logmag - top);
    re += m * std::cos(t.phase);
    im += m * std::sin(t.phase);
  }
  return finish_scaled_sum(top, {re, im}, terms.size());
}

SumResult finish_scaled_sum(double top, std::complex<double> s, std::size_t n) {
  if (top == kNegInf) return {};
  const double mag = std::abs(s);
  if (mag < 1e-13 * static_cast<double>(n)) return {LogComplex::zero(), true};
  return {LogComplex{top + std::log(mag), std::arg(s)}, false};
}

Grid1D::Grid1D(double x0, double dx, std::size_t n) : x0_(x0), dx_(dx), n_(n) {
  if (n < 2) throw Error(ErrorKind::InvalidParameter, "grid needs at least 2 points");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw Error(ErrorKind::InvalidParameter, "grid spacing must be positive");
  if (!std::isfinite(x0)) throw Error(ErrorKind::InvalidParameter, "grid origin must be finite");
}

Grid1D Grid1D::symmetric(double dx, std::size_t n) {
  return Grid1D(-0.5 * static_cast<double>(n - 1) * dx, dx, n);
}

Grid1D Grid1D::with_radius(double radius, double dx) {
  if (!(radius > 0.0) || !(dx > 0.0)) throw Error(ErrorKind::InvalidParameter, "radius and spacing must be positive");
  const auto k = static_cast<std::size_t>(std::ceil(radius / dx - 1e-9));
  return Grid1D(-static_cast<double>(k) * dx, dx, 2 * k + 1);
}

bool Grid1D::is_symmetric() const {
  return std::abs(x0_ + radius()) <= 1e-12 * std::max(1.0, radius());
}

std::vector<double> Grid1D::points() const {
  std::vector<double> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = (*this)[k];
  return out;
}

Grid1D PhaseGrid::fft_dual(const Grid1D& signal) {
  const double n = static_cast<double>(signal.size());
  return Grid1D::symmetric(1.0 / (n * signal.dx()), signal.size());
}

SampledFunction::SampledFunction(Grid1D grid, std::vector<LogComplex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size())
    throw Error(ErrorKind::InvalidParameter, "sample count does not match grid");
}

SampledFunction::SampledFunction(PhaseGrid grid, std::vector<LogComplex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size())
    throw Error(ErrorKind::InvalidParameter, "sample count does not match phase grid");
}

SampledFunction SampledFunction::sample(const Grid1D& grid, const std::function<LogComplex(double)>& f) {
  std::vector<LogComplex> v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) v[k] = f(grid[k]);
  return {grid, std::move(v)};
}

SampledFunction SampledFunction::sample(const PhaseGrid& grid,
                                        const std::function<LogComplex(double, double)>& f) {
  std::vector<LogComplex> v(grid.size());
  const std::size_t m = grid.xi.size();
  for (std::size_t i = 0; i < grid.x.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) v[i * m + j] = f(grid.x[i], grid.xi[j]);
  return {grid, std::move(v)};
}

const Grid1D& SampledFunction::grid1d() const {
  if (const auto* g = std::get_if<Grid1D>(&grid_)) return *g;
  throw Error(ErrorKind::InvalidParameter, "expected a 1-D sampled function");
}

const PhaseGrid& SampledFunction::phase_grid() const {
  if (const auto* g = std::get_if<PhaseGrid>(&grid_)) return *g;
  throw Error(ErrorKind::InvalidParameter, "expected a phase-space sampled function");
}

const LogComplex& SampledFunction::at(std::size_t i, std::size_t j) const {
  return values_[i * phase_grid().xi.size() + j];
}

double SampledFunction::cell_weight() const {
  if (is_phase_space()) {
    const auto& g = phase_grid();
    return g.x.dx() * g.xi.dx();
  }
  return grid1d().dx();
}

double SampledFunction::max_logmag() const {
  double m = kNegInf;
  for (const auto& v : values_) m = std::max(m, v.logmag);
  return m;
}

LogComplex interpolate_at(const SampledFunction& f, double x) {
  const Grid1D& g = f.grid1d();
  const double p = (x - g.x0()) / g.dx();
  const double last = static_cast<double>(g.size() - 1);
  if (p < -1e-9 || p > last + 1e-9) return LogComplex::zero();
  const double pc = std::clamp(p, 0.0, last);
  auto i = static_cast<std::size_t>(std::floor(pc));
  if (i >= g.size() - 1) i = g.size() - 2;
  const double w = pc - static_cast<double>(i);
  if (w < 1e-12) return f[i];
  if (w > 1.0 - 1e-12) return f[i + 1];
  const LogComplex& a = f[i];
  const LogComplex& b = f[i + 1];
  if (a.is_zero() || b.is_zero()) return LogComplex::zero();
  const double dphi = wrap_phase(b.phase - a.phase);
  return LogComplex::polar((1.0 - w) * a.logmag + w * b.logmag, a.phase + w * dphi);
}

Profile interpolate(const SampledFunction& f) {
  return Profile{[f](double x) { return interpolate_at(f, x); }, false};
}

Profile reflect(const Profile& f) {
  return Profile{[e = f.eval](double x) { return e(-x); }, f.exact};
}

Profile conjugate(const Profile& f) {
  return Profile{[e = f.eval](double x) { return e(x).conj(); }, f.exact};
}

namespace {

void require_symmetric(const Grid1D& g, const char* what) {
  if (!g.is_symmetric()) throw Error(ErrorKind::InvalidParameter, std::string(what) + " grid must be symmetric");
}

}  // namespace

QuadResult quad(const SampledFunction& f) {
  QuadResult out;
  const double log_cell = std::log(f.cell_weight());
  const double log_half = std::log(0.5);
  const auto vals = f.values();
  std::vector<LogComplex> terms(vals.size());
  double boundary = kNegInf;

  if (f.is_phase_space()) {
    const auto& g = f.phase_grid();
    require_symmetric(g.x, "position");
    require_symmetric(g.xi, "frequency");
    const std::size_t nx = g.x.size();
    const std::size_t nk = g.xi.size();
    for (std::size_t i = 0; i < nx; ++i) {
      const bool edge_x = (i == 0 || i == nx - 1);
      for (std::size_t j = 0; j < nk; ++j) {
        const bool edge_k = (j == 0 || j == nk - 1);
        double lw = log_cell;
        if (edge_x) lw += log_half;
        if (edge_k) lw += log_half;
        const auto& v = vals[i * nk + j];
        terms[i * nk + j] = v.scaled(lw);
        if (edge_x || edge_k) boundary = std::max(boundary, v.logmag);
      }
    }
  } else {
    const auto& g = f.grid1d();
    require_symmetric(g, "quadrature");
    const std::size_t n = g.size();
    for (std::size_t k = 0; k < n; ++k) {
      const bool edge = (k == 0 || k == n - 1);
      terms[k] = vals[k].scaled(edge ? log_cell + log_half : log_cell);
    }
    boundary = std::max(vals.front().logmag, vals.back().logmag);
  }

  const auto s = logc_sum(terms);
  out.value = s.value;
  out.cancelled = s.cancelled;
  const double top = f.max_logmag();
  if (top != kNegInf && boundary != kNegInf) {
    out.log_boundary_ratio = boundary - top;
    out.truncation_warning = out.log_boundary_ratio > std::log(1e-14);
  }
  return out;
}

std::vector<std::complex<double>> to_linear(const SampledFunction& f) {
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f[k].logmag >= 700.0) bad.push_back(k);
  if (!bad.empty()) {
    std::string msg = std::to_string(bad.size()) + " sample(s) exceed logmag 700, first at index";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 5); ++k) msg += " " + std::to_string(bad[k]);
    throw Error(ErrorKind::Overflow, msg);
  }
  std::vector<std::complex<double>> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].to_complex();
  return out;
}

SampledFunction from_linear(const Grid1D& grid, std::span<const std::complex<double>> values) {
  std::vector<LogComplex> v(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) v[k] = LogComplex::from_complex(values[k]);
  return {grid, std::move(v)};
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Level {
  std::complex<double> value;
  double scale;  // sum |c_k f_k| / h^n, the roundoff yardstick
};

Level central_difference(const std::function<std::complex<double>(double)>& f, double x, int order, double h) {
  std::complex<double> acc = 0.0;
  double scale = 0.0;
  for (int k = 0; k <= order; ++k) {
    const double c = ((k % 2) ? -1.0 : 1.0) * binomial(order, k);
    const auto fk = f(x + (0.5 * order - k) * h);
    acc += c * fk;
    scale += std::abs(c) * std::abs(fk);
  }
  const double hn = std::pow(h, order);
  return {acc / hn, scale / hn};
}

}  // namespace

DiffResult finite_diff(const std::function<std::complex<double>(double)>& f, double x, int order, double h,
                       bool strict) {
  if (order < 0 || order > 8) throw Error(ErrorKind::InvalidParameter, "derivative order must be in [0, 8]");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "step must be positive");
  if (order == 0) return {f(x), 0.0};

  const auto d1 = central_difference(f, x, order, h);
  const auto d2 = central_difference(f, x, order, 0.5 * h);
  const auto d3 = central_difference(f, x, order, 0.25 * h);
  const auto r1 = (4.0 * d2.value - d1.value) / 3.0;
  const auto r2 = (4.0 * d3.value - d2.value) / 3.0;
  const auto r = (16.0 * r2 - r1) / 15.0;
  const double err = std::abs(r2 - r1);
  const double floor = 1e4 * std::numeric_limits<double>::epsilon() * d3.scale;
  if (strict && (!std::isfinite(err) || err > 1e-3 * std::max(std::abs(r), floor)))
    throw Error(ErrorKind::StepCollapse, "Richardson estimates disagree (order " + std::to_string(order) +
                                             ", x=" + std::to_string(x) + ")");
  return {r, err};
}

LogDiffResult finite_diff_log(const std::function<LogComplex(double)>& f, double x, int order, double h,
                              bool strict) {
  double ref = f(x).logmag;
  if (ref == kNegInf) {
    for (int k = 0; k <= order; ++k) ref = std::max(ref, f(x + (0.5 * order - k) * h).logmag);
    if (ref == kNegInf) return {};
  }
  auto scaled = [&](double s) { return f(s).scaled(-ref).to_complex(); };
  const auto d = finite_diff(scaled, x, order, h, strict);
  const auto v = LogComplex::from_complex(d.value);
  const double rel = std::abs(d.value) > 0.0 ? d.error / std::abs(d.value) : 0.0;
  return {v.scaled(ref), rel, d.error > 0.0 ? ref + std::log(d.error) : kNegInf};
}

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  g_threads = threads;
}

unsigned thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(g_threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
}

TailVerdict tail_monitor(std::span<const double> log_values, const std::vector<bool>& outer_band, double slack) {
  TailVerdict v;
  for (std::size_t k = 0; k < log_values.size(); ++k) {
    if (outer_band[k])
      v.outer_max = std::max(v.outer_max, log_values[k]);
    else
      v.inner_max = std::max(v.inner_max, log_values[k]);
  }
  v.growing = v.outer_max != kNegInf && v.outer_max > v.inner_max + slack;
  return v;
}

std::vector<bool> outer_band_mask(const Grid1D& grid, double band) {
  std::vector<bool> mask(grid.size());
  const double r = grid.radius();
  const double centre = grid.x0() + r;
  for (std::size_t k = 0; k < grid.size(); ++k) mask[k] = std::abs(grid[k] - centre) >= (1.0 - band) * r - 1e-12;
  return mask;
}

}  // namespace ultraloc
