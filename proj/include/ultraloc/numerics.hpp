#pragma once

// Log-domain complex arithmetic, uniform grids, trapezoidal quadrature and
// finite differences. Every sample that can reach exp(exp(.)) magnitudes is
// carried as a LogComplex; linear doubles only appear after an explicit
// to_linear() with its overflow guard.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ultraloc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum class ErrorKind {
  InvalidParameter,
  PrefixTooShort,
  StepCollapse,
  Overflow,
  NotAdmissible,
  DivergentIntegrand,
  Infeasible,
  ExtrapolationUnstable,
  NotMild,
  ConfigInvalid,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phase);

/// <x> = sqrt(1 + x^2).
inline double bracket(double x) { return std::hypot(1.0, x); }

/// Complex number stored as (ln|z|, arg z). logmag = -inf is the exact zero,
/// whose phase is canonically 0.
struct LogComplex {
  double logmag = kNegInf;
  double phase = 0.0;

  static LogComplex zero() { return {}; }
  static LogComplex one() { return {0.0, 0.0}; }
  static LogComplex polar(double logmag, double phase);
  static LogComplex from_complex(std::complex<double> z);

  bool is_zero() const { return logmag == kNegInf; }
  LogComplex conj() const { return is_zero() ? zero() : LogComplex{logmag, wrap_phase(-phase)}; }
  /// exp(logmag) * e^{i phase}; overflows silently for logmag > ~709.
  std::complex<double> to_complex() const;
  /// Multiplies by a positive real given as its logarithm.
  LogComplex scaled(double log_factor) const;

  friend bool operator==(const LogComplex&, const LogComplex&) = default;
};

LogComplex logc_mul(LogComplex a, LogComplex b);
inline LogComplex operator*(LogComplex a, LogComplex b) { return logc_mul(a, b); }

struct SumResult {
  LogComplex value;
  bool cancelled = false;  // rescaled sum fell below 1e-13 * term count
};

/// Sum of log-domain terms: the largest logmag is factored out and the
/// rescaled residuals are added in ordinary complex arithmetic. A cancelled
/// sum is reported as exact zero with the flag set.
SumResult logc_sum(std::span<const LogComplex> terms);
/// Final step of logc_sum for callers that accumulate the rescaled residual
/// sum `s` of `n` terms themselves (top = common max logmag).
SumResult finish_scaled_sum(double top, std::complex<double> s, std::size_t n);

/// Uniform 1-D grid x0 + k dx, k = 0..n-1.
class Grid1D {
 public:
  Grid1D(double x0, double dx, std::size_t n);
  /// Symmetric grid with the given spacing and point count.
  static Grid1D symmetric(double dx, std::size_t n);
  /// Symmetric grid with 2*ceil(radius/dx)+1 points (odd, contains 0).
  static Grid1D with_radius(double radius, double dx);

  double x0() const { return x0_; }
  double dx() const { return dx_; }
  std::size_t size() const { return n_; }
  double operator[](std::size_t k) const { return x0_ + static_cast<double>(k) * dx_; }
  double radius() const { return 0.5 * static_cast<double>(n_ - 1) * dx_; }
  bool is_symmetric() const;
  std::vector<double> points() const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double x0_;
  double dx_;
  std::size_t n_;
};

struct PhaseGrid {
  Grid1D x;
  Grid1D xi;

  /// Frequency grid dual to `signal` under the DFT: n points, spacing 1/(n dx).
  static Grid1D fft_dual(const Grid1D& signal);
  std::size_t size() const { return x.size() * xi.size(); }
};

/// Values of a function on a 1-D grid or on a phase grid (row-major, x outer).
class SampledFunction {
 public:
  SampledFunction(Grid1D grid, std::vector<LogComplex> values);
  SampledFunction(PhaseGrid grid, std::vector<LogComplex> values);

  static SampledFunction sample(const Grid1D& grid, const std::function<LogComplex(double)>& f);
  static SampledFunction sample(const PhaseGrid& grid,
                                const std::function<LogComplex(double, double)>& f);

  bool is_phase_space() const { return std::holds_alternative<PhaseGrid>(grid_); }
  const Grid1D& grid1d() const;
  const PhaseGrid& phase_grid() const;
  std::span<const LogComplex> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const LogComplex& operator[](std::size_t k) const { return values_[k]; }
  const LogComplex& at(std::size_t i, std::size_t j) const;
  /// dx for 1-D grids, dx * dxi on phase grids.
  double cell_weight() const;
  double max_logmag() const;

 private:
  std::variant<Grid1D, PhaseGrid> grid_;
  std::vector<LogComplex> values_;
};

/// A function of one real variable evaluated in the log domain. `exact` is
/// false when values come from interpolation of samples.
struct Profile {
  std::function<LogComplex(double)> eval;
  bool exact = true;

  LogComplex operator()(double x) const { return eval(x); }
};

/// Linear interpolation in logmag and unwrapped phase; zero outside the grid.
LogComplex interpolate_at(const SampledFunction& f, double x);
Profile interpolate(const SampledFunction& f);
/// t -> f(-t)
Profile reflect(const Profile& f);
Profile conjugate(const Profile& f);

struct QuadResult {
  LogComplex value;
  bool cancelled = false;
  bool truncation_warning = false;
  /// ln(max boundary |f| / max |f|); -inf when the boundary vanishes.
  double log_boundary_ratio = kNegInf;
};

/// Log-domain trapezoidal rule over a symmetric 1-D or phase grid.
QuadResult quad(const SampledFunction& f);

/// Pointwise exp; refuses (ErrorKind::Overflow) when any logmag >= 700.
std::vector<std::complex<double>> to_linear(const SampledFunction& f);
SampledFunction from_linear(const Grid1D& grid, std::span<const std::complex<double>> values);

struct DiffResult {
  std::complex<double> value;
  double error = 0.0;
};

/// order-th derivative by central differences at steps h, h/2, h/4 combined
/// with two Richardson sweeps. Throws StepCollapse when the two Richardson
/// estimates disagree by more than 1e-3 relative. With strict = false the
/// disagreement is only reported in `error` and the caller judges it.
DiffResult finite_diff(const std::function<std::complex<double>(double)>& f, double x, int order,
                       double h, bool strict = true);

struct LogDiffResult {
  LogComplex value;
  double rel_error = 0.0;
  /// ln of the absolute error estimate
  double log_error = kNegInf;
};

/// finite_diff applied to f / |f(x)|, so stencils far down an exp(-exp)
/// profile neither underflow nor lose their scale.
LogDiffResult finite_diff_log(const std::function<LogComplex(double)>& f, double x, int order,
                              double h, bool strict = true);

/// Splits [0, n) across the configured worker count. Each index is handled
/// by exactly one worker, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
/// 0 = hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

struct TailVerdict {
  bool growing = false;
  double inner_max = kNegInf;
  double outer_max = kNegInf;
};

/// Compares the largest log-value inside the outer band with the largest one
/// in the interior. `growing` is set when the band exceeds the interior
/// maximum by more than `slack`: the sup is still climbing at the truncation
/// boundary.
TailVerdict tail_monitor(std::span<const double> log_values, const std::vector<bool>& outer_band,
                         double slack = 1e-9);
/// Band mask for |coord| >= (1 - band) * radius on a 1-D grid.
std::vector<bool> outer_band_mask(const Grid1D& grid, double band = 0.1);

}  // namespace ultraloc
