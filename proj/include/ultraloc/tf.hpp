#pragma once

// STFT, its adjoint and the cross-Wigner transform on sampled data.

#include <string>
#include <vector>

#include "ultraloc/numerics.hpp"
#include "ultraloc/weights.hpp"
#include "ultraloc/windows.hpp"

namespace ultraloc {

enum class TFMethod { Direct, FftBridge };

struct TFPlan {
  Grid1D signal;
  PhaseGrid phase;
  TFMethod method = TFMethod::Direct;

  /// Phase grid with the FFT-dual frequency spacing 1/(n dx) of `signal`
  /// out to `xi_radius`, positions every `x_stride` signal samples out to
  /// `x_radius`.
  static TFPlan fft_compatible(const Grid1D& signal, double x_radius, std::size_t x_stride, double xi_radius,
                               TFMethod method = TFMethod::Direct);
  /// Signal grid covering `w` down to ln|w| < peak - 40, frequency radius
  /// `xi_radius`.
  static TFPlan for_window(const WindowSpec& w, double dx, double x_radius, double xi_radius, double dxi);
};

struct PhaseResult {
  SampledFunction values;
  bool truncation_warning = false;
  /// half-point values came from interpolated samples
  bool interpolated = false;
  std::vector<std::string> warnings;
};

struct LineResult {
  SampledFunction values;
  bool truncation_warning = false;
  std::vector<std::string> warnings;
};

/// V_w f(x, xi) = int f(t) e^{-2 pi i xi t} conj(w(t - x)) dt
PhaseResult stft(const SampledFunction& f, const Profile& w, const TFPlan& plan);
PhaseResult stft(const SampledFunction& f, const WindowSpec& w, const TFPlan& plan);
/// Single phase-space point by direct quadrature on f's grid.
LogComplex stft_point(const SampledFunction& f, const Profile& w, double x, double xi);

/// V*_w F(x) = iint F(y, eta) w(x - y) e^{2 pi i x eta} dy deta on `out`.
LineResult stft_adjoint(const SampledFunction& F, const Profile& w, const Grid1D& out);
LineResult stft_adjoint(const SampledFunction& F, const WindowSpec& w, const Grid1D& out);

/// W(f, g)(x, xi) = int e^{-2 pi i y xi} f(x + y/2) conj(g(x - y/2)) dy with
/// y on a grid of spacing plan.signal.dx() covering twice the signal range.
PhaseResult wigner(const Profile& f, const Profile& g, const TFPlan& plan);
PhaseResult wigner(const WindowSpec& f, const WindowSpec& g, const TFPlan& plan);
/// Sampled inputs: y spacing 2 dx so that x +- y/2 stays on the sample grid
/// for x on it; other points are interpolated (flagged).
PhaseResult wigner(const SampledFunction& f, const SampledFunction& g, const TFPlan& plan);
LogComplex wigner_point(const Profile& f, const Profile& g, double x, double xi, const Grid1D& y);

/// int f conj(g) over the shared grid
LogComplex inner(const SampledFunction& f, const SampledFunction& g);
/// int f conj(g) dt for closed forms on `grid`
LogComplex inner(const Profile& f, const Profile& g, const Grid1D& grid);

struct DecayFit {
  double C = 0.0;
  double c_prime = 0.0;
  double r_prime = 0.0;
  bool feasible = false;
  /// ln of how far the best candidate overshoots: log(C / C_max) or the
  /// outer-band excess, whichever is larger; <= 0 when feasible
  double max_violation = 0.0;
  std::vector<std::string> notes;
};

/// Smallest C and largest c' from `c_candidates` with
/// |W(f,g)(x,xi)| <= C e^{-2 r' <x>^q} e^{-M(c'|xi|)} on the plan's grid.
DecayFit wigner_decay_fit(const WindowSpec& f, const WindowSpec& g, double r_prime, double q,
                          const WeightSequence& seq, std::vector<double> c_candidates, const TFPlan& plan,
                          double c_max = 1e6);

/// |W(f,g)| <= C e^{-c<x>^q} e^{-M(c|xi|)} exp(-tau e^{<x>^q}) with one shared c.
DecayFit wigner_envelope_fit(const WindowSpec& f, const WindowSpec& g, double tau, double q,
                             const WeightSequence& seq, std::vector<double> c_candidates, const TFPlan& plan,
                             double c_max = 1e6);

/// Fits the bound to an already computed Wigner transform; `log_envelope`
/// is ln of the bound with C = 1 for a given candidate.
DecayFit fit_phase_bound(const SampledFunction& W, std::vector<double> c_candidates,
                         const std::function<double(double c, double x, double xi)>& log_envelope, double c_max);

}  // namespace ultraloc
