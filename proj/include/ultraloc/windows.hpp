#pragma once

// Closed-form window families and the derivative-bound fits used to check
// their Gelfand-Shilov type estimates on a grid.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ultraloc/numerics.hpp"
#include "ultraloc/weights.hpp"

namespace ultraloc {

/// (2a)^{1/4} e^{-pi a (t - center)^2} e^{2 pi i freq t}; unit L2 norm.
struct GaussianWindow {
  double a = 1.0;
  double center = 0.0;
  double freq = 0.0;
};

/// e^{-r <t>^q}, q >= 1
struct SubGaussianWindow {
  double r = 1.0;
  double q = 1.0;
};

/// exp(-t e^{<x>^q}), q > 0
struct DoubleExpWindow {
  double t = 1.0;
  double q = 1.0;
};

struct SampledWindow {
  SampledFunction samples;
};

using WindowSpec = std::variant<GaussianWindow, SubGaussianWindow, DoubleExpWindow, SampledWindow>;

/// Throws InvalidParameter on out-of-scope parameters.
void validate(const WindowSpec& w);
std::string describe(const WindowSpec& w);

LogComplex eval(const WindowSpec& w, double x);
/// Half-width of the strip |Im z| < h where the family continues analytically
/// and keeps its decay; 0 when it does not.
double analytic_half_width(const WindowSpec& w);
/// The continuation at complex z, inside that strip.
LogComplex eval_analytic(const WindowSpec& w, std::complex<double> z);
/// d/dx ln|w(x)|, used to scale finite-difference steps.
double log_slope(const WindowSpec& w, double x);
Profile profile(const WindowSpec& w);
/// Smallest symmetric radius outside which ln|w| < peak - drop.
double effective_radius(const WindowSpec& w, double drop = 40.0);

/// (r, q) with |w(x)| <= C e^{-r <x>^q}, when the family has one.
struct DecayRate {
  double r;
  double q;
};
std::optional<DecayRate> subgaussian_rate(const WindowSpec& w);

struct DerivativeFit {
  /// smallest C >= 1 that fits every alpha <= alpha_max
  double C = 1.0;
  /// per-alpha constant; entry 0 is 1
  std::vector<double> C_alpha;
  bool feasible = true;
  /// worst finite-difference error relative to the bound
  double max_rel_error = 0.0;
};

/// |d^a e^{-r<x>^q}| <= C^a a! e^{-r<x>^q + <x>^{q-1}} on the grid.
DerivativeFit verify_subgauss_derivative_bound(const SubGaussianWindow& w, int alpha_max, const Grid1D& grid,
                                               double step = 0.05);

/// |d^a phi| <= C^a (a!)^{1+rho} exp(-tau e^{<x>^q}) on the grid.
DerivativeFit verify_doubleexp_derivative_bound(const DoubleExpWindow& w, double rho, double tau, int alpha_max,
                                                const Grid1D& grid, double step = 0.05);

struct SeminormEstimate {
  /// ln sup_{x, a} h^a e^{r' <x>^q} |d^a w(x)| / M_a
  double log_value = kNegInf;
  double value = 0.0;
  /// the sup is attained in the outer band of the grid
  bool tail_growing = false;
};

SeminormEstimate seminorm_estimate(const WindowSpec& w, const WeightSequence& seq, double r_prime, double q, double h,
                                   int alpha_max, const Grid1D& grid, double step = 0.05);

}  // namespace ultraloc
