#pragma once

// Weyl quantisation, the convolution b = a * W(phi2, phi1), and the two
// evaluation routes for <A_a psi, theta>.

#include <optional>
#include <string>
#include <vector>

#include "ultraloc/numerics.hpp"
#include "ultraloc/symbols.hpp"
#include "ultraloc/tf.hpp"
#include "ultraloc/weights.hpp"
#include "ultraloc/windows.hpp"

namespace ultraloc {

struct GelfandFit {
  /// |b(x, xi)| <= C e^{N_{k_p}(|xi|)} on |x| <= radius
  double C = 0.0;
  int candidate = -1;
  bool feasible = false;
  /// |b(x, xi)| <= C e^{-M(c|xi|)}, the sharper decay form
  double decay_C = 0.0;
  double decay_c = 0.0;
  bool decay_feasible = false;
};

struct WeylSymbol {
  SampledFunction b;
  std::string provenance;
  bool truncation_warning = false;
  std::vector<std::string> warnings;
  std::optional<GelfandFit> gelfand;
};

struct ConvolutionPlan {
  /// grid for b; the y-quadrature uses the same spacing as b_grid.x
  PhaseGrid b_grid;
  /// 0 picks a radius from the growth/decay rates
  double y_radius = 0.0;
  double s_step_max = 0.05;
  /// s-region kept around the peak of |K_u(s) gt(s)|, in log units
  double drop = 45.0;
};

/// ln sup of the y-integrand at x against its interior: the divergence probe.
TailVerdict y_tail_probe(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, double x,
                         double y_radius, double dy);

/// b = a * W(phi2, phi1) sampled on plan.b_grid. Refuses inadmissible
/// symbols: DivergentIntegrand when the y-tail monitor sees growth,
/// NotAdmissible when only the threshold rule objects.
WeylSymbol convolve_symbol_wigner(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2,
                                  const ConvolutionPlan& plan);

/// k_p candidates ordered from slowest to fastest growth; the first feasible
/// one is reported. Decay candidates c are tried from largest to smallest.
GelfandFit gelfand_bound_fit(const WeylSymbol& b, const WeightSequence& seq, double x_radius,
                             const std::vector<RSequence>& candidates, std::vector<double> decay_candidates = {},
                             double c_max = 1e6);

struct PairingResult {
  LogComplex value;
  std::string route;
  /// damping parameters when the xi-integral needed regularisation
  std::vector<double> epsilons;
  double spread = 0.0;
  bool truncation_warning = false;
  std::vector<std::string> warnings;
};

/// <b^w psi, theta> = iiint e^{2 pi i (x-y) xi} b((x+y)/2, xi) theta(x) psi(y).
/// x and y run over every other point of b's x-grid so that (x+y)/2 lands
/// on it. Gaussian damping with extrapolation when b does not decay in xi.
PairingResult weyl_pair(const WeylSymbol& b, const Profile& psi, const Profile& theta);

struct LocopPlan {
  /// signal grid for psi, theta and the phase grid of the direct route
  TFPlan tf;
  /// convolution route
  ConvolutionPlan conv;
  /// growth class used for the mild-mode check
  double mild_sigma = 2.0;
  double mild_h = 0.1;
};

/// <A_a psi, theta> = <a, V_{phi1} psi conj(V_{phi2} conj(theta))>; mild
/// symbols only (NotMild otherwise).
PairingResult locop_direct(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                           const Profile& theta, const LocopPlan& plan);

/// weyl_pair(convolve_symbol_wigner(a, w1, w2), psi, theta)
PairingResult locop_via_weyl(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                             const Profile& theta, const LocopPlan& plan);

/// A_a psi = V*_{phi2}(a V_{phi1} psi) on the signal grid, mild mode only.
LineResult locop_apply(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2, const Profile& psi,
                       const LocopPlan& plan);

}  // namespace ultraloc
