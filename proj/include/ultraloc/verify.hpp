#pragma once

// Randomised property suites for the standalone inequalities, the divergent
// pairing sequence, and the admissibility threshold scan.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ultraloc/numerics.hpp"

namespace ultraloc {

struct PropertyReport {
  std::string id;
  std::size_t samples = 0;
  /// largest (lhs - rhs) / max(1, |rhs|) on the log or linear scale of the
  /// inequality; <= tolerance means no violation
  double max_violation = kNegInf;
  double tolerance = 1e-12;
  bool pass = true;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
  /// arguments of the worst sample
  std::vector<double> worst;
};

/// |x|^k1 |y|^k2 <= 2^{k1+k2} (|x - y/2|^{k1+k2} + |x + y/2|^{k1+k2}),
/// k1, k2 in 0..8, |x|, |y| <= 50.
PropertyReport check_product_split(std::size_t samples, std::uint64_t seed);
/// e^{-r<x-y/2>^q - r<x+y/2>^q} <= e^{-2r<x>^q}, q in [1, 3], r in [0, 5].
PropertyReport check_geometric_mean_decay(std::size_t samples, std::uint64_t seed);
/// s<x-y>^q <= s<x>^q + q 2^{q-1} |s| |y| (<x>^{q-1} + <y>^{q-1}),
/// s in [-5, 5] \ {0}, q in [1, 3].
PropertyReport check_peetre_type(std::size_t samples, std::uint64_t seed);
/// <x-y>^q <= <x>^q + <y>^q, q in [0, 1].
PropertyReport check_subadditive_bracket(std::size_t samples, std::uint64_t seed);

/// Plateau cutoff: indicator of [-1.5, 1.5] mollified by the bump
/// exp(1 - 1/(1 - (2t)^2)) normalised to unit mass; 1 on |x| <= 1, 0 on |x| >= 2.
double plateau_cutoff(double x);

struct DivergenceReport {
  double l = 0.0;
  double q = 1.0;
  /// ln I_n for n = 1..n_max
  std::vector<double> log_values;
  bool strictly_increasing = true;
  /// increments ln I_{n+1} - ln I_n increase with n
  bool superlinear = true;
  /// (ln I_N - ln I_{N-1}) / ((l/2)(2^{N+1} - 2^N)), near 1 for q = 1
  double last_ratio = 0.0;
};

/// I_n = int e^{(l/2)<x>^q} chi(x / 2^n) dx, n = 1..n_max.
DivergenceReport divergence_demo(double l, double q, int n_max = 8);

struct ScanEntry {
  double l = 0.0;
  bool divergent = false;
  /// outer-band max minus interior max of the y-integrand (log scale)
  double tail_excess = 0.0;
};

struct ThresholdScan {
  double r = 1.0;
  double q = 1.0;
  std::vector<ScanEntry> entries;
  /// largest finite l below the first divergent one, and that divergent l
  double last_finite = kNegInf;
  double first_divergent = std::numeric_limits<double>::infinity();
  /// finite below, divergent above, transition inside [2r - 0.2, 2r + 0.2]
  bool brackets = false;
};

/// Runs the y-tail probe at x = 0 for e^{l<x>^q} (x) e^{-pi xi^2} against a
/// SubGaussian(r, q) pair. Empty `ls` uses 2r + {-1, -.75, -.5, -.25, -.1, .1, .25, .5, 1}.
ThresholdScan threshold_scan(double r, double q, std::vector<double> ls = {}, double y_radius = 60.0,
                             double dy = 0.1);

}  // namespace ultraloc
