#pragma once

// Tensor-sum symbols a(x, xi) = sum_j (P_j(D_x) f_j)(x) g_j(xi) with
// g_j = Pt_j(D_xi) gt_j, and their admissibility against a window pair.

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ultraloc/numerics.hpp"
#include "ultraloc/weights.hpp"
#include "ultraloc/windows.hpp"

namespace ultraloc {

/// sum_{a <= N} c_a D^a with D = -i d/dx, N <= 8.
struct UltradiffOp {
  std::vector<std::complex<double>> coeffs{1.0};

  static UltradiffOp identity() { return {}; }
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_identity() const;
  /// P(z) = sum c_a z^a
  std::complex<double> symbol(std::complex<double> z) const;
};

struct ClassBound {
  double C = 1.0;
  /// 0 when only c_0 is nonzero (any L fits)
  double L = 0.0;
  /// the certificate covers orders 0..covered_order only
  int covered_order = 0;
};

/// |c_a| <= C L^a / M_a on the stored range, C = max(1, |c_0|), L minimal.
ClassBound class_bound_check(const UltradiffOp& op, const WeightSequence& seq);

struct ConstantFactor {
  std::complex<double> value = 1.0;
};

/// amp e^{-pi a (x - center)^2}
struct GaussianFactor {
  double a = 1.0;
  double center = 0.0;
  std::complex<double> amp = 1.0;
};

/// e^{l <x>^q}
struct ExpPowerFactor {
  double l = 1.0;
  double q = 1.0;
};

/// exp(e^{l <x>^q})
struct DoubleExpGrowthFactor {
  double l = 0.5;
  double q = 1.0;
};

using Envelope = std::variant<ExpPowerFactor, DoubleExpGrowthFactor>;

/// Samples with an optional growth class; zero outside the grid.
struct SampledFactor {
  SampledFunction samples;
  std::optional<Envelope> envelope;
};

using GrowthFactor = std::variant<ConstantFactor, GaussianFactor, ExpPowerFactor, DoubleExpGrowthFactor, SampledFactor>;

/// g = op(D) base, base of ultrapolynomial growth.
struct TemperedFactor {
  std::variant<ConstantFactor, GaussianFactor, SampledFactor> base = ConstantFactor{};
  UltradiffOp op;
};

struct SymbolTerm {
  UltradiffOp x_op;
  GrowthFactor x_factor = ConstantFactor{};
  TemperedFactor xi_factor;
};

struct TensorSymbol {
  std::vector<SymbolTerm> terms;
};

/// Throws InvalidParameter on malformed terms (empty symbol, order > 8,
/// differentiated sampled factors, out-of-range growth parameters).
void validate(const TensorSymbol& a);

std::string describe(const GrowthFactor& f);

LogComplex eval_factor(const GrowthFactor& f, double x);
LogComplex eval_base(const TemperedFactor& g, double xi);
/// (P(D) f)(x), by finite differences for P != identity.
LogComplex apply_op(const UltradiffOp& op, const std::function<LogComplex(double)>& f, double x, double slope);
LogComplex eval_x_part(const SymbolTerm& t, double x);
LogComplex eval_xi_part(const SymbolTerm& t, double xi);
LogComplex symbol_eval(const TensorSymbol& a, double x, double xi);

/// d/dx ln|f| for closed forms (step control), 0 for samples.
double log_slope(const GrowthFactor& f, double x);

enum class Admissibility { Admissible, NotAdmissible, Unknown };
const char* to_string(Admissibility a);

struct AdmissibilityVerdict {
  Admissibility verdict = Admissibility::Unknown;
  std::string reason;
  /// the threshold compared against (2r or 1), NaN when not applicable
  double threshold = std::numeric_limits<double>::quiet_NaN();
};

AdmissibilityVerdict admissibility(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2);

struct GrowthCertificate {
  /// sup_x ln|f(x)| - ln envelope(x) on the grid
  double log_constant = kNegInf;
  bool holds = true;
};

/// Checks |f| <= C envelope on the grid for factors with a growth class.
GrowthCertificate growth_certificate(const GrowthFactor& f, const Grid1D& grid);

/// Every x-part has ultrapolynomial growth on the grid: sup |f| e^{-M(h|x|)}
/// bounded with the outer-band monitor, for the given sequence and h.
bool is_mild(const TensorSymbol& a, const Grid1D& grid, const WeightSequence& seq, double h);

}  // namespace ultraloc
