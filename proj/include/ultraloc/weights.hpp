#pragma once

// Weight sequences M_p, their conditions (M.1)-(M.3), and the associated
// function M(rho) = sup_p ln(rho^p / M_p).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ultraloc/numerics.hpp"

namespace ultraloc {

/// Positive nondecreasing sequence r_1..r_P.
class RSequence {
 public:
  explicit RSequence(std::vector<double> r);
  static RSequence constant(double c, int p_max);
  /// r_p = p^power
  static RSequence power(double power, int p_max);

  std::span<const double> values() const { return r_; }
  int p_max() const { return static_cast<int>(r_.size()); }
  double operator[](int p) const { return r_[p - 1]; }
  /// r_P > r_1, the finite stand-in for r_p -> infinity.
  bool grows() const { return r_.back() > r_.front(); }

 private:
  std::vector<double> r_;
};

class WeightSequence {
 public:
  /// M_p = (p!)^sigma, tagged so that ln M_p is available in closed form
  /// for every p, not just on the prefix.
  static WeightSequence gevrey(double sigma, int p_max = 256);
  /// Untagged sequence from ln M_0..ln M_P; ln M_0 must be 0.
  static WeightSequence from_log_values(std::vector<double> log_values);

  int p_max() const { return static_cast<int>(log_values_.size()) - 1; }
  std::span<const double> log_values() const { return log_values_; }
  std::optional<double> gevrey_sigma() const { return sigma_; }
  /// ln M_p; beyond the prefix only for tagged sequences.
  double log_value(int p) const;
  double value(int p) const;
  /// ln m_p = ln M_p - ln M_{p-1}
  double log_m(int p) const { return log_value(p) - log_value(p - 1); }
  /// M_p * prod_{j<=p} r_j, untagged, truncated to the shorter prefix.
  WeightSequence scaled(const RSequence& rs) const;

 private:
  WeightSequence(std::vector<double> log_values, std::optional<double> sigma);
  std::vector<double> log_values_;
  std::optional<double> sigma_;
};

enum class Certificate {
  HoldsOnPrefix,
  FailsAt,
  CertifiedByFamily,
  FailsByFamily,
};

const char* to_string(Certificate c);

struct ConditionVerdict {
  Certificate kind = Certificate::HoldsOnPrefix;
  int fail_p = -1;
  /// false for prefix-only statements about infinite tails
  bool conclusive = true;

  bool holds() const { return kind == Certificate::HoldsOnPrefix || kind == Certificate::CertifiedByFamily; }
};

struct ConditionReport {
  ConditionVerdict m1;
  ConditionVerdict m2;
  ConditionVerdict m3_prime;
  ConditionVerdict m3;
  /// M_p^{1/p} increasing over the second half of the prefix
  ConditionVerdict divergence;
  double c0 = 1.0;
  double H = 1.0;
  /// constant in sum_{j>p} 1/m_j <= c0 p / m_{p+1}, fitted on the prefix
  double m3_constant = 0.0;
};

ConditionReport check_conditions(const WeightSequence& seq);

class AssociatedFunction {
 public:
  explicit AssociatedFunction(WeightSequence seq) : seq_(std::move(seq)) {}

  const WeightSequence& sequence() const { return seq_; }
  /// M(rho); M(0) = 0. Throws PrefixTooShort when the sup over an untagged
  /// prefix sits at p = P.
  double operator()(double rho) const;
  /// Index attaining the sup.
  long long argmax(double rho) const;

 private:
  WeightSequence seq_;
};

double assoc_eval(const AssociatedFunction& af, double rho);
/// M(lambda + rho) <= ln 2 + M(2 lambda) + M(2 rho)
bool assoc_subadd_check(const AssociatedFunction& af, double lambda, double rho);
/// Associated function of M_p prod_{j<=p} r_j.
double nrp_eval(const WeightSequence& seq, const RSequence& rs, double rho);

struct ExponentFit {
  /// M(rho) ~ A rho^k + B
  double k = 0.0;
  double A = 0.0;
  double B = 0.0;
  /// plain least-squares slope of ln M against ln rho
  double loglog_slope = 0.0;
};

ExponentFit assoc_exponent_fit(const AssociatedFunction& af, double rho_lo = 10.0, double rho_hi = 1e4,
                               int samples = 64);

struct GrowthReport {
  /// ln sup_x |f(x)| e^{-M(h|x|)}
  double log_sup = kNegInf;
  double sup = 0.0;
  bool bounded = true;
  TailVerdict tail;
};

/// Ultrapolynomial growth of class M_p on the grid: sup |f(x)| e^{-M(h|x|)}
/// with the outer-band monitor deciding bounded/unbounded-on-grid.
GrowthReport ultrapoly_growth_check(const SampledFunction& f, const WeightSequence& seq, double h);

}  // namespace ultraloc
