#include "ultraloc/weights.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>

namespace ultraloc {

RSequence::RSequence(std::vector<double> r) : r_(std::move(r)) {
  if (r_.empty()) throw Error(ErrorKind::InvalidParameter, "r-sequence is empty");
  for (std::size_t p = 0; p < r_.size(); ++p) {
    if (!(r_[p] > 0.0)) throw Error(ErrorKind::InvalidParameter, "r-sequence entries must be positive");
    if (p > 0 && r_[p] < r_[p - 1]) throw Error(ErrorKind::InvalidParameter, "r-sequence must be nondecreasing");
  }
}

RSequence RSequence::constant(double c, int p_max) { return RSequence(std::vector<double>(p_max, c)); }

RSequence RSequence::power(double power, int p_max) {
  std::vector<double> r(p_max);
  for (int p = 1; p <= p_max; ++p) r[p - 1] = std::pow(static_cast<double>(p), power);
  return RSequence(std::move(r));
}

WeightSequence::WeightSequence(std::vector<double> log_values, std::optional<double> sigma)
    : log_values_(std::move(log_values)), sigma_(sigma) {}

WeightSequence WeightSequence::gevrey(double sigma, int p_max) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidParameter, "sigma must be positive");
  if (p_max < 16) throw Error(ErrorKind::InvalidParameter, "p_max must be at least 16");
  std::vector<double> lv(p_max + 1);
  for (int p = 0; p <= p_max; ++p) lv[p] = sigma * std::lgamma(p + 1.0);
  return WeightSequence(std::move(lv), sigma);
}

WeightSequence WeightSequence::from_log_values(std::vector<double> log_values) {
  if (log_values.size() < 17) throw Error(ErrorKind::InvalidParameter, "weight prefix needs p_max >= 16");
  if (log_values[0] != 0.0) throw Error(ErrorKind::InvalidParameter, "M_0 must equal 1");
  for (double v : log_values)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, "weights must be positive and finite");
  return WeightSequence(std::move(log_values), std::nullopt);
}

double WeightSequence::log_value(int p) const {
  if (p < 0) throw Error(ErrorKind::InvalidParameter, "negative index");
  if (p <= p_max()) return log_values_[p];
  if (sigma_) return *sigma_ * std::lgamma(p + 1.0);
  throw Error(ErrorKind::PrefixTooShort, "index " + std::to_string(p) + " beyond stored prefix");
}

double WeightSequence::value(int p) const { return std::exp(log_value(p)); }

WeightSequence WeightSequence::scaled(const RSequence& rs) const {
  const int n = std::min(p_max(), rs.p_max());
  std::vector<double> lv(n + 1);
  double acc = 0.0;
  lv[0] = 0.0;
  for (int p = 1; p <= n; ++p) {
    acc += std::log(rs[p]);
    lv[p] = log_values_[p] + acc;
  }
  return from_log_values(std::move(lv));
}

const char* to_string(Certificate c) {
  switch (c) {
    case Certificate::HoldsOnPrefix: return "holds-on-prefix";
    case Certificate::FailsAt: return "fails-at-p";
    case Certificate::CertifiedByFamily: return "certified-by-family";
    case Certificate::FailsByFamily: return "fails-by-family";
  }
  return "unknown";
}

namespace {

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ConditionReport check_conditions(const WeightSequence& seq) {
  ConditionReport rep;
  const auto L = seq.log_values();
  const int P = seq.p_max();
  const auto sigma = seq.gevrey_sigma();

  for (int p = 1; p < P; ++p) {
    if (2.0 * L[p] - L[p - 1] - L[p + 1] > 1e-12 * std::max(1.0, std::abs(L[p]))) {
      rep.m1 = {Certificate::FailsAt, p, true};
      break;
    }
  }
  if (sigma && rep.m1.holds()) rep.m1.kind = Certificate::CertifiedByFamily;

  double log_h = 0.0;
  for (int p = 1; p <= P; ++p) {
    double best = L[0] + L[p];
    for (int q = 1; q <= p; ++q) best = std::min(best, L[q] + L[p - q]);
    log_h = std::max(log_h, (L[p] - best) / p);
  }
  rep.H = std::exp(log_h);
  rep.c0 = 1.0;
  rep.m2 = sigma ? ConditionVerdict{Certificate::CertifiedByFamily, -1, true}
                 : ConditionVerdict{Certificate::HoldsOnPrefix, -1, false};

  // sum_{j=p+1}^{P} 1/m_j against p / m_{p+1}, p up to P/2 so the tail sum
  // is not dominated by the truncation.
  double m3c = 0.0;
  for (int p = 1; p <= P / 2; ++p) {
    double tail = 0.0;
    for (int j = p + 1; j <= P; ++j) tail += std::exp(-(L[j] - L[j - 1]));
    m3c = std::max(m3c, tail * std::exp(L[p + 1] - L[p]) / p);
  }
  rep.m3_constant = m3c;

  if (sigma) {
    const Certificate c = *sigma > 1.0 ? Certificate::CertifiedByFamily : Certificate::FailsByFamily;
    rep.m3_prime = {c, -1, true};
    rep.m3 = {c, -1, true};
    rep.divergence = {Certificate::CertifiedByFamily, -1, true};
    return rep;
  }

  std::vector<double> lp, lm;
  for (int p = P / 2; p <= P; ++p) {
    lp.push_back(std::log(static_cast<double>(p)));
    lm.push_back(L[p] - L[p - 1]);
  }
  const bool summable = ls_slope(lp, lm) > 1.0;
  rep.m3_prime = summable ? ConditionVerdict{Certificate::HoldsOnPrefix, -1, false}
                          : ConditionVerdict{Certificate::FailsAt, P, false};
  rep.m3 = rep.m3_prime;

  rep.divergence = {Certificate::HoldsOnPrefix, -1, false};
  for (int p = std::max(2, P / 2); p <= P; ++p) {
    if (L[p] / p <= L[p - 1] / (p - 1)) {
      rep.divergence = {Certificate::FailsAt, p, false};
      break;
    }
  }
  return rep;
}

long long AssociatedFunction::argmax(double rho) const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::InvalidParameter, "rho must be finite and >= 0");
  if (rho == 0.0) return 0;
  const double lr = std::log(rho);

  if (const auto sigma = seq_.gevrey_sigma()) {
    if (lr <= 0.0) return 0;
    const double guess = std::exp(lr / *sigma) - 0.5;
    if (guess > 1e15) throw Error(ErrorKind::InvalidParameter, "rho too large for the Gevrey evaluator");
    auto f = [&](double p) { return p * lr - *sigma * std::lgamma(p + 1.0); };
    double p = std::max(0.0, std::floor(guess));
    while (f(p + 1.0) > f(p)) p += 1.0;
    while (p > 0.0 && f(p - 1.0) >= f(p)) p -= 1.0;
    return static_cast<long long>(p);
  }

  const auto L = seq_.log_values();
  int best_p = 0;
  double best = 0.0;
  for (int p = 1; p <= seq_.p_max(); ++p) {
    const double v = p * lr - L[p];
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  if (best_p == seq_.p_max())
    throw Error(ErrorKind::PrefixTooShort, "sup at rho=" + std::to_string(rho) + " is attained at p = P = " +
                                               std::to_string(seq_.p_max()));
  return best_p;
}

double AssociatedFunction::operator()(double rho) const {
  const long long p = argmax(rho);
  if (p == 0) return 0.0;
  const double lr = std::log(rho);
  if (const auto sigma = seq_.gevrey_sigma()) {
    const double pd = static_cast<double>(p);
    return std::max(0.0, pd * lr - *sigma * std::lgamma(pd + 1.0));
  }
  return std::max(0.0, static_cast<double>(p) * lr - seq_.log_values()[p]);
}

double assoc_eval(const AssociatedFunction& af, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidParameter, "rho must be positive");
  return af(rho);
}

bool assoc_subadd_check(const AssociatedFunction& af, double lambda, double rho) {
  if (lambda < 0.0 || rho < 0.0) throw Error(ErrorKind::InvalidParameter, "lambda and rho must be >= 0");
  return af(lambda + rho) <= std::log(2.0) + af(2.0 * lambda) + af(2.0 * rho);
}

double nrp_eval(const WeightSequence& seq, const RSequence& rs, double rho) {
  return AssociatedFunction(seq.scaled(rs))(rho);
}

ExponentFit assoc_exponent_fit(const AssociatedFunction& af, double rho_lo, double rho_hi, int samples) {
  if (!(rho_lo > 0.0) || !(rho_hi > rho_lo) || samples < 4)
    throw Error(ErrorKind::InvalidParameter, "bad exponent-fit range");
  std::vector<double> rho(samples), m(samples), lr(samples), lm(samples);
  for (int i = 0; i < samples; ++i) {
    rho[i] = rho_lo * std::pow(rho_hi / rho_lo, static_cast<double>(i) / (samples - 1));
    m[i] = af(rho[i]);
    if (!(m[i] > 0.0)) throw Error(ErrorKind::InvalidParameter, "M vanishes inside the fit range");
    lr[i] = std::log(rho[i]);
    lm[i] = std::log(m[i]);
  }

  // For fixed k, (A, B) solve a weighted linear least-squares problem with
  // relative residuals; k is then found by a 1-D minimisation.
  auto solve = [&](double k, double& a, double& b) {
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0, ss = 0;
    for (int i = 0; i < samples; ++i) {
      const double w = 1.0 / (m[i] * m[i]);
      const double u = std::pow(rho[i], k);
      s11 += w * u * u;
      s12 += w * u;
      s22 += w;
      t1 += w * u * m[i];
      t2 += w * m[i];
    }
    const double det = s11 * s22 - s12 * s12;
    a = (t1 * s22 - t2 * s12) / det;
    b = (s11 * t2 - s12 * t1) / det;
    for (int i = 0; i < samples; ++i) {
      const double r = (a * std::pow(rho[i], k) + b - m[i]) / m[i];
      ss += r * r;
    }
    return ss;
  };
  double a = 0, b = 0;
  const auto best = boost::math::tools::brent_find_minima(
      [&](double k) { return solve(k, a, b); }, 0.01, 10.0, 40);

  ExponentFit fit;
  fit.k = best.first;
  solve(fit.k, fit.A, fit.B);
  fit.loglog_slope = ls_slope(lr, lm);
  return fit;
}

GrowthReport ultrapoly_growth_check(const SampledFunction& f, const WeightSequence& seq, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParameter, "h must be positive");
  const auto& g = f.grid1d();
  const AssociatedFunction af(seq);
  std::vector<double> ratio(g.size());
  GrowthReport rep;
  for (std::size_t k = 0; k < g.size(); ++k) {
    ratio[k] = f[k].is_zero() ? kNegInf : f[k].logmag - af(h * std::abs(g[k]));
    rep.log_sup = std::max(rep.log_sup, ratio[k]);
  }
  rep.sup = std::exp(rep.log_sup);
  rep.tail = tail_monitor(ratio, outer_band_mask(g));
  rep.bounded = !rep.tail.growing;
  return rep;
}

}  // namespace ultraloc
