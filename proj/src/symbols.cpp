#include "ultraloc/symbols.hpp"

#include <cmath>
#include <cstdio>

namespace ultraloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

bool UltradiffOp::is_identity() const {
  if (coeffs.empty() || coeffs[0] != std::complex<double>(1.0)) return false;
  for (std::size_t k = 1; k < coeffs.size(); ++k)
    if (coeffs[k] != 0.0) return false;
  return true;
}

std::complex<double> UltradiffOp::symbol(std::complex<double> z) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

ClassBound class_bound_check(const UltradiffOp& op, const WeightSequence& seq) {
  ClassBound b;
  b.covered_order = op.order();
  b.C = std::max(1.0, op.coeffs.empty() ? 0.0 : std::abs(op.coeffs[0]));
  double log_l = kNegInf;
  for (int a = 1; a <= op.order(); ++a) {
    const double c = std::abs(op.coeffs[a]);
    if (c == 0.0) continue;
    log_l = std::max(log_l, (std::log(c) + seq.log_value(a) - std::log(b.C)) / a);
  }
  b.L = log_l == kNegInf ? 0.0 : std::exp(log_l);
  return b;
}

void validate(const TensorSymbol& a) {
  if (a.terms.empty()) throw Error(ErrorKind::InvalidParameter, "symbol has no terms");
  for (const auto& t : a.terms) {
    if (t.x_op.coeffs.empty() || t.xi_factor.op.coeffs.empty())
      throw Error(ErrorKind::InvalidParameter, "operator with no coefficients");
    if (t.x_op.order() > 8 || t.xi_factor.op.order() > 8)
      throw Error(ErrorKind::InvalidParameter, "ultradifferential truncation order exceeds 8");
    if (std::holds_alternative<SampledFactor>(t.x_factor) && !t.x_op.is_identity())
      throw Error(ErrorKind::InvalidParameter, "sampled x-factors only take the identity operator");
    if (std::holds_alternative<SampledFactor>(t.xi_factor.base) && !t.xi_factor.op.is_identity())
      throw Error(ErrorKind::InvalidParameter, "sampled xi-factors only take the identity operator");
    std::visit(overloaded{
                   [](const ConstantFactor&) {},
                   [](const GaussianFactor& g) {
                     if (!(g.a > 0.0)) throw Error(ErrorKind::InvalidParameter, "Gaussian factor needs a > 0");
                   },
                   [](const ExpPowerFactor& e) {
                     if (!(e.l > 0.0) || !(e.q >= 1.0))
                       throw Error(ErrorKind::InvalidParameter, "ExpPower factor needs l > 0 and q >= 1");
                   },
                   [](const DoubleExpGrowthFactor& d) {
                     if (!(d.l > 0.0) || !(d.q > 0.0))
                       throw Error(ErrorKind::InvalidParameter, "DoubleExpGrowth factor needs l > 0 and q > 0");
                   },
                   [](const SampledFactor&) {},
               },
               t.x_factor);
    if (const auto* g = std::get_if<GaussianFactor>(&t.xi_factor.base))
      if (!(g->a > 0.0)) throw Error(ErrorKind::InvalidParameter, "Gaussian xi-factor needs a > 0");
  }
}

std::string describe(const GrowthFactor& f) {
  return std::visit(overloaded{
                        [](const ConstantFactor& c) { return fmt("Constant(%g%+gi)", c.value.real(), c.value.imag()); },
                        [](const GaussianFactor& g) { return fmt("Gaussian(a=%g, center=%g)", g.a, g.center); },
                        [](const ExpPowerFactor& e) { return fmt("ExpPower(l=%g, q=%g)", e.l, e.q); },
                        [](const DoubleExpGrowthFactor& d) { return fmt("DoubleExpGrowth(l=%g, q=%g)", d.l, d.q); },
                        [](const SampledFactor& s) {
                          return "Sampled(n=" + std::to_string(s.samples.size()) + (s.envelope ? ", enveloped)" : ")");
                        },
                    },
                    f);
}

namespace {

LogComplex eval_gaussian(const GaussianFactor& g, double x) {
  const double u = x - g.center;
  return LogComplex::from_complex(g.amp).scaled(-kPi * g.a * u * u);
}

}  // namespace

LogComplex eval_factor(const GrowthFactor& f, double x) {
  return std::visit(overloaded{
                        [](const ConstantFactor& c) { return LogComplex::from_complex(c.value); },
                        [x](const GaussianFactor& g) { return eval_gaussian(g, x); },
                        [x](const ExpPowerFactor& e) { return LogComplex{e.l * std::pow(bracket(x), e.q), 0.0}; },
                        [x](const DoubleExpGrowthFactor& d) {
                          return LogComplex{std::exp(d.l * std::pow(bracket(x), d.q)), 0.0};
                        },
                        [x](const SampledFactor& s) { return interpolate_at(s.samples, x); },
                    },
                    f);
}

double log_slope(const GrowthFactor& f, double x) {
  return std::visit(overloaded{
                        [](const ConstantFactor&) { return 0.0; },
                        [x](const GaussianFactor& g) { return -2.0 * kPi * g.a * (x - g.center); },
                        [x](const ExpPowerFactor& e) { return e.l * e.q * std::pow(bracket(x), e.q - 2.0) * x; },
                        [x](const DoubleExpGrowthFactor& d) {
                          const double b = bracket(x);
                          return std::exp(d.l * std::pow(b, d.q)) * d.l * d.q * std::pow(b, d.q - 2.0) * x;
                        },
                        [](const SampledFactor&) { return 0.0; },
                    },
                    f);
}

LogComplex eval_base(const TemperedFactor& g, double xi) {
  return std::visit(overloaded{
                        [](const ConstantFactor& c) { return LogComplex::from_complex(c.value); },
                        [xi](const GaussianFactor& gf) { return eval_gaussian(gf, xi); },
                        [xi](const SampledFactor& s) { return interpolate_at(s.samples, xi); },
                    },
                    g.base);
}

LogComplex apply_op(const UltradiffOp& op, const std::function<LogComplex(double)>& f, double x, double slope) {
  if (op.is_identity()) return f(x);
  std::vector<LogComplex> terms;
  const double h0 = 0.05 / (1.0 + std::abs(slope));
  for (int a = 0; a <= op.order(); ++a) {
    if (op.coeffs[a] == 0.0) continue;
    const LogComplex d = a == 0 ? f(x) : finite_diff_log(f, x, a, h0 * std::max(1.0, 0.5 * a)).value;
    // D^a = (-i)^a d^a/dx^a
    const LogComplex c = LogComplex::from_complex(op.coeffs[a]) * LogComplex{0.0, -0.5 * kPi * a};
    terms.push_back(c * d);
  }
  return logc_sum(terms).value;
}

LogComplex eval_x_part(const SymbolTerm& t, double x) {
  auto f = [&](double u) { return eval_factor(t.x_factor, u); };
  return apply_op(t.x_op, f, x, log_slope(t.x_factor, x));
}

LogComplex eval_xi_part(const SymbolTerm& t, double xi) {
  auto g = [&](double u) { return eval_base(t.xi_factor, u); };
  double slope = 0.0;
  if (const auto* gf = std::get_if<GaussianFactor>(&t.xi_factor.base)) slope = -2.0 * kPi * gf->a * (xi - gf->center);
  return apply_op(t.xi_factor.op, g, xi, slope);
}

LogComplex symbol_eval(const TensorSymbol& a, double x, double xi) {
  std::vector<LogComplex> terms;
  terms.reserve(a.terms.size());
  for (const auto& t : a.terms) terms.push_back(eval_x_part(t, x) * eval_xi_part(t, xi));
  return logc_sum(terms).value;
}

const char* to_string(Admissibility a) {
  switch (a) {
    case Admissibility::Admissible: return "admissible";
    case Admissibility::NotAdmissible: return "not-admissible";
    case Admissibility::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

std::optional<Envelope> growth_class(const GrowthFactor& f) {
  if (const auto* e = std::get_if<ExpPowerFactor>(&f)) return *e;
  if (const auto* d = std::get_if<DoubleExpGrowthFactor>(&f)) return *d;
  if (const auto* s = std::get_if<SampledFactor>(&f)) return s->envelope;
  return std::nullopt;
}

bool bounded_factor(const GrowthFactor& f) {
  return std::holds_alternative<ConstantFactor>(f) || std::holds_alternative<GaussianFactor>(f);
}

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

}  // namespace

AdmissibilityVerdict admissibility(const TensorSymbol& a, const WindowSpec& w1, const WindowSpec& w2) {
  validate(a);
  const auto s1 = subgaussian_rate(w1);
  const auto s2 = subgaussian_rate(w2);
  const auto* d1 = std::get_if<DoubleExpWindow>(&w1);
  const auto* d2 = std::get_if<DoubleExpWindow>(&w2);

  AdmissibilityVerdict v;
  if (s1 && s2) {
    if (!same(s1->q, s2->q)) {
      v.reason = "windows decay with different exponents q";
      return v;
    }
    const double q = s1->q;
    const double r = std::min(s1->r, s2->r);
    v.threshold = 2.0 * r;
    for (const auto& t : a.terms) {
      if (bounded_factor(t.x_factor)) continue;
      const auto cls = growth_class(t.x_factor);
      if (!cls) {
        v.verdict = Admissibility::Unknown;
        v.reason = "sampled factor without a growth class";
        return v;
      }
      if (std::holds_alternative<DoubleExpGrowthFactor>(*cls)) {
        v.verdict = Admissibility::NotAdmissible;
        v.reason = "double-exponential growth against windows with decay e^{-r<x>^q}";
        return v;
      }
      const auto& e = std::get<ExpPowerFactor>(*cls);
      if (e.q < q && !same(e.q, q)) continue;
      if (e.q > q && !same(e.q, q)) {
        v.verdict = Admissibility::NotAdmissible;
        v.reason = fmt("growth exponent q=%g exceeds the window exponent q=%g", e.q, q);
        return v;
      }
      if (!(e.l < 2.0 * r)) {
        v.verdict = Admissibility::NotAdmissible;
        v.reason = fmt("l=%g violates l < 2r = %g", e.l, 2.0 * r);
        return v;
      }
    }
    v.verdict = Admissibility::Admissible;
    v.reason = fmt("all growth rates below 2r = %g (q=%g)", 2.0 * r, q);
    return v;
  }

  if (d1 && d2) {
    if (!same(d1->q, d2->q)) {
      v.reason = "double-exponential windows with different q";
      return v;
    }
    const double q = d1->q;
    v.threshold = 1.0;
    for (const auto& t : a.terms) {
      if (bounded_factor(t.x_factor)) continue;
      const auto cls = growth_class(t.x_factor);
      if (!cls) {
        v.verdict = Admissibility::Unknown;
        v.reason = "sampled factor without a growth class";
        return v;
      }
      if (std::holds_alternative<ExpPowerFactor>(*cls)) continue;
      const auto& d = std::get<DoubleExpGrowthFactor>(*cls);
      if (d.q < q && !same(d.q, q)) continue;
      if (d.q > q && !same(d.q, q)) {
        v.verdict = Admissibility::NotAdmissible;
        v.reason = fmt("growth exponent q=%g exceeds the window exponent q=%g", d.q, q);
        return v;
      }
      if (!(d.l < 1.0)) {
        v.verdict = Admissibility::NotAdmissible;
        v.reason = fmt("l=%g violates 0 < l < %g", d.l, 1.0);
        return v;
      }
    }
    v.verdict = Admissibility::Admissible;
    v.reason = fmt("all double-exponential rates below %g (q=%g)", 1.0, q);
    return v;
  }

  v.reason = "unsupported window pair (" + describe(w1) + ", " + describe(w2) + ")";
  return v;
}

GrowthCertificate growth_certificate(const GrowthFactor& f, const Grid1D& grid) {
  GrowthCertificate c;
  const auto cls = growth_class(f);
  if (!cls) {
    if (bounded_factor(f)) {
      for (std::size_t k = 0; k < grid.size(); ++k) c.log_constant = std::max(c.log_constant, eval_factor(f, grid[k]).logmag);
    } else {
      c.holds = false;
    }
    return c;
  }
  auto env = [&](double x) {
    return std::visit(overloaded{
                          [x](const ExpPowerFactor& e) { return e.l * std::pow(bracket(x), e.q); },
                          [x](const DoubleExpGrowthFactor& d) { return std::exp(d.l * std::pow(bracket(x), d.q)); },
                      },
                      *cls);
  };
  std::vector<double> r(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    r[k] = eval_factor(f, grid[k]).logmag - env(grid[k]);
    c.log_constant = std::max(c.log_constant, r[k]);
  }
  c.holds = std::isfinite(c.log_constant) && !tail_monitor(r, outer_band_mask(grid)).growing;
  return c;
}

bool is_mild(const TensorSymbol& a, const Grid1D& grid, const WeightSequence& seq, double h) {
  for (const auto& t : a.terms) {
    const auto f = SampledFunction::sample(grid, [&](double x) { return eval_x_part(t, x); });
    if (!ultrapoly_growth_check(f, seq, h).bounded) return false;
  }
  return true;
}

}  // namespace ultraloc
