#include "ultraloc/verify.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "ultraloc/quantize.hpp"
#include "ultraloc/symbols.hpp"

namespace ultraloc {

namespace {

// Uniform [0, 1) from the top 53 bits, identical across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

double scaled_gap(double lhs, double rhs) {
  if (lhs == kNegInf) return kNegInf;
  return (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

double logsumexp(double a, double b) {
  const double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// k ln|v| with 0^0 = 1
double klog(int k, double v) { return k == 0 ? 0.0 : k * std::log(std::abs(v)); }

template <std::size_t N>
PropertyReport sweep(const char* id, std::size_t samples, std::uint64_t seed,
                     const std::function<std::array<double, N>(std::mt19937_64&)>& draw,
                     const std::function<double(const std::array<double, N>&)>& gap,
                     std::vector<std::pair<std::string, double>> params) {
  std::mt19937_64 rng(seed);
  std::vector<std::array<double, N>> xs(samples);
  for (auto& x : xs) x = draw(rng);
  std::vector<double> g(samples);
  parallel_for(samples, [&](std::size_t i) { g[i] = gap(xs[i]); });

  PropertyReport r;
  r.id = id;
  r.samples = samples;
  r.seed = seed;
  r.parameters = std::move(params);
  std::size_t worst = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    if (g[i] > r.max_violation) r.max_violation = g[i], worst = i;
  }
  if (samples) r.worst.assign(xs[worst].begin(), xs[worst].end());
  r.pass = !(r.max_violation > r.tolerance);
  return r;
}

}  // namespace

PropertyReport check_product_split(std::size_t samples, std::uint64_t seed) {
  return sweep<4>(
      "product-split", samples, seed,
      [](std::mt19937_64& rng) {
        const double x = uniform(rng, -50, 50), y = uniform(rng, -50, 50);
        const double k1 = static_cast<double>(rng() % 9), k2 = static_cast<double>(rng() % 9);
        return std::array<double, 4>{x, y, k1, k2};
      },
      [](const std::array<double, 4>& s) {
        const double x = s[0], y = s[1];
        const int k1 = static_cast<int>(s[2]), k2 = static_cast<int>(s[3]), k = k1 + k2;
        const double lhs = klog(k1, x) + klog(k2, y);
        const double rhs = k * std::log(2.0) + logsumexp(klog(k, x - 0.5 * y), klog(k, x + 0.5 * y));
        return scaled_gap(lhs, rhs);
      },
      {{"k_max", 8}, {"box", 50}});
}

PropertyReport check_geometric_mean_decay(std::size_t samples, std::uint64_t seed) {
  return sweep<4>(
      "geometric-mean-decay", samples, seed,
      [](std::mt19937_64& rng) {
        return std::array<double, 4>{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, 1, 3),
                                     uniform(rng, 0, 5)};
      },
      [](const std::array<double, 4>& s) {
        const double x = s[0], y = s[1], q = s[2], r = s[3];
        const double lhs = -r * std::pow(bracket(x - 0.5 * y), q) - r * std::pow(bracket(x + 0.5 * y), q);
        const double rhs = -2.0 * r * std::pow(bracket(x), q);
        return scaled_gap(lhs, rhs);
      },
      {{"q_lo", 1}, {"q_hi", 3}, {"r_hi", 5}, {"box", 50}});
}

PropertyReport check_peetre_type(std::size_t samples, std::uint64_t seed) {
  return sweep<4>(
      "peetre-type", samples, seed,
      [](std::mt19937_64& rng) {
        double s = 0.0;
        while (s == 0.0) s = uniform(rng, -5, 5);
        return std::array<double, 4>{uniform(rng, -50, 50), uniform(rng, -50, 50), s, uniform(rng, 1, 3)};
      },
      [](const std::array<double, 4>& v) {
        const double x = v[0], y = v[1], s = v[2], q = v[3];
        const double c = q * std::pow(2.0, q - 1.0) * std::abs(s) * std::abs(y);
        const double lhs = s * std::pow(bracket(x - y), q);
        const double rhs =
            s * std::pow(bracket(x), q) + c * std::pow(bracket(x), q - 1.0) + c * std::pow(bracket(y), q - 1.0);
        return scaled_gap(lhs, rhs);
      },
      {{"s_box", 5}, {"q_lo", 1}, {"q_hi", 3}, {"box", 50}});
}

PropertyReport check_subadditive_bracket(std::size_t samples, std::uint64_t seed) {
  return sweep<3>(
      "subadditive-bracket", samples, seed,
      [](std::mt19937_64& rng) {
        return std::array<double, 3>{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, 0, 1)};
      },
      [](const std::array<double, 3>& v) {
        const double x = v[0], y = v[1], q = v[2];
        return scaled_gap(std::pow(bracket(x - y), q), std::pow(bracket(x), q) + std::pow(bracket(y), q));
      },
      {{"q_lo", 0}, {"q_hi", 1}, {"box", 50}});
}

namespace {

double bump(double t) {
  const double u = 2.0 * t;
  return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
}

// Cumulative bump mass at 1024 panel edges; a point inside a panel adds one
// fixed Gauss-Legendre panel, exact to roundoff for this smooth integrand.
class BumpCdf {
 public:
  BumpCdf() : edges_(kPanels + 1, 0.0) {
    for (int k = 0; k < kPanels; ++k) edges_[k + 1] = edges_[k] + GL::integrate(bump, left(k), left(k + 1));
    mass_ = edges_.back();
  }
  double operator()(double v) const {
    if (v <= -0.5) return 0.0;
    if (v >= 0.5) return 1.0;
    const int k = std::min(kPanels - 1, static_cast<int>((v + 0.5) * kPanels));
    return (edges_[k] + GL::integrate(bump, left(k), v)) / mass_;
  }

 private:
  using GL = boost::math::quadrature::gauss<double, 20>;
  static constexpr int kPanels = 1024;
  static double left(int k) { return -0.5 + static_cast<double>(k) / kPanels; }
  std::vector<double> edges_;
  double mass_ = 1.0;
};

double bump_cdf(double v) {
  static const BumpCdf cdf;
  return cdf(v);
}

}  // namespace

double plateau_cutoff(double x) {
  // int_{-1.5}^{1.5} beta(x - t) dt
  return bump_cdf(x + 1.5) - bump_cdf(x - 1.5);
}

DivergenceReport divergence_demo(double l, double q, int n_max) {
  if (!(l > 0.0) || !(q >= 1.0) || n_max < 2)
    throw Error(ErrorKind::InvalidParameter, "divergence_demo needs l > 0, q >= 1, n_max >= 2");
  DivergenceReport r;
  r.l = l;
  r.q = q;
  for (int n = 1; n <= n_max; ++n) {
    const double scale = std::ldexp(1.0, n);
    const auto grid = Grid1D::with_radius(2.0 * scale, 2.0 * scale / 2000.0);
    const auto f = SampledFunction::sample(grid, [&](double x) {
      const double c = plateau_cutoff(x / scale);
      return c > 0.0 ? LogComplex{0.5 * l * std::pow(bracket(x), q) + std::log(c), 0.0} : LogComplex::zero();
    });
    r.log_values.push_back(quad(f).value.logmag);
  }
  for (std::size_t k = 1; k < r.log_values.size(); ++k) {
    if (!(r.log_values[k] > r.log_values[k - 1])) r.strictly_increasing = false;
    if (k >= 2 && !(r.log_values[k] - r.log_values[k - 1] > r.log_values[k - 1] - r.log_values[k - 2]))
      r.superlinear = false;
  }
  const double N = std::ldexp(1.0, n_max);
  r.last_ratio = (r.log_values[n_max - 1] - r.log_values[n_max - 2]) / (0.5 * l * N);
  return r;
}

ThresholdScan threshold_scan(double r, double q, std::vector<double> ls, double y_radius, double dy) {
  if (ls.empty())
    for (double d : {-1.0, -0.75, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 1.0}) ls.push_back(2.0 * r + d);
  std::sort(ls.begin(), ls.end());
  ThresholdScan s;
  s.r = r;
  s.q = q;
  const SubGaussianWindow w{r, q};
  for (double l : ls) {
    if (!(l > 0.0)) continue;
    const TensorSymbol a{{SymbolTerm{{}, ExpPowerFactor{l, q}, TemperedFactor{GaussianFactor{1.0}, {}}}}};
    const auto v = y_tail_probe(a, w, w, 0.0, y_radius, dy);
    s.entries.push_back({l, v.growing, v.outer_max - v.inner_max});
  }
  bool monotone = true, seen_div = false;
  for (const auto& e : s.entries) {
    if (e.divergent) {
      if (!seen_div) s.first_divergent = e.l;
      seen_div = true;
    } else {
      if (seen_div) monotone = false;
      s.last_finite = e.l;
    }
  }
  s.brackets = monotone && seen_div && s.last_finite >= 2.0 * r - 0.2 && s.first_divergent <= 2.0 * r + 0.2;
  return s;
}

}  // namespace ultraloc
