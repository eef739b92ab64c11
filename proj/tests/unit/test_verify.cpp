#include <doctest.h>

#include "oracles/oracles.hpp"
#include "ultraloc/verify.hpp"

using namespace ultraloc;

namespace {

double jb(double x) { return std::sqrt(1.0 + x * x); }

double bump_mass() {
  static const double m = oracle::integrate(
      [](double t) { return std::abs(2 * t) < 1 ? std::exp(1 - 1 / (1 - 4 * t * t)) : 0.0; }, -0.5, 0.5);
  return m;
}

// indicator of [-1.5, 1.5] against the normalised bump, by direct quadrature
double plateau_oracle(double x) {
  const double lo = std::max(-1.5, x - 0.5), hi = std::min(1.5, x + 0.5);
  if (lo >= hi) return 0.0;
  auto f = [&](double t) {
    const double u = 2 * (x - t);
    return std::abs(u) < 1 ? std::exp(1 - 1 / (1 - u * u)) : 0.0;
  };
  return oracle::integrate(f, lo, hi) / bump_mass();
}

}  // namespace

TEST_CASE("inequality examples by hand") {
  // x = y = 1, k1 = k2 = 1: 1 <= 4 ((1/2)^2 + (3/2)^2) = 10
  CHECK(4.0 * (0.25 + 2.25) == doctest::Approx(10.0));
  // q = 1, r = 1, x = 0, y = 2: e^{-2 sqrt2} <= e^{-2}
  CHECK(-2.0 * jb(1.0) < -2.0 * jb(0.0));
  // s = 1, q = 1, x = 0, y = 1: sqrt2 <= 1 + 1 + sqrt2
  CHECK(jb(-1.0) <= jb(0.0) + 1.0 + jb(1.0));
  // q = 0: 1 <= 2
  CHECK(std::pow(jb(3.0), 0.0) <= std::pow(jb(1.0), 0.0) + std::pow(jb(-2.0), 0.0));
}

TEST_CASE("inequality suites at 10^4 samples") {
  const std::uint64_t seed = 20261015;
  for (const auto& r : {check_product_split(10000, seed), check_geometric_mean_decay(10000, seed),
                        check_peetre_type(10000, seed), check_subadditive_bracket(10000, seed)}) {
    INFO(r.id);
    CHECK(r.pass);
    CHECK(r.samples == 10000);
    CHECK(r.seed == seed);
    CHECK(r.max_violation <= 1e-12);
    CHECK(!r.worst.empty());
    CHECK(!r.parameters.empty());
  }
}

TEST_CASE("suite reports reproduce under a fixed seed") {
  for (int pass = 0; pass < 2; ++pass) {
    const std::uint64_t seed = pass ? 7 : 123456789;
    const auto a = check_peetre_type(2000, seed), b = check_peetre_type(2000, seed);
    CHECK(a.max_violation == b.max_violation);
    CHECK(a.worst == b.worst);
    const auto c = check_product_split(2000, seed), d = check_product_split(2000, seed);
    CHECK(c.max_violation == d.max_violation);
    CHECK(c.worst == d.worst);
  }
  CHECK(check_geometric_mean_decay(500, 1).worst != check_geometric_mean_decay(500, 2).worst);
}

TEST_CASE("plateau cutoff") {
  for (double x = -1.0; x <= 1.0; x += 0.125) CHECK(plateau_cutoff(x) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : {-5.0, -2.0, 2.0, 2.5, 7.0}) CHECK(plateau_cutoff(x) == 0.0);
  for (double x : {-1.9, -1.6, -1.5, -1.3, 1.05, 1.2, 1.5, 1.77, 1.99}) {
    INFO(x);
    CHECK(std::abs(plateau_cutoff(x) - plateau_oracle(x)) <= 1e-12);
  }
  CHECK(plateau_cutoff(1.5) == doctest::Approx(0.5).epsilon(1e-13));
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    const double c = plateau_cutoff(x);
    CHECK(c <= prev + 1e-15);
    CHECK(c >= 0.0);
    prev = c;
  }
}

TEST_CASE("divergent pairing sequence") {
  const auto r = divergence_demo(1.0, 1.0, 8);
  REQUIRE(r.log_values.size() == 8);
  CHECK(r.strictly_increasing);
  CHECK(r.superlinear);
  // Laplace: ln I_{N} - ln I_{N-1} ~ (l/2)(2^{N+1} - 2^N) for q = 1
  CHECK(r.last_ratio == doctest::Approx(1.0).epsilon(0.05));

  for (int n : {1, 2}) {
    const double s = std::ldexp(1.0, n);
    double direct = 0.0;
    for (double a : {-2.0, -1.5, -1.0, 1.0, 1.5})
      direct += oracle::integrate([&](double x) { return std::exp(0.5 * jb(x)) * plateau_oracle(x / s); }, a * s,
                                  (a == -1.0 ? 1.0 : a + 0.5) * s);
    INFO(n);
    CHECK(r.log_values[n - 1] == doctest::Approx(std::log(direct)).epsilon(1e-9));
  }

  const auto small = divergence_demo(1e-6, 1.0, 8);
  for (int n = 1; n <= 8; ++n) CHECK(std::exp(small.log_values[n - 1]) == doctest::Approx(3.0 * std::ldexp(1.0, n)).epsilon(0.01));

  const auto q2 = divergence_demo(0.5, 2.0, 6);
  CHECK(q2.strictly_increasing);
  CHECK(q2.superlinear);

  CHECK_THROWS_AS(divergence_demo(0.0, 1.0), Error);
  CHECK_THROWS_AS(divergence_demo(1.0, 0.5), Error);
}

TEST_CASE("threshold scan") {
  const auto s = threshold_scan(1.0, 1.0);
  CHECK(s.entries.size() == 9);
  CHECK(s.brackets);
  CHECK(s.last_finite >= 1.8);
  CHECK(s.first_divergent <= 2.2);

  const auto one = threshold_scan(1.0, 1.0, {1.0, 2.5});
  REQUIRE(one.entries.size() == 2);
  CHECK(!one.entries[0].divergent);
  CHECK(one.entries[1].divergent);

  CHECK(threshold_scan(0.5, 1.0).brackets);
  CHECK(threshold_scan(1.0, 2.0).brackets);
}
