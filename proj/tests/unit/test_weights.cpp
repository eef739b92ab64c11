#include <doctest.h>

#include <random>

#include "oracles/oracles.hpp"
#include "ultraloc/weights.hpp"

using namespace ultraloc;

namespace {

std::vector<double> factorial_logs(int n, double power = 1.0) {
  std::vector<double> v(n + 1);
  for (int p = 0; p <= n; ++p) v[p] = power * std::lgamma(p + 1.0);
  return v;
}

}  // namespace

TEST_CASE("gevrey_sequence") {
  CHECK(WeightSequence::gevrey(1.0).value(3) == doctest::Approx(6.0));
  CHECK(WeightSequence::gevrey(2.0).value(2) == doctest::Approx(4.0));
  CHECK(WeightSequence::gevrey(0.5).value(4) == doctest::Approx(std::sqrt(24.0)).epsilon(1e-12));
  CHECK_THROWS_AS(WeightSequence::gevrey(0.0), Error);
  CHECK_THROWS_AS(WeightSequence::gevrey(-1.0), Error);
  CHECK_THROWS_AS(WeightSequence::gevrey(1.0, 8), Error);

  const auto s = WeightSequence::gevrey(1.5);
  CHECK(s.p_max() == 256);
  double fact = 1.0;
  for (int p = 1; p <= 170; ++p) {
    fact *= p;
    CHECK(std::abs(s.log_value(p) - 1.5 * std::log(fact)) <= 1e-12 * s.log_value(p));
  }
  // (256!)^2 is far outside double range; only the log is stored
  CHECK(WeightSequence::gevrey(2.0).log_value(256) == doctest::Approx(2.0 * std::lgamma(257.0)));
}

TEST_CASE("check_conditions on Gevrey sequences") {
  const auto r2 = check_conditions(WeightSequence::gevrey(2.0));
  CHECK(r2.m1.holds());
  CHECK(r2.m2.holds());
  CHECK(r2.m3_prime.holds());
  CHECK(r2.m3.holds());
  CHECK(r2.m3.kind == Certificate::CertifiedByFamily);

  const auto rh = check_conditions(WeightSequence::gevrey(0.5));
  CHECK(rh.m1.holds());
  CHECK(rh.m2.holds());
  CHECK_FALSE(rh.m3_prime.holds());

  const auto r1 = check_conditions(WeightSequence::gevrey(1.0));
  CHECK(r1.m3_prime.kind == Certificate::FailsByFamily);

  for (double sigma : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const auto r = check_conditions(WeightSequence::gevrey(sigma));
    CHECK(r.H <= std::pow(2.0, sigma) + 0.01);
    CHECK(r.H >= 1.0);
  }
}

TEST_CASE("check_conditions on untagged prefixes") {
  const auto fact2 = WeightSequence::from_log_values(factorial_logs(64, 2.0));
  const auto r = check_conditions(fact2);
  CHECK(r.m1.kind == Certificate::HoldsOnPrefix);
  CHECK_FALSE(r.m2.conclusive);
  CHECK(r.m3_prime.holds());
  CHECK_FALSE(r.m3_prime.conclusive);
  CHECK(r.divergence.holds());

  // p! with one log-concave kink
  auto bad = factorial_logs(32);
  bad[10] += 3.0;
  const auto rb = check_conditions(WeightSequence::from_log_values(bad));
  CHECK(rb.m1.kind == Certificate::FailsAt);
  CHECK(rb.m1.fail_p == 10);

  CHECK_THROWS_AS(WeightSequence::from_log_values(std::vector<double>(10, 0.0)), Error);
  auto shifted = factorial_logs(20);
  shifted[0] = 1.0;
  CHECK_THROWS_AS(WeightSequence::from_log_values(shifted), Error);
}

TEST_CASE("assoc_eval") {
  const AssociatedFunction fact(WeightSequence::gevrey(1.0));
  CHECK(assoc_eval(fact, 1.0) == 0.0);
  const auto brute = factorial_logs(200);
  const double ref_e = oracle::assoc_brute(brute, std::exp(1.0));
  CHECK(assoc_eval(fact, std::exp(1.0)) == doctest::Approx(ref_e).epsilon(1e-14));
  CHECK(ref_e == doctest::Approx(1.306853).epsilon(1e-6));
  CHECK(fact.argmax(std::exp(1.0)) == 2);

  // tagged and untagged evaluators agree with brute enumeration
  const AssociatedFunction untagged(WeightSequence::from_log_values(factorial_logs(200)));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 300; ++i) {
    const double rho = u(rng) + 1e-3;
    const double ref = oracle::assoc_brute(brute, rho);
    CHECK(fact(rho) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(untagged(rho) == doctest::Approx(ref).epsilon(1e-12));
  }

  CHECK_THROWS_AS(assoc_eval(fact, 0.0), Error);
  try {
    (void)untagged(500.0);
    FAIL("expected prefix-too-short");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrefixTooShort);
  }
}

TEST_CASE("assoc_eval is nondecreasing and vanishes below m_1") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const AssociatedFunction af(WeightSequence::gevrey(sigma));
    double prev = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double rho = 1e-3 * std::pow(1e7, i / 999.0);
      const double v = af(rho);
      CHECK(v >= prev);
      CHECK(v >= 0.0);
      if (rho <= 1.0) CHECK(v == 0.0);
      prev = v;
    }
  }
}

TEST_CASE("assoc exponent fit recovers 1/sigma") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const auto fit = assoc_exponent_fit(AssociatedFunction(WeightSequence::gevrey(sigma)));
    CHECK(std::abs(fit.k - 1.0 / sigma) <= 0.1 / sigma);
    CHECK(fit.A > 0.0);
  }
}

TEST_CASE("assoc_subadd_check") {
  const AssociatedFunction fact(WeightSequence::gevrey(1.0));
  CHECK(assoc_subadd_check(fact, 0.0, 0.0));
  CHECK(assoc_subadd_check(fact, 1.0, 1.0));
  // direct evaluation: M(2) <= ln 2 + 2 M(2)
  CHECK(fact(2.0) <= std::log(2.0) + 2.0 * fact(2.0));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (double sigma : {0.5, 1.0, 2.0}) {
    const AssociatedFunction af(WeightSequence::gevrey(sigma));
    for (int i = 0; i < 1000; ++i) CHECK(assoc_subadd_check(af, u(rng), u(rng)));
  }
}

TEST_CASE("nrp_eval") {
  const auto fact = WeightSequence::gevrey(1.0);
  const AssociatedFunction m(fact);
  const auto c3 = RSequence::constant(3.0, 256);
  for (double rho : {0.5, 2.0, 10.0, 100.0, 300.0}) CHECK(nrp_eval(fact, c3, rho) == doctest::Approx(m(rho / 3.0)));

  const auto lin = RSequence::power(1.0, 200);
  const double n_e = nrp_eval(fact, lin, std::exp(1.0));
  CHECK(n_e == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(n_e == doctest::Approx(oracle::assoc_brute(factorial_logs(200, 2.0), std::exp(1.0))).epsilon(1e-14));
  CHECK(lin.grows());
  CHECK_FALSE(c3.grows());
  CHECK_THROWS_AS(RSequence({2.0, 1.0}), Error);

  // e^{N(lambda)} e^{-M(h lambda)} -> 0: negative from some lambda_0 on
  const double h = 0.1;
  double lambda0 = -1.0;
  for (int i = 0; i <= 2000; ++i) {
    const double lambda = 0.5 * i;
    const bool neg = nrp_eval(fact, lin, lambda + 1e-12) - m(h * lambda + 1e-12) < 0.0;
    if (neg && lambda0 < 0.0) lambda0 = lambda;
    if (!neg) lambda0 = -1.0;
  }
  CHECK(lambda0 > 0.0);
  CHECK(lambda0 < 1000.0);
}

TEST_CASE("ultrapoly_growth_check") {
  const auto g = Grid1D::with_radius(6.0, 0.01);
  const auto fact = WeightSequence::gevrey(1.0);
  const AssociatedFunction m(fact);

  const auto one = SampledFunction::sample(g, [](double) { return LogComplex::one(); });
  const auto r1 = ultrapoly_growth_check(one, fact, 1.0);
  CHECK(r1.sup == doctest::Approx(1.0));
  CHECK(r1.bounded);

  const auto em = SampledFunction::sample(g, [&](double x) { return LogComplex{m(std::abs(x)), 0.0}; });
  const auto r2 = ultrapoly_growth_check(em, fact, 1.0);
  CHECK(r2.sup == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.bounded);

  const auto fact2 = WeightSequence::gevrey(2.0);
  for (double radius : {5.0, 8.0}) {
    const auto gr = Grid1D::with_radius(radius, 0.01);
    const auto dexp = SampledFunction::sample(gr, [](double x) { return LogComplex{std::exp(std::abs(x)), 0.0}; });
    for (double h : {0.1, 1.0, 10.0}) CHECK_FALSE(ultrapoly_growth_check(dexp, fact2, h).bounded);
  }
}
