#include <doctest.h>

#include "oracles/oracles.hpp"
#include "ultraloc/windows.hpp"

using namespace ultraloc;

TEST_CASE("window eval") {
  CHECK(eval(SubGaussianWindow{1.0, 1.0}, 0.0).logmag == doctest::Approx(-1.0));
  CHECK(eval(DoubleExpWindow{1.0, 1.0}, 0.0).logmag == doctest::Approx(-std::exp(1.0)));
  CHECK(eval(DoubleExpWindow{1.0, 1.0}, 5.0).logmag == doctest::Approx(-std::exp(std::sqrt(26.0))));
  // far tail: e^{-e^{<40>}} is ~ exp(-2.4e17), fine as a log
  CHECK(std::isfinite(eval(DoubleExpWindow{1.0, 1.0}, 40.0).logmag));

  const GaussianWindow g{1.0, 0.3, 0.2};
  for (double x : {-1.0, 0.0, 0.7}) {
    const auto v = eval(g, x).to_complex();
    CHECK(std::abs(v - oracle::gauss(x, 1.0, 0.3, 0.2)) < 1e-14);
  }

  CHECK_THROWS_AS(validate(SubGaussianWindow{1.0, 0.5}), Error);
  CHECK_THROWS_AS(validate(DoubleExpWindow{-1.0, 1.0}), Error);
  CHECK_THROWS_AS(validate(GaussianWindow{0.0}), Error);
  CHECK_NOTHROW(validate(DoubleExpWindow{1.0, 0.5}));
}

TEST_CASE("windows decrease in |x|") {
  const std::vector<WindowSpec> ws{SubGaussianWindow{1.0, 1.0}, SubGaussianWindow{0.5, 2.5}, DoubleExpWindow{1.0, 1.0},
                                   DoubleExpWindow{2.0, 0.5}};
  for (const auto& w : ws) {
    double prev = eval(w, 0.0).logmag;
    for (int k = 1; k <= 400; ++k) {
      const double x = 0.02 * k;
      const double v = eval(w, x).logmag;
      CHECK(v < prev);
      CHECK(eval(w, -x).logmag == v);
      prev = v;
    }
  }
}

TEST_CASE("effective radius") {
  for (const WindowSpec& w : std::vector<WindowSpec>{GaussianWindow{2.0}, SubGaussianWindow{1.0, 1.0},
                                                     DoubleExpWindow{1.0, 1.0}}) {
    const double r = effective_radius(w, 40.0);
    CHECK(eval(w, 0.0).logmag - eval(w, r).logmag == doctest::Approx(40.0));
  }
}

TEST_CASE("sub-Gaussian derivative bound") {
  const auto g = Grid1D::with_radius(6.0, 0.05);
  const auto f0 = verify_subgauss_derivative_bound({1.0, 1.0}, 0, g);
  CHECK(f0.C == 1.0);

  // |d e^{-<x>}| = |x|/<x> e^{-<x>} <= e^{-<x>}: C = 1 is consistent
  const auto f1 = verify_subgauss_derivative_bound({1.0, 1.0}, 1, g);
  CHECK(f1.C == doctest::Approx(1.0).epsilon(1e-6));
  for (double x : {-3.0, 0.5, 2.0}) {
    const double hand = std::abs(x) / bracket(x) * std::exp(-bracket(x));
    const auto d = finite_diff([](double t) { return std::complex<double>(std::exp(-bracket(t))); }, x, 1, 0.05);
    CHECK(std::abs(std::abs(d.value) - hand) < 1e-9);
    CHECK(hand <= std::exp(-bracket(x)));
  }

  const auto coarse = verify_subgauss_derivative_bound({2.0, 2.0}, 4, g, 0.05);
  const auto fine = verify_subgauss_derivative_bound({2.0, 2.0}, 4, Grid1D::with_radius(6.0, 0.025), 0.025);
  CHECK(coarse.feasible);
  CHECK(std::isfinite(coarse.C));
  CHECK(std::abs(fine.C / coarse.C - 1.0) < 0.05);
}

TEST_CASE("double-exponential derivative bound") {
  const auto g = Grid1D::with_radius(4.0, 0.02);
  const DoubleExpWindow w{1.0, 1.0};
  CHECK(verify_doubleexp_derivative_bound(w, 1.0, 0.5, 0, g).C == 1.0);

  const auto f = verify_doubleexp_derivative_bound(w, 1.0, 0.9, 3, g);
  CHECK(f.feasible);
  CHECK(std::isfinite(f.C));

  const auto loose = verify_doubleexp_derivative_bound(w, 1.0, 0.5, 3, g);
  const auto tight = verify_doubleexp_derivative_bound(w, 1.0, 0.999, 3, g);
  CHECK(tight.C > loose.C);

  const auto half = verify_doubleexp_derivative_bound(w, 1.0, 0.9, 3, g, 0.025);
  CHECK(std::abs(half.C / f.C - 1.0) < 0.05);
  CHECK_THROWS_AS(verify_doubleexp_derivative_bound(w, 1.0, 1.0, 3, g), Error);
}

TEST_CASE("seminorm estimate") {
  const auto gev = WeightSequence::gevrey(2.0);
  const auto g = Grid1D::with_radius(6.0, 0.05);
  const auto gs = seminorm_estimate(GaussianWindow{1.0}, gev, 0.1, 2.0, 0.1, 4, g);
  CHECK(std::isfinite(gs.value));
  CHECK_FALSE(gs.tail_growing);

  const SubGaussianWindow s{1.0, 1.0};
  const auto a0 = seminorm_estimate(s, gev, 0.5, 1.0, 3.0, 0, g);
  CHECK(a0.value == doctest::Approx(std::exp(-0.5)));

  double prev = kNegInf;
  for (double radius : {6.0, 12.0, 24.0}) {
    const auto e = seminorm_estimate(s, gev, 1.1, 1.0, 0.1, 2, Grid1D::with_radius(radius, 0.05));
    CHECK(e.tail_growing);
    CHECK(e.log_value > prev + 0.5);
    prev = e.log_value;
  }
}
