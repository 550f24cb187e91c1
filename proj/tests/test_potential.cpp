#include <doctest.h>

#include <cmath>
#include <random>

#include "qplab/potential.hpp"

using namespace qplab;

TEST_SUITE("potential") {
  TEST_CASE("zero potential evaluates to zero") {
    auto p = AnalyticPotential::zero(1);
    double x[1] = {0.37};
    CHECK(p.eval(1.234, x) == 0.0);
    std::complex<double> xc[1] = {{0.2, 0.1}};
    CHECK(std::abs(p.eval_complex({0.5, 0.0}, xc)) == 0.0);
  }

  TEST_CASE("cosine model closed values") {
    auto p = AnalyticPotential::cosine_model(1.0);
    double x0[1] = {0.0};
    CHECK(p.eval(0.0, x0) == doctest::Approx(2.0).epsilon(1e-14));
    auto p2 = AnalyticPotential::cosine_model(2.0);
    double xh[1] = {0.5};
    CHECK(p2.eval(0.25, xh) == doctest::Approx(-4.0).epsilon(1e-12));
  }

  TEST_CASE("cosine model coefficient map") {
    auto p = AnalyticPotential::cosine_model(1.0);
    REQUIRE(p.coeffs().size() == 4);
    CHECK(p.coeffs().at(ModeIndex{1, {0}}).real() == doctest::Approx(0.5));
    CHECK(p.coeffs().at(ModeIndex{0, {-1}}).real() == doctest::Approx(0.5));
    auto p4 = AnalyticPotential::cosine_model(4.0);
    CHECK(p4.coeffs().at(ModeIndex{0, {1}}).real() == doctest::Approx(8.0));
    CHECK_THROWS_AS(AnalyticPotential::cosine_model(0.0), PreconditionError);
  }

  TEST_CASE("complex extension on the strip") {
    auto p = AnalyticPotential::cosine_model(1.0, 0.3);
    double eta = 0.05;
    std::complex<double> x[1] = {{0.0, eta}};
    std::complex<double> v = p.eval_complex({0.0, 0.0}, x);
    CHECK(v.real() == doctest::Approx(1.0 + std::cosh(kTwoPi * eta)).epsilon(1e-14));
    CHECK(std::abs(v.imag()) < 1e-14);
    std::complex<double> outside[1] = {{0.0, 0.4}};
    CHECK_THROWS_AS(p.eval_complex({0.0, 0.0}, outside), DomainError);
  }

  TEST_CASE("real evaluation equals complex path on real arguments") {
    auto p = AnalyticPotential::cosine_model(3.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      double t = 10.0 * u(rng) - 5.0, x = 10.0 * u(rng) - 5.0;
      double xv[1] = {x};
      std::complex<double> xc[1] = {{x, 0.0}};
      CHECK(p.eval(t, xv) == p.eval_complex({t, 0.0}, xc).real());
    }
  }

  TEST_CASE("conjugate symmetry keeps random trig polynomials real") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::map<ModeIndex, std::complex<double>> c;
    for (int m = -2; m <= 2; ++m)
      for (int k = -2; k <= 2; ++k) c[ModeIndex{m, {k}}] = std::complex<double>(u(rng), u(rng));
    AnalyticPotential p(c, 1, 0.2);
    for (int i = 0; i < 100; ++i) {
      double t = 3.0 * u(rng);
      std::complex<double> xc[1] = {{u(rng), 0.0}};
      CHECK(std::abs(p.eval_complex({t, 0.0}, xc).imag()) < 1e-12 * p.coefficient_mass());
    }
  }

  TEST_CASE("periodicity is bitwise for exactly representable shifts") {
    auto p = AnalyticPotential::cosine_model(2.5);
    for (double t : {0.25, 0.5, 0.125, 0.75}) {
      double x[1] = {0.375};
      CHECK(p.eval(t + 1.0, x) == p.eval(t, x));
      double xs[1] = {0.375 + 1.0};
      CHECK(p.eval(t, xs) == p.eval(t, x));
    }
  }

  TEST_CASE("strip sup bound is the coefficient-weighted exponential sum") {
    auto p = AnalyticPotential::cosine_model(1.0, 0.25);
    // four modes of amplitude 1/2, each with |m|+|k| = 1
    CHECK(p.strip_sup_bound() ==
          doctest::Approx(4 * 0.5 * std::exp(kTwoPi * 0.25)).epsilon(1e-14));
    CHECK(p.strip_sup_bound(0.0) == doctest::Approx(p.coefficient_mass()).epsilon(1e-14));
  }

  TEST_CASE("json round trip and preset loading") {
    auto p = AnalyticPotential::cosine_model(3.0, 0.125);
    AnalyticPotential q = AnalyticPotential::from_json(p.to_json());
    CHECK(q.dim_d() == 1);
    CHECK(q.strip_rho() == doctest::Approx(0.125));
    double x[1] = {0.3};
    CHECK(q.eval(0.7, x) == p.eval(0.7, x));
    CHECK(q.content_hash() == p.content_hash());
    auto preset = AnalyticPotential::load("cosine:3");
    CHECK(preset.eval(0.7, x) == doctest::Approx(p.eval(0.7, x)).epsilon(1e-14));
    CHECK_THROWS_AS(AnalyticPotential::load("/nonexistent/file.json"), ConfigError);
    CHECK_THROWS_AS(AnalyticPotential::from_json("{\"d\": 1}"), ConfigError);
  }
}
