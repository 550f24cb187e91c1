#include <doctest.h>

#include <cmath>

#include "qplab/green.hpp"
#include "qplab/lyapunov.hpp"

using namespace qplab;

namespace {
const std::vector<double> kTheta = {0.0};
const std::vector<double> kOmega = {0.61803398874989484820};
std::shared_ptr<const AnalyticPotential> zero_pot() {
  return std::make_shared<AnalyticPotential>(AnalyticPotential::zero(1));
}
std::shared_ptr<const AnalyticPotential> cosine(double K) {
  return std::make_shared<AnalyticPotential>(AnalyticPotential::cosine_model(K));
}
}  // namespace

TEST_SUITE("green") {
  TEST_CASE("free-particle closed form on [0,1], E = -1") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    GreenFunction g = build_green(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, -1.0, cfg, 16);
    // G(s,t) = sinh(min) sinh(max-1) / sinh(1)
    double expect = -std::sinh(0.5) * std::sinh(0.5) / std::sinh(1.0);
    CHECK(g.eval(0.5, 0.5).value == doctest::Approx(expect).epsilon(1e-10));
    CHECK(g.eval(0.5, 0.5).value == doctest::Approx(-0.23106).epsilon(1e-4));

    SUBCASE("boundary zeros are exact") {
      CHECK(g.eval(0.0, 0.5).value == 0.0);
      CHECK(g.eval(0.5, 1.0).value == 0.0);
    }
    SUBCASE("symmetry is bitwise") {
      GreenValue a = g.eval(0.3125, 0.6875), b = g.eval(0.6875, 0.3125);
      CHECK(a.value == b.value);
      CHECK(a.log_magnitude == b.log_magnitude);
    }
    SUBCASE("Wronskian triple identity") { CHECK(g.wronskian_identity_drift() <= 1e-10); }
  }

  TEST_CASE("partial derivative closed forms") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    GreenFunction g = build_green(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, -1.0, cfg, 16);
    // d_s G(0, t) = sinh(t-1)/sinh(1)
    CHECK(g.partial_s(0.0, 0.5).value ==
          doctest::Approx(std::sinh(-0.5) / std::sinh(1.0)).epsilon(1e-9));
    CHECK(std::abs(g.partial_s(0.0, 1.0).value) <= 1e-12);
    CHECK(g.partial_s(1.0, 0.5).value ==
          doctest::Approx(std::sinh(0.5) / std::sinh(1.0)).epsilon(1e-9));
    CHECK(g.partial_s(1.0, 0.5).value == doctest::Approx(0.44341).epsilon(1e-4));
  }

  TEST_CASE("finite differences confirm the s-derivative, cosine K = 2") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    auto p = cosine(2.0);
    GreenFunction g = build_green(p, Interval(0.0, 3.0), kTheta, kOmega, 0.5, cfg, 8);
    double h = 1e-5;
    for (double s : {0.7, 1.9}) {
      double t = 2.4;
      double fd = (g.eval(s + h, t).value - g.eval(s - h, t).value) / (2.0 * h);
      CHECK(g.partial_s(s, t).value == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("Poisson identity") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    SUBCASE("free particle with y = sinh") {
      auto p = zero_pot();
      // v-branch from -1 gives y(t) = sinh(t+1), a solution on a superset
      TransferSolution y = integrate_transfer(p, Interval(-1.0, 2.0), kTheta, kOmega, -1.0, cfg);
      double res = poisson_identity_check(p, Interval(0.0, 1.0), kTheta, kOmega, -1.0, y, 0.0,
                                          1.0, cfg);
      CHECK(res <= 1e-10);
    }
    SUBCASE("cosine model with the u branch") {
      auto p = cosine(2.0);
      TransferSolution y = integrate_transfer(p, Interval(-1.0, 7.0), kTheta, kOmega, 0.5, cfg);
      double res =
          poisson_identity_check(p, Interval(0.0, 6.0), kTheta, kOmega, 0.5, y, 1.0, 0.0, cfg);
      CHECK(res <= 1e-6);
    }
    SUBCASE("zero solution gives zero residual") {
      auto p = zero_pot();
      TransferSolution y = integrate_transfer(p, Interval(-1.0, 2.0), kTheta, kOmega, -1.0, cfg);
      double res = poisson_identity_check(p, Interval(0.0, 1.0), kTheta, kOmega, -1.0, y, 0.0,
                                          0.0, cfg);
      CHECK(res == 0.0);
    }
  }

  TEST_CASE("decay window: free particle case 1") {
    IntegratorConfig cfg;
    DecayWindow w = decay_window_search(zero_pot(), Interval(0.0, 10.0), kTheta, kOmega, -1.0,
                                        1.0, 1.0, 1.0, cfg, 8);
    CHECK(w.case_id == 1);
    CHECK(w.J.length() == doctest::Approx(10.0));
    CHECK(w.worst_margin >= 0.0);
  }

  TEST_CASE("decay window: cosine model typical phase") {
    IntegratorConfig cfg{1e-10, 1e-12, 1.0, 1.0};
    auto p = cosine(3.0);
    Interval I(0.0, 12.0);
    PhaseGrid grid{16, 1, {}};
    LyapunovEstimate L = finite_lyapunov(p, I, kOmega, 0.0, grid, {}, cfg);
    double K = std::pow(I.length(), 0.75) + 2.0;
    DecayWindow w =
        decay_window_search(p, I, kTheta, kOmega, 0.0, L.value, K, 0.5 * L.value, cfg, 8);
    CHECK(I.length() - w.J.length() <= 4.0 * K / (0.5 * L.value) + 1e-9);
    CHECK(w.worst_margin >= 0.0);
  }

  TEST_CASE("decay window: hypothesis failure raised when the norm is too small") {
    IntegratorConfig cfg;
    // Free particle in the rotation regime: log||M|| ~ 0 but demand a large bound.
    CHECK_THROWS_AS(decay_window_search(zero_pot(), Interval(0.0, 10.0), kTheta, kOmega, 1.0,
                                        1.0, 1.0, 1.0, cfg, 8),
                    HypothesisFailure);
  }

  TEST_CASE("near a Dirichlet eigenvalue the window shrinks away from case 1") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    auto p = zero_pot();
    Interval I(0.0, 10.0);
    // E slightly above a Dirichlet eigenvalue of the box: v_a(b) ~ 0. Locate
    // one by bisection on v_a(b;E) around E = (pi k / 10)^2, then ask for a
    // decay window at hyperbolic energy shifted to keep L positive: use the
    // closed form instead: at E = -1, v_a(b) = sinh(10) dominates, so force
    // the degenerate entry situation with E near (pi/10)^2 in the elliptic
    // regime and expect HypothesisFailure instead (no positive L). The
    // shrinking-case test therefore uses the cosine model at a resonant phase.
    auto pc = cosine(3.0);
    PhaseGrid grid{16, 1, {}};
    LyapunovEstimate L = finite_lyapunov(pc, I, kOmega, 0.0, grid, {}, cfg);
    // Bisect theta so that v_a(b) changes sign: at such theta, case != 1.
    double lo = 0.0, hi = 0.5;
    auto vab = [&](double th) {
      std::vector<double> t0 = {th};
      ScaledMatrix2 M = transfer_matrix(pc, I, t0, kOmega, 0.0, cfg);
      return M.m01;
    };
    bool bracket = vab(lo) * vab(hi) < 0;
    if (bracket) {
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (vab(lo) * vab(mid) <= 0 ? hi : lo) = mid;
      }
      std::vector<double> th_res = {0.5 * (lo + hi)};
      double K = std::pow(I.length(), 0.75) + 2.0;
      try {
        DecayWindow w = decay_window_search(pc, I, th_res, kOmega, 0.0, L.value, K,
                                            0.5 * L.value, cfg, 8);
        CHECK(w.case_id != 1);
        CHECK(I.length() - w.J.length() <= 4.0 * K / (0.5 * L.value) + 1e-9);
      } catch (const HypothesisFailure&) {
        // resonant phase fell inside the deviation set; precondition unmet
        CHECK(true);
      }
    }
  }

  TEST_CASE("localization control case: free particle on [0, pi]") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    LocalizationResult loc = localize_eigenfunction(
        zero_pot(), Interval(0.0, 3.14159265358979323846), kTheta, kOmega, {0.5, 1.5}, cfg, 32);
    CHECK(loc.E_star == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(loc.decay_rate) <= 0.05);  // sine profile: no decay
  }

  TEST_CASE("localization rejects a bracket without sign change") {
    IntegratorConfig cfg;
    CHECK_THROWS_AS(localize_eigenfunction(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega,
                                           {5.0, 6.0}, cfg, 8),
                    NoSignChange);
  }

  TEST_CASE("WronskianNearZero at a Dirichlet eigenvalue") {
    IntegratorConfig cfg{1e-11, 1e-13, 1.0, 1.0};
    // bisect the free-particle eigenvalue E = pi^2 on [0,1] and build there
    double lo = 9.5, hi = 10.2;
    auto vab = [&](double E) {
      ScaledMatrix2 M = transfer_matrix(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, E, cfg);
      return M.m01;
    };
    REQUIRE(vab(lo) * vab(hi) < 0);
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (vab(lo) * vab(mid) <= 0 ? hi : lo) = mid;
    }
    CHECK_THROWS_AS(
        build_green(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, 0.5 * (lo + hi), cfg, 8),
        WronskianNearZero);
  }
}
