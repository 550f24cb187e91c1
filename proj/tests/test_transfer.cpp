#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qplab/transfer.hpp"

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

double entry_err(const ScaledMatrix2& M, double m00, double m01, double m10, double m11) {
  double s = std::exp(M.log_scale);
  return std::max({std::abs(M.m00 * s - m00), std::abs(M.m01 * s - m01),
                   std::abs(M.m10 * s - m10), std::abs(M.m11 * s - m11)});
}
}  // namespace

TEST_SUITE("transfer") {
  TEST_CASE("free particle rotation, E = 1 on [0, pi/2]") {
    IntegratorConfig cfg;
    ScaledMatrix2 M = transfer_matrix(zero_pot(), Interval(0.0, 1.5707963267948966), kTheta,
                                      kOmega, 1.0, cfg);
    CHECK(entry_err(M, 0.0, 1.0, -1.0, 0.0) <= 1e-8);
  }

  TEST_CASE("free particle hyperbolic, E = -1 on [0, 1]") {
    IntegratorConfig cfg;
    ScaledMatrix2 M = transfer_matrix(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, -1.0, cfg);
    CHECK(entry_err(M, std::cosh(1.0), std::sinh(1.0), std::sinh(1.0), std::cosh(1.0)) <= 1e-8);
  }

  TEST_CASE("cosine model agrees with the fixed-step RK4 oracle") {
    IntegratorConfig cfg;
    auto p = cosine(2.0);
    Interval I(0.0, 10.0);
    TransferSolution sol = integrate_transfer(p, I, kTheta, kOmega, 0.0, cfg);
    ScaledMatrix2 M = sol.final_matrix();
    oracle::Mat2 R = oracle::rk4_transfer(*p, 0.0, 10.0, kTheta, kOmega, 0.0, 1e-4);
    double s = std::exp(M.log_scale - R.log_scale);
    double scale = std::max({std::abs(R.m00), std::abs(R.m01), std::abs(R.m10), std::abs(R.m11)});
    CHECK(std::abs(M.m00 * s - R.m00) / scale <= 1e-6);
    CHECK(std::abs(M.m01 * s - R.m01) / scale <= 1e-6);
    CHECK(std::abs(M.m10 * s - R.m10) / scale <= 1e-6);
    CHECK(std::abs(M.m11 * s - R.m11) / scale <= 1e-6);
    CHECK(std::abs(sol.det_drift()) <= 1e-8);
  }

  TEST_CASE("hyperbolic growth rate at E = -4 over [0, 20]") {
    IntegratorConfig cfg;
    ScaledMatrix2 M = transfer_matrix(zero_pot(), Interval(0.0, 20.0), kTheta, kOmega, -4.0, cfg);
    // log_scale plus the log-norm of the unit block tracks e^{2t} growth
    CHECK(log_norm(M) == doctest::Approx(40.0 + std::log(1.25)).epsilon(1e-4));
  }

  TEST_CASE("log_norm closed form against the dense oracle") {
    ScaledMatrix2 I2;
    CHECK(log_norm(I2) == 0.0);
    ScaledMatrix2 D;
    D.m00 = 1.0;
    D.m11 = std::exp(-20.0);
    D.m01 = D.m10 = 0.0;
    D.log_scale = 10.0;
    CHECK(log_norm(D) == doctest::Approx(10.0).epsilon(1e-12));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
      ScaledMatrix2 M;
      M.m00 = u(rng);
      M.m01 = u(rng);
      M.m10 = u(rng);
      M.m11 = u(rng);
      M.log_scale = 0.0;
      double expect = std::log(oracle::dense_norm2(M.m00, M.m01, M.m10, M.m11));
      CHECK(log_norm(M) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("free particle E=-1: log norm equals closed form") {
    IntegratorConfig cfg;
    ScaledMatrix2 M = transfer_matrix(zero_pot(), Interval(0.0, 1.0), kTheta, kOmega, -1.0, cfg);
    double expect = std::log(oracle::dense_norm2(std::cosh(1.0), std::sinh(1.0), std::sinh(1.0),
                                                 std::cosh(1.0)));
    CHECK(log_norm(M) == doctest::Approx(expect).epsilon(1e-9));
  }

  TEST_CASE("compose: inverse, identity, semigroup") {
    // Exactly unimodular matrix: M adj(M) = det(M) I = I to round-off.
    ScaledMatrix2 U;
    U.m00 = 2.0;
    U.m01 = 3.0;
    U.m10 = 1.0;
    U.m11 = 2.0;
    U = U.normalized();
    CHECK(relative_distance(compose(U, U.adjugate()), ScaledMatrix2::identity()) <= 1e-12);

    IntegratorConfig cfg;
    auto p = cosine(2.0);
    Interval I(0.0, 8.0);
    ScaledMatrix2 M = transfer_matrix(p, I, kTheta, kOmega, 0.5, cfg);
    // For an integrated matrix the residual is its determinant drift.
    CHECK(relative_distance(compose(M, M.adjugate()), ScaledMatrix2::identity()) <= 1e-9);
    CHECK(relative_distance(compose(M, ScaledMatrix2::identity()), M) <= 1e-15);

    ScaledMatrix2 M1 = transfer_matrix(p, Interval(0.0, 3.0), kTheta, kOmega, 0.5, cfg);
    ScaledMatrix2 M2 = transfer_matrix(p, Interval(3.0, 8.0), kTheta, kOmega, 0.5, cfg);
    CHECK(relative_distance(M, compose(M2, M1)) <= 1e-7);
  }

  TEST_CASE("inverse has the same log norm exactly") {
    IntegratorConfig cfg;
    auto p = cosine(3.0);
    ScaledMatrix2 M = transfer_matrix(p, Interval(0.0, 12.0), kTheta, kOmega, 0.0, cfg);
    CHECK(std::abs(log_norm(M) - log_norm(M.adjugate())) <= 1e-12);
  }

  TEST_CASE("shift covariance") {
    IntegratorConfig cfg;
    auto p = cosine(2.0);
    Interval I(0.0, 5.0);
    CHECK(shift_covariance_check(p, I, kTheta, kOmega, 0.0, 0.0, cfg) == 0.0);
    CHECK(shift_covariance_check(p, I, kTheta, kOmega, 0.0, 3.0, cfg) <= 1e-7);
    CHECK_THROWS_AS(shift_covariance_check(p, I, kTheta, kOmega, 0.0, 1.5, cfg),
                    PreconditionError);
  }

  TEST_CASE("Gronwall ceiling with numerical C_num") {
    IntegratorConfig cfg;
    auto p = cosine(3.0);
    for (double E : {-2.0, 0.0, 5.0}) {
      Interval I(0.0, 15.0);
      double c_num = sup_coefficient_norm(*p, I, kTheta, kOmega, E);
      ScaledMatrix2 M = transfer_matrix(p, I, kTheta, kOmega, E, cfg);
      CHECK(log_norm(M) <= 1.05 * I.length() * c_num);
    }
  }

  TEST_CASE("almost invariance within the coefficient bound") {
    IntegratorConfig cfg;
    auto p = cosine(2.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Interval I(0.0, 12.0);
    for (int i = 0; i < 10; ++i) {
      std::vector<double> th = {u(rng)};
      std::vector<double> th_s = {frac(th[0] + kOmega[0])};
      double d = std::abs(log_norm(transfer_matrix(p, I, th, kOmega, 0.5, cfg)) -
                          log_norm(transfer_matrix(p, I, th_s, kOmega, 0.5, cfg)));
      double c_num = sup_coefficient_norm(*p, I, th, kOmega, 0.5);
      CHECK(d <= c_num);
    }
  }

  TEST_CASE("Wronskian stays at one along the samples") {
    IntegratorConfig cfg;
    auto p = cosine(4.0);
    std::vector<double> grid;
    for (int i = 0; i <= 64; ++i) grid.push_back(20.0 * i / 64.0);
    TransferSolution sol = integrate_transfer(p, Interval(0.0, 20.0), kTheta, kOmega, 1.0, cfg, grid);
    CHECK(sol.front().u == 1.0);
    CHECK(sol.front().du == 0.0);
    CHECK(sol.front().v == 0.0);
    CHECK(sol.front().dv == 1.0);
    CHECK(sol.max_wronskian_drift() <= 1e-8);
  }

  TEST_CASE("sample_at reproduces stored samples and interpolates") {
    IntegratorConfig cfg;
    auto p = cosine(2.0);
    std::vector<double> grid = {0.0, 2.5, 5.0};
    TransferSolution sol = integrate_transfer(p, Interval(0.0, 5.0), kTheta, kOmega, -1.0, cfg, grid);
    auto s = sol.sample_at(2.5);
    CHECK(s.t == 2.5);
    // off-grid query agrees with a direct integration to that point
    auto mid = sol.sample_at(1.7);
    ScaledMatrix2 direct = transfer_matrix(p, Interval(0.0, 1.7), kTheta, kOmega, -1.0, cfg);
    double s1 = mid.u * std::exp(mid.log_scale);
    double s2 = direct.m00 * std::exp(direct.log_scale);
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-8));
  }

  TEST_CASE("degenerate interval and bad configs are rejected") {
    CHECK_THROWS_AS(Interval(1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(Interval(2.0, 1.0), PreconditionError);
    IntegratorConfig bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
  }

  TEST_CASE("unreachable tolerance raises StepFailure") {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-300;
    cfg.abs_tol = 1e-300;
    auto p = cosine(2.0);
    CHECK_THROWS_AS(transfer_matrix(p, Interval(0.0, 1.0), kTheta, kOmega, 0.0, cfg),
                    StepFailure);
  }

  TEST_CASE("complex path matches the real path for real inputs") {
    IntegratorConfig cfg;
    auto p = cosine(2.0);
    Interval I(0.0, 6.0);
    ScaledMatrix2 M = transfer_matrix(p, I, kTheta, kOmega, 0.7, cfg);
    std::vector<std::complex<double>> th = {{kTheta[0], 0.0}}, om = {{kOmega[0], 0.0}};
    ScaledMatrix2C Mc = transfer_matrix_complex(p, I, th, om, {0.7, 0.0}, cfg);
    CHECK(std::abs(log_norm(M) - log_norm(Mc)) <= 1e-9);
  }
}
