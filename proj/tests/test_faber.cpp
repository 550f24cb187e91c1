#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qplab/faber.hpp"

using namespace qplab;

namespace {
std::shared_ptr<const AnalyticPotential> zero_pot() {
  return std::make_shared<AnalyticPotential>(AnalyticPotential::zero(1));
}
constexpr double kGolden = 0.61803398874989484820;
}  // namespace

TEST_SUITE("faber") {
  TEST_CASE("faber polynomials: base cases and frozen coefficients") {
    CHECK(faber_polynomial(2.0, 0) == std::vector<double>{1.0});
    // L = 3, n = 1: 2z/3
    auto p1 = faber_polynomial(3.0, 1);
    REQUIRE(p1.size() == 2);
    CHECK(p1[0] == doctest::Approx(0.0));
    CHECK(p1[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    // L = 1, n = 2: 2(2z^2 - 1) = [-2, 0, 4]
    auto p2 = faber_polynomial(1.0, 2);
    REQUIRE(p2.size() == 3);
    CHECK(p2[0] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(p2[1] == doctest::Approx(0.0));
    CHECK(p2[2] == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("faber polynomials agree with the contour-integral oracle") {
    for (auto [L, n] : std::vector<std::pair<double, int>>{{1.0, 2}, {3.0, 1}, {2.0, 5}}) {
      auto coeffs = faber_polynomial(L, n);
      for (double zfrac : {-0.8, -0.2, 0.3, 0.9}) {
        double z = zfrac * L / 2.0;  // inside G_{K,R}
        double direct = oracle::horner(coeffs, z);
        double contour = oracle::faber_value_contour(L, n, 2.0, z);
        CHECK(direct == doctest::Approx(contour).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("degree and leading coefficient up to n = 30") {
    double L = 1.7;
    for (int n = 1; n <= 30; ++n) {
      auto c = faber_polynomial(L, n);
      REQUIRE(static_cast<int>(c.size()) == n + 1);
      CHECK(c[n] > 0.0);
      CHECK(c[n] == doctest::Approx(std::pow(2.0 / L, n)).epsilon(1e-10));
    }
  }

  TEST_CASE("coefficients of f(z) = z on one interval") {
    FaberDomain dom;
    dom.half_lengths = {3.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn f = [](std::span<const std::complex<double>> z) { return z[0]; };
    auto coeffs = faber_coefficients(f, dom, 6, 32);
    for (const auto& [n, v] : coeffs) {
      if (n[0] == 1)
        CHECK(v == doctest::Approx(1.5).epsilon(1e-12));  // a_1 = L/2 so a_1 Phi_1 = z
      else
        CHECK(std::abs(v) <= 1e-12);
    }
  }

  TEST_CASE("biorthogonality for m <= 10") {
    FaberDomain dom;
    dom.half_lengths = {1.3};
    dom.R = 1.6;
    dom.R_prime = 1.3;
    for (int m = 0; m <= 10; ++m) {
      auto phim = faber_polynomial(1.3, m);
      ProductFn f = [&](std::span<const std::complex<double>> z) {
        std::complex<double> acc = 0.0;
        for (size_t i = phim.size(); i-- > 0;) acc = acc * z[0] + phim[i];
        return acc;
      };
      auto coeffs = faber_coefficients(f, dom, 12, 64);
      for (const auto& [n, v] : coeffs)
        CHECK(std::abs(v - (n[0] == m ? 1.0 : 0.0)) <= 1e-10);
    }
  }

  TEST_CASE("exp converges at least geometrically with ratio 1/R") {
    FaberDomain dom;
    dom.half_lengths = {1.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn f = [](std::span<const std::complex<double>> z) { return std::exp(z[0]); };
    std::vector<double> errs;
    for (int N : {2, 4, 6, 8, 10}) {
      FaberSurrogate s = approximate_on_product(f, dom, N, 64);
      double worst = 0.0;
      for (int i = 0; i <= 50; ++i) {
        double x = -1.0 + 2.0 * i / 50.0;
        double xs[1] = {x};
        worst = std::max(worst, std::abs(s.eval(xs) - std::exp(x)));
      }
      errs.push_back(worst);
    }
    // geometric decay with ratio at most 1/R per degree, above the noise floor
    int checked = 0;
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
      if (errs[i] < 1e-13) break;
      CHECK(errs[i + 1] / errs[i] <= std::pow(1.0 / dom.R, 2.0));
      ++checked;
    }
    CHECK(checked >= 2);
  }

  TEST_CASE("unresolved quadrature is detected") {
    FaberDomain dom;
    dom.half_lengths = {1.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    // A polynomial of degree far above the node count aliases at Q but not 2Q.
    auto high = faber_polynomial(1.0, 61);
    ProductFn f = [&](std::span<const std::complex<double>> z) {
      std::complex<double> acc = 0.0;
      for (size_t i = high.size(); i-- > 0;) acc = acc * z[0] + high[i];
      return acc;
    };
    CHECK_THROWS_AS(faber_coefficients(f, dom, 10, 64), QuadratureUnresolved);
  }

  TEST_CASE("product approximation: constants and low-degree polynomials are exact") {
    FaberDomain dom;
    dom.half_lengths = {1.0, 1.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn c7 = [](std::span<const std::complex<double>>) { return 7.0; };
    FaberSurrogate sc = approximate_on_product(c7, dom, 3);
    double xs[2] = {0.3, -0.6};
    CHECK(sc.eval(xs) == doctest::Approx(7.0).epsilon(1e-13));

    ProductFn prod = [](std::span<const std::complex<double>> z) { return z[0] * z[1]; };
    FaberSurrogate sp = approximate_on_product(prod, dom, 3);
    for (double x : {-0.9, 0.1, 0.8})
      for (double y : {-0.7, 0.2, 0.95}) {
        double p[2] = {x, y};
        CHECK(sp.eval(p) == doctest::Approx(x * y).epsilon(1e-10));
      }
  }

  TEST_CASE("exp(z1+z2): observed error below the certificate") {
    FaberDomain dom;
    dom.half_lengths = {1.0, 1.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn f = [](std::span<const std::complex<double>> z) { return std::exp(z[0] + z[1]); };
    FaberSurrogate s = approximate_on_product(f, dom, 24);
    double worst = 0.0;
    for (int i = 0; i <= 30; ++i)
      for (int j = 0; j <= 30; ++j) {
        double x = -1.0 + 2.0 * i / 30.0, y = -1.0 + 2.0 * j / 30.0;
        double p[2] = {x, y};
        worst = std::max(worst, std::abs(s.eval(p) - std::exp(x + y)));
      }
    CHECK(worst <= s.error_cert);
    CHECK(std::isfinite(s.error_cert));
  }

  TEST_CASE("two evaluation paths agree to round-off") {
    FaberDomain dom;
    dom.half_lengths = {1.0, 2.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn f = [](std::span<const std::complex<double>> z) {
      return std::exp(z[0]) * std::cos(z[1]);
    };
    FaberSurrogate s = approximate_on_product(f, dom, 12);
    for (double x : {-0.9, 0.0, 0.7})
      for (double y : {-1.8, 0.3, 1.9}) {
        double p[2] = {x, y};
        double a = s.eval(p), b = s.eval_horner(p);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
      }
  }

  TEST_CASE("surrogate json round trip") {
    FaberDomain dom;
    dom.half_lengths = {1.0};
    dom.R = 1.5;
    dom.R_prime = 1.25;
    ProductFn f = [](std::span<const std::complex<double>> z) { return std::exp(z[0]); };
    FaberSurrogate s = approximate_on_product(f, dom, 8);
    FaberSurrogate t = FaberSurrogate::from_json(s.to_json());
    double xs[1] = {0.4};
    CHECK(t.eval(xs) == s.eval(xs));
    CHECK(t.error_cert == s.error_cert);
  }

  TEST_CASE("free-particle transfer surrogate: energy dependence only") {
    auto p = zero_pot();
    Interval I(0.0, 2.0);
    IntegratorConfig cfg{1e-10, 1e-12, 1.0, 1.0};
    TransferSurrogateParams params;
    params.theta_degree = 4;
    params.omega_degree = 0;
    params.energy_degree = 24;
    params.omega_halfwidth = 1e-9;
    params.energy_radius = 6.0;
    params.deviation_budget = 0.5;
    params.cert_theta = 9;
    params.cert_omega = 1;
    params.cert_energy = 17;
    params.quad_cfg = IntegratorConfig{1e-9, 1e-12, 1.0, 1.0};
    // hyperbolic window: the Hilbert-Schmidt and operator norms coincide up to
    // e^{-2 |I| sqrt(-E)}, so the deviation reflects only the approximation
    TransferSurrogate s = transfer_surrogate(p, I, 1.0, kGolden, {-2.0, -0.5}, params, cfg);
    CHECK(s.observed_deviation <= 0.05);
  }

  TEST_CASE("degree-zero surrogate on a varying system is rejected") {
    auto p = std::make_shared<AnalyticPotential>(AnalyticPotential::cosine_model(2.0, 0.4));
    Interval I(-1.0, 1.0);
    IntegratorConfig cfg{1e-10, 1e-12, 1.0, 1.0};
    TransferSurrogateParams params;
    params.theta_degree = 1;  // far below what the variation needs
    params.omega_degree = 0;
    params.energy_degree = 0;
    params.omega_halfwidth = 1e-9;
    params.deviation_budget = 0.05;
    params.cert_theta = 17;
    params.cert_omega = 1;
    params.cert_energy = 1;
    CHECK_THROWS_AS(transfer_surrogate(p, I, 1.0, kGolden, {0.5, 0.5}, params, cfg),
                    SurrogateInaccurate);
  }

  TEST_CASE("sublevel measure: faithful orientation and sandwich") {
    auto p = std::make_shared<AnalyticPotential>(AnalyticPotential::cosine_model(2.0, 0.4));
    Interval I(-2.0, 2.0);
    IntegratorConfig cfg{1e-9, 1e-11, 1.0, 1.0};
    TransferSurrogateParams params;
    params.theta_degree = 160;
    params.omega_degree = 0;
    params.energy_degree = 0;
    params.omega_halfwidth = 1e-9;
    params.energy_center = 0.5;
    params.deviation_budget = 2.0;
    params.cert_theta = 33;
    params.cert_omega = 1;
    params.cert_energy = 1;
    params.quad_cfg = IntegratorConfig{1e-8, 1e-11, 1.0, 1.0};
    TransferSurrogate s = transfer_surrogate(p, I, 1.0, kGolden, {0.5, 0.5}, params, cfg);
    PhaseGrid grid{16, 1, {}};
    std::vector<double> om = {kGolden};
    LyapunovEstimate L = finite_lyapunov(p, I, om, 0.5, grid, {}, cfg);

    // H far above the Gronwall range: the sublevel set is empty.
    SublevelReport empty = surrogate_sublevel_measure(s, 1e6, L.value, 200);
    CHECK(empty.measure == 0.0);
    // H very negative: every phase satisfies the inequality.
    SublevelReport full = surrogate_sublevel_measure(s, -1e6, L.value, 200);
    CHECK(full.measure == 1.0);
    // moderate H: the sandwich holds on the samples.
    SublevelReport mid = surrogate_sublevel_measure(s, std::pow(I.length(), 0.75), L.value, 500);
    CHECK(mid.sandwich_left_violations == 0);
    CHECK(mid.sandwich_right_violations == 0);
  }

  TEST_CASE("orbit averaging: free particle is shift independent") {
    IntegratorConfig cfg;
    PhaseGrid grid{4, 1, {}};
    DiophantineSpec spec{0.2, 2.0, 1};
    std::vector<double> th = {0.1}, om = {kGolden};
    OrbitAverageReport r =
        orbit_average_check(zero_pot(), Interval(0.0, 10.0), th, om, -1.0, 50, spec, grid, cfg);
    CHECK(r.difference <= 1e-6);
  }

  TEST_CASE("orbit averaging: two-scale calibration for cosine K = 3") {
    IntegratorConfig cfg{1e-9, 1e-11, 1.0, 1.0};
    auto p = std::make_shared<AnalyticPotential>(AnalyticPotential::cosine_model(3.0));
    PhaseGrid grid{32, 1, {}};
    DiophantineSpec spec{0.2, 2.0, 1};
    std::vector<double> th = {0.1}, om = {kGolden};
    OrbitAverageReport r10 =
        orbit_average_check(p, Interval(0.0, 10.0), th, om, 0.0, 200, spec, grid, cfg);
    OrbitAverageReport r20 =
        orbit_average_check(p, Interval(0.0, 20.0), th, om, 0.0, 200, spec, grid, cfg);
    double c_fit = r10.difference / std::pow(10.0, 0.75);
    CHECK(r20.difference <= std::max(2.0 * c_fit, 0.5) * std::pow(20.0, 0.75));
  }
}
