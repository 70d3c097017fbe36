#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cfmec/errors.hpp"
#include "cfmec/specfun.hpp"

using namespace cfmec::specfun;
using cd = std::complex<double>;

namespace {

// Midpoint-free composite Simpson, enough for smooth integrands in oracles.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

}  // namespace

TEST_CASE("hyp2f1 closed forms") {
    CHECK(hyp2f1(0.3, 1.7, 2.2, 0.0) == 1.0);
    for (double z : {-0.5, -0.9, -3.0, -40.0}) {
        const double want = -std::log1p(-z) / z;
        CHECK(hyp2f1(1, 1, 2, z) == doctest::Approx(want).epsilon(1e-10));
    }
    // 2F1(a, b; b; z) = (1 - z)^-a
    CHECK(hyp2f1(2.5, 0.7, 0.7, -2.0) == doctest::Approx(std::pow(3.0, -2.5)).epsilon(1e-10));
}

TEST_CASE("hyp2f1 at the uplink plateau argument") {
    // Oracle: (1-q) int_0^1 t^-q / (1 + 3t) dt with q = 2/alpha (Euler integral),
    // value from a 30-digit quadrature.
    const double q = 2 / 3.7;
    const double frozen = 0.622819385975995;
    CHECK(hyp2f1(1, 1 - q, 2 - q, -3) == doctest::Approx(frozen).epsilon(1e-12));
    // Same integral after t = u^(1/(1-q)), which removes the endpoint singularity.
    const double p = 1 / (1 - q);
    const double integral = simpson([&](double u) { return 1 / (1 + 3 * std::pow(u, p)); }, 0, 1);
    CHECK(hyp2f1(1, 1 - q, 2 - q, -3) == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("hyp2f1 evaluation paths agree") {
    const double q = 2 / 3.7;
    for (double z : {-0.05, -0.3, -0.6, -0.95}) {
        for (int j : {0, 1, 3}) {
            const double a = j + 1, b = j - q + (j == 0 ? 1 : 0), c = b + 1;
            const double s = detail::hyp2f1_series(a, b, c, z);
            const double t = detail::hyp2f1_pfaff(a, b, c, z);
            CHECK(s == doctest::Approx(t).epsilon(1e-9));
        }
    }
    for (double z : {-2.0, -5.0}) {
        const double t = detail::hyp2f1_pfaff(1.0, 1 - q, 2 - q, z);
        const double r = detail::hyp2f1_reciprocal(1.0, 1 - q, 2 - q, z);
        CHECK(t == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("incomplete gamma closed forms") {
    for (double x : {0.0, 0.3, 2.0, 17.0}) {
        CHECK(upper_incomplete_gamma(1, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
        CHECK(lower_incomplete_gamma_regularized(1, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-12));
    }
    CHECK(upper_incomplete_gamma(2.7, 0.0) == doctest::Approx(std::tgamma(2.7)).epsilon(1e-12));
    CHECK(lower_incomplete_gamma_regularized(3.2, 0.0) == 0.0);

    // Gamma(0.459, 2): tail integral oracle, frozen from a 30-digit quadrature.
    const double frozen = 0.0773576404830751;
    CHECK(upper_incomplete_gamma(0.459, 2.0) == doctest::Approx(frozen).epsilon(1e-10));
    const double tail = simpson([](double t) { return std::pow(t, -0.541) * std::exp(-t); }, 2.0, 60.0, 200000);
    CHECK(upper_incomplete_gamma(0.459, 2.0) == doctest::Approx(tail).epsilon(1e-9));

    // P(3, 2.5) by the defining series e^-x sum_{k>=s} x^k / k! (integer s).
    double series = 0.0, term = std::exp(-2.5);
    for (int k = 0; k < 80; ++k) {
        if (k >= 3) series += term;
        term *= 2.5 / (k + 1);
    }
    CHECK(lower_incomplete_gamma_regularized(3, 2.5) == doctest::Approx(series).epsilon(1e-12));
}

TEST_CASE("upper plus lower incomplete gamma is the complete gamma") {
    for (double s : {0.2, 0.459, 1.0, 2.5, 7.3, 30.0}) {
        for (double x : {1e-3, 0.5, 1.0, 4.0, 25.0}) {
            const double P = lower_incomplete_gamma_regularized(s, x);
            const double Q = upper_incomplete_gamma_regularized(s, x);
            CHECK(P + Q == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(upper_incomplete_gamma(s, x) == doctest::Approx(Q * std::tgamma(s)).epsilon(1e-10));
        }
    }
}

TEST_CASE("gamma expectation moments") {
    auto id = [](double g) { return g; };
    CHECK(gamma_expectation(id, 4) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(gamma_expectation([](double g) { return g * g; }, 4) == doctest::Approx(20.0).epsilon(1e-12));
    const double k = 2 / 3.7;
    CHECK(gamma_expectation([&](double g) { return std::pow(g, k); }, 4) ==
          doctest::Approx(std::tgamma(4 + k) / std::tgamma(4)).epsilon(1e-9));
    // power argument folds g^k into the weight
    CHECK(gamma_expectation([](double) { return 1.0; }, 4, {}, k) ==
          doctest::Approx(std::tgamma(4 + k) / std::tgamma(4)).epsilon(1e-12));
    for (int m = 1; m <= 6; ++m) {
        double want = 1;
        for (int i = 0; i < m; ++i) want *= 3 + i;
        CHECK(gamma_expectation([&](double g) { return std::pow(g, m); }, 3) == doctest::Approx(want).epsilon(1e-10));
    }
    GammaQuadrature q(2.0, 32);
    CHECK(q.expect([](double g) { return std::exp(-g); }) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature") {
    auto r = integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
    auto k = integrate([](double x) { return std::abs(x - 0.3); }, 0, 1);
    CHECK(k.value == doctest::Approx(0.29).epsilon(1e-10));
}

TEST_CASE("Laplace inversion") {
    const double mu = 50;
    auto expo = [&](cd s) { return mu / (s + mu); };
    CHECK(invert_laplace_cdf(expo, std::log(2.0) / mu) == doctest::Approx(0.5).epsilon(1e-7));

    auto erlang3 = [&](cd s) { return std::pow(mu / (s + mu), 3); };
    for (double t : {0.01, 0.05, 0.1}) {
        CHECK(std::abs(invert_laplace_cdf(erlang3, t) - lower_incomplete_gamma_regularized(3, mu * t)) <= 1e-7);
    }

    // M/M/1 sojourn time through the transform of waiting plus service.
    const double lam = 10;
    auto mm1 = [&](cd s) {
        const cd b = mu / (s + mu);
        return (1.0 - lam / mu) * s * b / (s - lam + lam * b);
    };
    for (int ms = 1; ms <= 50; ++ms) {
        const double t = ms * 1e-3;
        CHECK(std::abs(invert_laplace_cdf(mm1, t) - (1 - std::exp(-(mu - lam) * t))) <= 1e-7);
    }

    LaplaceInversionSettings talbot{LaplaceMethod::talbot, 32, 1e-7};
    CHECK(invert_laplace_cdf(expo, 0.02, talbot) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-7));

    CHECK_THROWS_AS(validate(LaplaceInversionSettings{LaplaceMethod::euler, 5, 1e-7}), cfmec::ConfigError);
    CHECK_THROWS_AS(validate(LaplaceInversionSettings{LaplaceMethod::euler, 24, 0.0}), cfmec::ConfigError);
}

TEST_CASE("polynomial roots") {
    const std::vector<double> lin{-0.4124, 1.0};
    auto r1 = poly_roots_real(lin);
    REQUIRE(r1.roots.size() == 1);
    CHECK(r1.roots[0] == doctest::Approx(0.4124).epsilon(1e-14));

    const std::vector<double> quad{6, -5, 1};
    auto r2 = poly_roots_real(quad);
    REQUIRE(r2.roots.size() == 2);
    CHECK(r2.roots[0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r2.roots[1] == doctest::Approx(3.0).epsilon(1e-13));
    for (double res : r2.residuals) CHECK(res < 1e-12);

    CHECK(poly_eval(quad, 2.5) == doctest::Approx(-0.25));
}
