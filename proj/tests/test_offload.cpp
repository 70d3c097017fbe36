#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"
#include "cfmec/offload.hpp"
#include "fixtures.hpp"

using namespace cfmec;
using namespace cfmec::offload;

namespace {

double poisson(int n, double m) { return std::exp(n * std::log(m) - m - std::lgamma(n + 1.0)); }

// Queue-length pmf of M/H/1 from the embedded departure chain (equal to the
// time average by PASTA), a_k = P[k arrivals during one service].
std::vector<double> embedded_chain_pmf(const std::vector<double>& p, const std::vector<double>& mu, double lam,
                                       std::size_t n) {
    std::vector<double> a(n + 2, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = lam / (lam + mu[i]);
        double pw = mu[i] / (lam + mu[i]);
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] += p[i] * pw;
            pw *= x;
        }
    }
    double inv_mu = 0;
    for (std::size_t i = 0; i < p.size(); ++i) inv_mu += p[i] / mu[i];
    std::vector<double> pi(n, 0.0);
    pi[0] = 1 - lam * inv_mu;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double s = pi[j] - pi[0] * a[j];
        for (std::size_t k = 1; k <= j; ++k) s -= pi[k] * a[j - k + 1];
        pi[j + 1] = s / a[0];
    }
    return pi;
}

// Roots in (0,1) of B(lam (1 - 1/w)) = 1/w, B the service transform.
std::vector<double> pgf_pole_roots(const std::vector<double>& p, const std::vector<double>& mu, double lam) {
    auto h = [&](double w) {
        double b = 0;
        for (std::size_t i = 0; i < p.size(); ++i) b += p[i] * mu[i] / (mu[i] + lam * (1 - 1 / w));
        return b - 1 / w;
    };
    std::vector<double> roots;
    const int n = 200000;
    double prev_w = 1e-9, prev = h(prev_w);
    for (int k = 1; k < n; ++k) {
        const double w = static_cast<double>(k) / n;
        const double v = h(w);
        if (std::isfinite(prev) && std::isfinite(v) && (prev < 0) != (v < 0) && std::abs(v - prev) < 1e3) {
            double lo = prev_w, hi = w;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                ((h(mid) < 0) == (h(lo) < 0) ? lo : hi) = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_w = w;
        prev = v;
    }
    return roots;
}

// Closed-form one-type MEC SCP: sum_{n>=1} Poisson(n; m) (1 - e^{-mu t (1 - rho^n)}).
double mec_closed_form(double mu, double rho, double t, double m) {
    double s = 0;
    for (int n = 1; n < 400; ++n) s += poisson(n, m) * (1 - std::exp(-mu * t * (1 - std::pow(rho, n))));
    return s;
}

}  // namespace

TEST_CASE("minimum-load selection probability") {
    const double m = 3.1416;
    double oracle = 0;
    for (int k = 0; k < 200; ++k) oracle += poisson(k, m) / (k + 1);
    CHECK(min_load_selection_prob(m) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(min_load_selection_prob(m) == doctest::Approx(0.3044).epsilon(1e-3));
    CHECK(min_load_selection_prob(0.0) == 1.0);
    CHECK(min_load_selection_prob(1e-10) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("arrival rates") {
    const auto net = fixtures::fig2(0.05);
    const double pul = 0.1;
    auto all_cs = arrival_rates(net, fixtures::one_type(1.0), pul);
    CHECK(all_cs.lambda_m == 0.0);
    CHECK(all_cs.lambda_c == doctest::Approx(100 * 4 * 0.9).epsilon(1e-14));
    auto a = arrival_rates(net, fixtures::one_type(0.3), pul);
    auto b = arrival_rates(net, fixtures::one_type(0.6), pul);
    CHECK(b.lambda_c == doctest::Approx(2 * a.lambda_c).epsilon(1e-14));
    CHECK(a.lambda_o == doctest::Approx(0.7 * 100 * std::acos(-1.0) * 0.0025 * 0.9).epsilon(1e-14));
    CHECK(a.lambda_m == doctest::Approx(a.lambda_o * min_load_selection_prob(std::acos(-1.0))).epsilon(1e-14));
    auto z = arrival_rates(fixtures::fig2(0.0), fixtures::one_type(0.3), pul);
    CHECK(z.lambda_m == 0.0);
    CHECK_THROWS_AS(arrival_rates(net, fixtures::one_type(), 1.5), ConfigError);
}

TEST_CASE("one-type spectrum is geometric") {
    const auto c = fixtures::one_type();
    const double mu = fixtures::rate_from_ghz(1.0);
    CHECK(mu == doctest::Approx(48.48).epsilon(1e-3));
    auto q = queue_spectrum(c, 20.0);
    REQUIRE(q.omega().size() == 1);
    CHECK(q.omega()[0] == doctest::Approx(20.0 / mu).epsilon(1e-12));
    CHECK(q.eps()[0] == doctest::Approx(1 - 20.0 / mu).epsilon(1e-12));
    CHECK(q.omega()[0] == doctest::Approx(0.4125).epsilon(1e-3));

    auto empty = queue_spectrum(c, 0.0);
    CHECK(empty.pmf(0) == 1.0);
    CHECK(empty.pmf(3) == 0.0);

    CHECK_THROWS_AS(queue_spectrum(c, mu), StabilityError);
}

TEST_CASE("two-type spectrum against the embedded chain") {
    const std::vector<double> p{0.6, 0.4};
    const std::vector<double> mu{48.5, 164.8};
    ComputeParams cp;
    cp.type_probs = p;
    cp.mu_c = {200, 250};
    cp.mu_m = mu;
    cp.offload_prob = 0.2;
    cp.target_latency = 0.012;
    const ComputeConfig c(cp);
    for (double lam : {2.0, 20.0, 45.0}) {
        auto q = queue_spectrum(c, lam);
        auto roots = pgf_pole_roots(p, mu, lam);
        REQUIRE(roots.size() == 2);
        std::vector<double> got(q.omega().begin(), q.omega().end());
        std::sort(got.begin(), got.end());
        CHECK(got[0] == doctest::Approx(roots[0]).epsilon(1e-8));
        CHECK(got[1] == doctest::Approx(roots[1]).epsilon(1e-8));

        const auto chain = embedded_chain_pmf(p, mu, lam, 40);
        for (std::size_t v = 0; v < chain.size(); ++v) CHECK(std::abs(q.pmf(v) - chain[v]) < 1e-9);

        double eps_sum = 0;
        for (std::size_t i = 0; i < 2; ++i) eps_sum += q.eps()[i] / (1 - q.omega()[i]);
        CHECK(eps_sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("minimum of queue lengths") {
    const auto c = fixtures::one_type();
    const double rho = 0.4124;
    auto q = queue_spectrum(c, rho * c.mu_m_aggregate());
    for (std::size_t v = 0; v < 6; ++v)
        CHECK(min_queue_pmf(q, 1, v) == doctest::Approx((1 - rho) * std::pow(rho, v)).epsilon(1e-12));
    CHECK(min_queue_pmf(q, 3, 0) == doctest::Approx(1 - std::pow(rho, 3)).epsilon(1e-12));
    CHECK(min_queue_pmf(q, 3, 0) == doctest::Approx(0.9299).epsilon(1e-4));
    // brute force over three independent geometrics
    double brute = 0;
    for (int a = 0; a < 60; ++a)
        for (int b = 0; b < 60; ++b)
            for (int d = 0; d < 60; ++d)
                if (std::min({a, b, d}) == 1)
                    brute += (1 - rho) * std::pow(rho, a) * (1 - rho) * std::pow(rho, b) * (1 - rho) * std::pow(rho, d);
    CHECK(min_queue_pmf(q, 3, 1) == doctest::Approx(brute).epsilon(1e-10));

    auto q2 = queue_spectrum(fixtures::two_types(), 30.0);
    for (int n : {1, 2, 5}) {
        double total = 0;
        for (std::size_t v = 0; v < 400; ++v) total += min_queue_pmf(q2, n, v);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("CS latency") {
    const double mu_c = fixtures::rate_from_ghz(4.0);
    const auto c = fixtures::one_type(0.2, 0.012);
    CHECK(scp_cs(c, 0.0) == doctest::Approx(1 - std::exp(-mu_c * 0.012)).epsilon(1e-7));
    CHECK(scp_cs(c, 50.0) == doctest::Approx(1 - std::exp(-(mu_c - 50) * 0.012)).epsilon(1e-7));
    CHECK(scp_cs(c, 50.0) == doctest::Approx(0.8222).epsilon(1e-3));
}

TEST_CASE("one-type MEC latency matches the closed form") {
    const auto c = fixtures::one_type(0.2, 0.012);
    const double mu = c.mu_m_aggregate();
    for (double rho : {0.05, 0.4, 0.8}) {
        MecLatency lat(c, queue_spectrum(c, rho * mu));
        for (double m : {0.3, 2.0, 9.0}) {
            CHECK(std::abs(lat.mixture(m) - mec_closed_form(mu, rho, 0.012, m)) < 1e-6);
            CHECK(std::abs(scp_mec_exponential(mu, rho, 0.012, m) - mec_closed_form(mu, rho, 0.012, m)) < 1e-9);
        }
    }
    // t -> 0 completes nothing
    const auto fast = fixtures::one_type(0.2, 1e-7);
    MecLatency tiny(fast, queue_spectrum(fast, 10.0));
    CHECK(tiny.mixture(3.0) < 1e-4);
}

TEST_CASE("scp endpoints and monotonicity in t") {
    auto np = fixtures::fig2_params(0.05);
    np.network_area = 1.0;  // keeps theta = 1 stable
    const NetworkConfig net(np);
    const double pul = comm::uplink_outage(net);
    const auto c1 = fixtures::two_types(1.0);
    const auto rates = arrival_rates(net, c1, pul);
    CHECK(scp(net, c1, pul) == doctest::Approx(scp_cs(c1, rates.lambda_c)).epsilon(1e-12));
    const auto c0 = fixtures::two_types(0.0);
    CHECK(scp(net, c0, pul) ==
          doctest::Approx(scp_mec(net, c0, arrival_rates(net, c0, pul).lambda_m)).epsilon(1e-12));

    for (double th : {0.1, 0.4}) {
        double prev = 0;
        for (double t : {0.001, 0.002, 0.004, 0.008, 0.012, 0.02, 0.05}) {
            const double v = scp(net, fixtures::two_types(th, t), pul);
            CHECK(v >= prev - 1e-9);
            prev = v;
        }
    }
    CHECK_THROWS_AS(scp(fixtures::fig2(0.05), fixtures::two_types(0.9), pul), StabilityError);
}

TEST_CASE("larger R favours the smaller offload probability") {
    // Antenna density 1600 per km^2, one task type. The ordering needs a CS
    // that is loaded but stable at theta = 0.7, i.e. area below ~2.8 km^2;
    // with a lightly loaded CS (1 km^2) the CS wins for every R.
    for (auto [M, lb] : {std::pair{4, 400.0}, std::pair{1, 1600.0}}) {
        auto p = fixtures::fig2_params(0.15);
        p.antennas_per_ap = M;
        p.lambda_b = lb;
        p.network_area = 2.0;
        const NetworkConfig net(p);
        const double pul = comm::uplink_outage(net);
        CHECK(scp(net, fixtures::one_type(0.3), pul) > scp(net, fixtures::one_type(0.7), pul));
        // small R: few connected servers, the CS side wins
        const auto near = net.with_coverage_radius(0.01);
        const double pn = comm::uplink_outage(near);
        CHECK(scp(near, fixtures::one_type(0.3), pn) < scp(near, fixtures::one_type(0.7), pn));
    }
}

TEST_CASE("scp is unimodal in theta") {
    const auto net = fixtures::fig2(0.05);
    const double pul = comm::uplink_outage(net);
    const auto iv = stable_theta_interval(net, fixtures::two_types(), pul);
    const auto grid = uniform_grid(0, std::min(1.0, iv.hi) - 1e-3, 41);
    std::vector<double> v;
    for (double th : grid) v.push_back(scp(net, fixtures::two_types(th), pul));
    int changes = 0;
    for (std::size_t i = 2; i < v.size(); ++i)
        if ((v[i] - v[i - 1] < 0) != (v[i - 1] - v[i - 2] < 0)) ++changes;
    CHECK(changes <= 1);

    // golden-section refinement lands within one grid spacing of a dense scan
    const auto coarse = uniform_grid(0, 1, 21);
    const auto opt = optimal_theta(net, fixtures::two_types(), coarse, pul);
    double best = -1, arg = 0;
    for (double th : uniform_grid(0, std::min(1.0, iv.hi) - 1e-6, 2001)) {
        const double s = scp(net, fixtures::two_types(th), pul);
        if (s > best) best = s, arg = th;
    }
    CHECK(std::abs(opt.theta - arg) <= 0.05);
    CHECK(opt.value >= best - 1e-6);
}

TEST_CASE("infinitely fast CS pulls theta to one") {
    const auto net = fixtures::fig2(0.05);
    ComputeParams cp = fixtures::one_type().params();
    cp.mu_c = {1e9};
    const ComputeConfig c(cp);
    const auto opt = optimal_theta(net, c, uniform_grid(0, 1, 21), comm::uplink_outage(net));
    CHECK(opt.theta == doctest::Approx(1.0).epsilon(1e-3));
}
