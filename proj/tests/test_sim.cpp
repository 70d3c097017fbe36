#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"
#include "cfmec/offload.hpp"
#include "cfmec/sim.hpp"
#include "fixtures.hpp"

using namespace cfmec;
using namespace cfmec::sim;

namespace {

// One CS task stream at 24 tasks/s with no uplink thinning.
NetworkConfig light_load() {
    auto p = fixtures::fig2_params(0.05);
    p.lambda_d = 100.0;
    p.network_area = 0.24;
    return NetworkConfig(p);
}

MlcmOptions no_thinning() {
    MlcmOptions o;
    o.uplink_outage = 0.0;
    return o;
}

}  // namespace

TEST_CASE("streams and estimates") {
    CHECK(stream_seed(7, 0) != stream_seed(7, 1));
    CHECK(stream_seed(7, 3) == stream_seed(7, 3));
    CHECK(stream_seed(7, 3) != stream_seed(8, 3));
    auto a = replication_engine(11, 2), b = replication_engine(11, 2);
    CHECK(a() == b());

    const auto e = estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == 2.5);
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-14));
    CHECK(e.samples == 4);
}

TEST_CASE("scenario validation") {
    const auto net = fixtures::fig2(0.05);
    auto sc = make_scenario(net, 10, 1);
    CHECK(sc.half_width >= 4 * 0.05 + sc.guard);
    CHECK_NOTHROW(validate(sc, net));
    sc.half_width = 0.1;
    CHECK_THROWS_AS(validate(sc, net), ConfigError);
    sc = make_scenario(net, 10, 1);
    sc.replications = 0;
    CHECK_THROWS_AS(validate(sc, net), ConfigError);
    CHECK(interference_guard(net, 1e-6) > interference_guard(net, 1e-3));
}

TEST_CASE("spatial simulation is reproducible") {
    const auto net = fixtures::fig2(0.05);
    const auto sc = make_scenario(net, 300, 42);
    const auto a = simulate_uplink_outage(net, sc);
    const auto b = simulate_uplink_outage(net, sc);
    CHECK(a.outage.mean == b.outage.mean);
    CHECK(a.connected_aps.mean == b.connected_aps.mean);
    const auto c = simulate_uplink_outage(net, make_scenario(net, 300, 43));
    CHECK(c.connected_aps.mean != a.connected_aps.mean);
}

TEST_CASE("connected APs follow the PPP mean") {
    for (double R : {0.03, 0.08}) {
        const auto net = fixtures::fig2(R);
        const auto r = simulate_downlink_sir(net, make_scenario(net, 4000, 5));
        const double want = 400 * std::numbers::pi * R * R;
        CHECK(std::abs(r.connected_aps.mean - want) < 3 * r.connected_aps.stderr_ + 1e-12);
        // interference mean is exact in expectation; heavy tail, so 4 stderr
        CHECK(std::abs(r.interference_mean.mean - comm::interference_mean(net)) <
              4 * r.interference_mean.stderr_);
    }
}

TEST_CASE("spatial limits") {
    // no users: nothing interferes, so only an empty coverage disk fails
    auto p = fixtures::fig2_params(0.05);
    p.lambda_d = 1e-6;
    const NetworkConfig quiet(p);
    const auto q = simulate_downlink_sir(quiet, make_scenario(quiet, 4000, 3)).outage;
    CHECK(std::abs(q.mean - std::exp(-std::numbers::pi)) < 3 * q.stderr_);

    // almost no APs: the uplink fails
    p = fixtures::fig2_params(0.05);
    p.lambda_b = 1e-3;
    const NetworkConfig sparse(p);
    CHECK(simulate_uplink_outage(sparse, make_scenario(sparse, 500, 3)).outage.mean > 0.99);

    // 64 antennas beat 1
    p = fixtures::fig2_params(0.05);
    p.antennas_per_ap = 1;
    const NetworkConfig one(p);
    p.antennas_per_ap = 64;
    const NetworkConfig many(p);
    const double o1 = simulate_uplink_outage(one, make_scenario(one, 2000, 9)).outage.mean;
    const double o64 = simulate_uplink_outage(many, make_scenario(many, 2000, 9)).outage.mean;
    CHECK(o64 < o1);
}

TEST_CASE("CS queue matches M/M/1") {
    const auto net = light_load();
    const auto comp = fixtures::one_type(1.0, 0.02);
    const auto run = simulate_mlcm(net, comp, 4000.0, 17, no_thinning());
    const double lambda = 24.0, mu = fixtures::rate_from_ghz(4.0);
    REQUIRE(run.log.tasks.size() > 50000);
    CHECK(run.dropped == 0);

    for (double t : {0.01, 0.02, 0.05}) {
        std::size_t ok = 0;
        for (const auto& r : run.log.tasks) ok += r.sojourn_s <= t;
        const double emp = static_cast<double>(ok) / run.log.tasks.size();
        CHECK(std::abs(emp - (1 - std::exp(-(mu - lambda) * t))) < 0.01);
    }
    CHECK(std::abs(run.success_fraction(0.02) - offload::scp_cs(comp, lambda)) < 0.02);
    CHECK(run.mean_sojourn_cs() == doctest::Approx(1 / (mu - lambda)).epsilon(0.03));

    // time-average occupancy is geometric(rho)
    const double rho = lambda / mu;
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(run.cs_occupancy_pmf[k] - (1 - rho) * std::pow(rho, k)) < 0.01);
}

TEST_CASE("Little's law") {
    const auto net = light_load();
    const auto comp = fixtures::one_type(1.0, 0.02);
    const auto run = simulate_mlcm(net, comp, 4000.0, 23, no_thinning());
    // batch means for the sojourn standard error
    const std::size_t n = run.log.tasks.size(), batches = 40, per = n / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += run.log.tasks[i].sojourn_s;
        means.push_back(s / per);
    }
    const auto w = estimate(means);
    const double lambda_hat = static_cast<double>(run.arrivals) / run.measured_time;
    CHECK(std::abs(run.cs_mean_occupancy - lambda_hat * w.mean) < 3 * lambda_hat * w.stderr_ + 1e-3);
}

TEST_CASE("single MEC server is M/M/1") {
    const auto net = light_load();
    const auto comp = fixtures::one_type(0.0, 0.02);
    auto o = no_thinning();
    o.num_servers = 1;
    o.fixed_connections = 1;
    // mu_m is 12.1/s: slow the arrivals to rho = 0.5
    auto p = net.params();
    p.network_area = 0.0606;
    const NetworkConfig slow(p);
    const auto run = simulate_mlcm(slow, comp, 20000.0, 31, o);
    const double lambda = 6.06, mu = fixtures::rate_from_ghz(1.0);
    CHECK(run.mean_sojourn_mec() == doctest::Approx(1 / (mu - lambda)).epsilon(0.04));
    CHECK(std::abs(run.mec_occupancy_pmf[0] - (1 - lambda / mu)) < 0.01);
}

TEST_CASE("event log") {
    const auto net = light_load();
    const auto comp = fixtures::two_types(0.5, 0.02);
    auto o = no_thinning();
    o.num_servers = 4;
    o.fixed_connections = 2;
    const auto a = simulate_mlcm(net, comp, 50.0, 5, o);
    const auto b = simulate_mlcm(net, comp, 50.0, 5, o);
    std::ostringstream sa, sb;
    a.log.write_csv(sa);
    b.log.write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("arrival_s,server_id,queue_len_seen,sojourn_s,type_idx\n", 0) == 0);
    for (std::size_t i = 1; i < a.log.tasks.size(); ++i)
        CHECK(a.log.tasks[i].arrival_s >= a.log.tasks[i - 1].arrival_s);
    for (const auto& r : a.log.tasks) {
        CHECK(r.sojourn_s >= r.service_s - 1e-12);
        CHECK(r.server_id < 4);
        CHECK(r.arrival_s >= 5.0);
    }
    const auto c = simulate_mlcm(net, comp, 50.0, 6, o);
    CHECK(c.log.tasks.size() != a.log.tasks.size());
}

TEST_CASE("simulator errors") {
    const auto net = light_load();
    const auto comp = fixtures::one_type(1.0);
    CHECK_THROWS_AS(simulate_mlcm(net, comp, 0.0, 1), ConfigError);
    MlcmOptions o;
    o.warmup_fraction = 1.0;
    CHECK_THROWS_AS(simulate_mlcm(net, comp, 10.0, 1, o), ConfigError);
    o = no_thinning();
    o.num_servers = -1;
    CHECK_THROWS_AS(simulate_mlcm(net, comp, 10.0, 1, o), ConfigError);

    // overloaded CS
    o = no_thinning();
    o.max_queue = 50;
    CHECK_THROWS_AS(simulate_mlcm(fixtures::fig2(0.05), comp, 100.0, 1, o), StabilityError);
}

TEST_CASE("total variation") {
    CHECK(total_variation({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK(total_variation({1.0}, {0.0, 1.0}) == doctest::Approx(1.0));
    CHECK(total_variation({0.2, 0.8}, {0.4, 0.5, 0.1}) == doctest::Approx(0.3));
}
