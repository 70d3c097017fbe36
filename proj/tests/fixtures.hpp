#pragma once

#include <cmath>

#include "cfmec/model.hpp"

// Parameter sets shared by the unit tests.
namespace fixtures {

inline double gamma_15() { return std::pow(2.0, 1.5) - 1.0; }

// M=4, lambda_b=400, lambda_d=100, alpha=3.7, d0=1 m, 1.5 bit/s/Hz.
inline cfmec::NetworkParams fig2_params(double R = 0.05) {
    cfmec::NetworkParams p;
    p.lambda_b = 400.0;
    p.lambda_d = 100.0;
    p.antennas_per_ap = 4;
    p.alpha = 3.7;
    p.d0 = 0.001;
    p.coverage_radius = R;
    p.sir_threshold_ul = gamma_15();
    p.sir_threshold_dl = gamma_15();
    p.network_area = 4.0;
    return p;
}

inline cfmec::NetworkConfig fig2(double R = 0.05) { return cfmec::NetworkConfig(fig2_params(R)); }

// 8 f / (C_p L_u) with C_p = 330 cycles/byte, L_u = 0.5 Mbit.
inline double rate_from_ghz(double ghz) { return 8.0 * ghz * 1e9 / (330.0 * 5e5); }

inline cfmec::ComputeConfig one_type(double theta = 0.2, double t = 0.012) {
    cfmec::ComputeParams c;
    c.type_probs = {1.0};
    c.mu_c = {rate_from_ghz(4.0)};
    c.mu_m = {rate_from_ghz(1.0)};
    c.offload_prob = theta;
    c.target_latency = t;
    return cfmec::ComputeConfig(c);
}

inline cfmec::ComputeConfig two_types(double theta = 0.2, double t = 0.012) {
    cfmec::ComputeParams c;
    c.type_probs = {0.6, 0.4};
    c.mu_c = {rate_from_ghz(4.0), rate_from_ghz(5.0)};
    c.mu_m = {rate_from_ghz(1.0), rate_from_ghz(3.4)};
    c.offload_prob = theta;
    c.target_latency = t;
    return cfmec::ComputeConfig(c);
}

}  // namespace fixtures
