#include "cfmec/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cfmec/errors.hpp"

namespace cfmec {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

double harmonic_rate(std::span<const double> probs, std::span<const double> rates) {
    double inv = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) inv += probs[i] / rates[i];
    return 1.0 / inv;
}

}  // namespace

NetworkConfig::NetworkConfig(const NetworkParams& p) : p_(p) {
    require(finite_nonneg(p.lambda_b), "lambda_b must be a finite value >= 0");
    require(finite_nonneg(p.lambda_d), "lambda_d must be a finite value >= 0");
    require(p.antennas_per_ap >= 1, "antennas_per_ap must be >= 1");
    require(std::isfinite(p.alpha) && p.alpha > 2.0, "alpha must be > 2");
    require(std::isfinite(p.d0) && p.d0 > 0.0, "d0 must be > 0");
    require(finite_nonneg(p.coverage_radius), "coverage_radius must be >= 0");
    require(std::isfinite(p.sir_threshold_ul) && p.sir_threshold_ul > 0.0,
            "sir_threshold_ul must be > 0");
    require(std::isfinite(p.sir_threshold_dl) && p.sir_threshold_dl > 0.0,
            "sir_threshold_dl must be > 0");
    require(std::isfinite(p.network_area) && p.network_area > 0.0, "network_area must be > 0");
}

NetworkConfig NetworkConfig::with_coverage_radius(double r) const {
    NetworkParams p = p_;
    p.coverage_radius = r;
    return NetworkConfig(p);
}

NetworkConfig NetworkConfig::with_densities(double lambda_b, double lambda_d) const {
    NetworkParams p = p_;
    p.lambda_b = lambda_b;
    p.lambda_d = lambda_d;
    return NetworkConfig(p);
}

NetworkConfig NetworkConfig::with_antennas(int m) const {
    NetworkParams p = p_;
    p.antennas_per_ap = m;
    return NetworkConfig(p);
}

ComputeConfig::ComputeConfig(ComputeParams p) : p_(std::move(p)) {
    const std::size_t n = p_.type_probs.size();
    require(n >= 1, "at least one task type is required");
    require(p_.mu_c.size() == n && p_.mu_m.size() == n,
            "type_probs, mu_c and mu_m must have the same length");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(finite_nonneg(p_.type_probs[i]), "type probabilities must be >= 0");
        require(std::isfinite(p_.mu_c[i]) && p_.mu_c[i] > 0.0, "mu_c entries must be > 0");
        require(std::isfinite(p_.mu_m[i]) && p_.mu_m[i] > 0.0, "mu_m entries must be > 0");
        total += p_.type_probs[i];
    }
    require(std::abs(total - 1.0) <= 1e-12, "type probabilities must sum to 1");
    require(std::isfinite(p_.offload_prob) && p_.offload_prob >= 0.0 && p_.offload_prob <= 1.0,
            "offload_prob must lie in [0, 1]");
    require(std::isfinite(p_.target_latency) && p_.target_latency > 0.0,
            "target_latency must be > 0");
    mu_c_agg_ = harmonic_rate(p_.type_probs, p_.mu_c);
    mu_m_agg_ = harmonic_rate(p_.type_probs, p_.mu_m);
    require(mu_c_agg_ > 0.0 && mu_m_agg_ > 0.0, "aggregate service rates must be > 0");
}

ComputeConfig ComputeConfig::with_offload_prob(double theta) const {
    ComputeParams p = p_;
    p.offload_prob = theta;
    return ComputeConfig(std::move(p));
}

ComputeConfig ComputeConfig::with_target_latency(double t) const {
    ComputeParams p = p_;
    p.target_latency = t;
    return ComputeConfig(std::move(p));
}

StabilityReport stability(const ComputeConfig& comp, double lambda_c, double lambda_m) {
    StabilityReport r;
    r.rho_c = lambda_c / comp.mu_c_aggregate();
    r.rho_m = lambda_m / comp.mu_m_aggregate();
    r.stable_cs = r.rho_c < 1.0;
    r.stable_mec = r.rho_m < 1.0;
    return r;
}

double pathloss(double r, const NetworkConfig& net) {
    return std::pow(std::max(r, net.d0()), -net.alpha());
}

double mean_connected_aps(const NetworkConfig& net) {
    const double r = net.coverage_radius();
    return net.lambda_b() * std::numbers::pi * r * r;
}

double sir_threshold_from_rate(double bits_per_hz) { return std::exp2(bits_per_hz) - 1.0; }

}  // namespace cfmec
