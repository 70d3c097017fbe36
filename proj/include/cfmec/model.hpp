#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cfmec {

// Units: lengths in km, densities per km^2, rates in tasks/s, times in s.
// SIR thresholds are linear; dB conversion only happens in the CLI.

struct NetworkParams {
    double lambda_b = 0.0;          // AP density
    double lambda_d = 0.0;          // user density
    int antennas_per_ap = 1;        // M
    double alpha = 3.7;             // pathloss exponent
    double d0 = 0.001;              // reference distance (1 m)
    double coverage_radius = 0.0;   // R
    double sir_threshold_ul = 1.0;  // linear
    double sir_threshold_dl = 1.0;  // linear
    double network_area = 1.0;      // |A| in km^2
};

// Validated, immutable network description. Construction throws ConfigError
// on any invalid field.
class NetworkConfig {
public:
    explicit NetworkConfig(const NetworkParams& p);

    const NetworkParams& params() const noexcept { return p_; }

    double lambda_b() const noexcept { return p_.lambda_b; }
    double lambda_d() const noexcept { return p_.lambda_d; }
    int antennas_per_ap() const noexcept { return p_.antennas_per_ap; }
    double alpha() const noexcept { return p_.alpha; }
    double d0() const noexcept { return p_.d0; }
    double coverage_radius() const noexcept { return p_.coverage_radius; }
    double sir_threshold_ul() const noexcept { return p_.sir_threshold_ul; }
    double sir_threshold_dl() const noexcept { return p_.sir_threshold_dl; }
    double network_area() const noexcept { return p_.network_area; }

    NetworkConfig with_coverage_radius(double r) const;
    NetworkConfig with_densities(double lambda_b, double lambda_d) const;
    NetworkConfig with_antennas(int m) const;

private:
    NetworkParams p_;
};

struct ComputeParams {
    std::vector<double> type_probs;  // p_i, sums to 1
    std::vector<double> mu_c;        // CS service rate per type
    std::vector<double> mu_m;        // MEC service rate per type
    double offload_prob = 0.0;       // theta: probability of processing at the CS
    double target_latency = 0.0;     // t
};

class ComputeConfig {
public:
    explicit ComputeConfig(ComputeParams p);

    const ComputeParams& params() const noexcept { return p_; }

    std::size_t num_types() const noexcept { return p_.type_probs.size(); }
    std::span<const double> type_probs() const noexcept { return p_.type_probs; }
    std::span<const double> mu_c() const noexcept { return p_.mu_c; }
    std::span<const double> mu_m() const noexcept { return p_.mu_m; }
    double offload_prob() const noexcept { return p_.offload_prob; }
    double target_latency() const noexcept { return p_.target_latency; }

    // Harmonic-mean aggregate rates (sum_i p_i / mu_i)^-1.
    double mu_c_aggregate() const noexcept { return mu_c_agg_; }
    double mu_m_aggregate() const noexcept { return mu_m_agg_; }

    ComputeConfig with_offload_prob(double theta) const;
    ComputeConfig with_target_latency(double t) const;

private:
    ComputeParams p_;
    double mu_c_agg_ = 0.0;
    double mu_m_agg_ = 0.0;
};

struct StabilityReport {
    double rho_c = 0.0;
    double rho_m = 0.0;
    bool stable_cs = true;
    bool stable_mec = true;
};

StabilityReport stability(const ComputeConfig& comp, double lambda_c, double lambda_m);

// Bounded pathloss max(r, d0)^-alpha.
double pathloss(double r, const NetworkConfig& net);

// Expected number of APs within the coverage radius, lambda_b * pi * R^2.
double mean_connected_aps(const NetworkConfig& net);

// Linear SIR threshold for a target spectral efficiency in bit/s/Hz.
double sir_threshold_from_rate(double bits_per_hz);

}  // namespace cfmec
