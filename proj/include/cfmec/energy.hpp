#pragma once

#include <vector>

#include "cfmec/model.hpp"
#include "cfmec/secp.hpp"
#include "cfmec/specfun.hpp"

namespace cfmec::energy {

// Circuit power (W), bandwidth (Hz), payloads (bits) and server energy
// parameters. Frequencies are per task type, in cycles/s.
struct EnergyParams {
    double p_rf_ap = 0.01;         // RF chain per AP antenna
    double p_rf_user = 0.01;       // RF chain at the user
    double p_osc = 2.0;            // local oscillator
    double p_cod = 0.1e-9;         // channel coding, W per bit/s
    double p_dec = 0.8e-9;         // channel decoding, W per bit/s
    double p_user_tx = 0.1;        // user transmit power
    double p_ap_tx = 1.181;        // AP transmit power
    double p_user_fixed = 0.1;
    double p_ap_fixed = 5.0;
    double pa_efficiency = 0.39;   // the printed PA factor multiplies by its inverse
    double energy_per_op = 1e-9;   // J per complex operation
    double bandwidth = 1e6;
    double uplink_bits = 5e5;
    double downlink_bits = 5e4;
    std::vector<double> f_mec{1e9, 3.4e9};
    std::vector<double> f_cs{4e9, 5e9};
    double kappa_m = 1e-27;        // J/cycle
    double kappa_c = 1e-26;
    double cycles_per_byte = 330.0;
    double delta = 3.0;
};

class EnergyConfig {
public:
    explicit EnergyConfig(EnergyParams p);

    const EnergyParams& params() const noexcept { return p_; }
    double pa_inverse_efficiency() const noexcept { return 1.0 / p_.pa_efficiency; }

    // Service rate 8 f / (C_p L_u) of a server running at f cycles/s.
    double service_rate(double f) const noexcept;

    // Keeps only the listed task types' frequencies, e.g. {0} for the
    // single-type setting.
    EnergyConfig with_types(const std::vector<std::size_t>& idx) const;

private:
    EnergyParams p_;
};

// ComputeConfig whose service rates follow from the configured frequencies.
ComputeConfig compute_from_frequencies(const EnergyConfig& ec, std::vector<double> type_probs,
                                       double theta, double target_latency);

struct EnergyBreakdown {
    double e_comp = 0.0;
    double e_comm = 0.0;
    double e_total = 0.0;
    double p_ul = 0.0;
    double p_dl = 0.0;
    double t_ul = 0.0;
    double t_dl = 0.0;
};

// theta kappa_c sum p f_cs^delta / mu_c + (1 - theta) kappa_m sum p f_mec^delta / mu_m.
// The service rates are taken from comp; ConfigError if the number of
// frequencies does not match the number of task types.
double computation_energy(const ComputeConfig& comp, const EnergyConfig& ec);

// Fills p_ul, p_dl, t_ul, t_dl and e_comm.
EnergyBreakdown communication_energy(const NetworkConfig& net, const EnergyConfig& ec);

EnergyBreakdown energy_breakdown(const NetworkConfig& net, const ComputeConfig& comp,
                                 const EnergyConfig& ec);

struct EnergySearchOptions {
    double r_lo = 0.005;
    double r_hi = 0.2;
    int scan_points = 16;
    double r_tol = 1e-5;      // km
    double theta_tol = 1e-6;
};

struct EnergyOptimum {
    double coverage_radius = 0.0;
    double theta = 0.0;
    double secp = 0.0;
    EnergyBreakdown energy;
};

// Smallest R whose best SECP over theta reaches xi, then the cheapest theta
// keeping SECP >= xi at that R. Throws InfeasibleError carrying the largest
// SECP seen when xi is out of reach. The frontier caches per-R work and can
// be reused across xi values.
EnergyOptimum minimize_energy(edge::SecpFrontier& frontier, const EnergyConfig& ec, double xi,
                              const EnergySearchOptions& opt = {});
EnergyOptimum minimize_energy(const NetworkConfig& net, const ComputeConfig& comp,
                              const EnergyConfig& ec, double xi, const EnergySearchOptions& opt = {},
                              const specfun::NumericalSettings& ns = {});

}  // namespace cfmec::energy
