#pragma once

#include <vector>

#include "cfmec/model.hpp"
#include "cfmec/specfun.hpp"

namespace cfmec::comm {

// Derivatives at s of the interference Laplace transform L_I = F1 * F2,
// where F1 covers interferers inside the pathloss plateau (r < d0) and F2
// the ones outside. Index m holds the m-th derivative.
struct LaplaceDerivativeTable {
    double s = 0.0;
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<double> laplace;
};

LaplaceDerivativeTable uplink_laplace_derivs(double s, int max_order, const NetworkConfig& net);

// Probability that a single AP at distance r decodes the uplink signal,
// sum_{m<M} (-s)^m / m! L_I^(m)(s) with s = gamma_ul / pathloss(r).
double uplink_ap_success(double r, const NetworkConfig& net);

// Average per-AP success over a connected AP placed uniformly in the disc of
// radius R: (2/R^2) int_0^R r * uplink_ap_success(r) dr.
double mean_ap_success(const NetworkConfig& net, const specfun::NumericalSettings& ns = {});

// Probability that no connected AP decodes the uplink signal.
double uplink_outage(const NetworkConfig& net, const specfun::NumericalSettings& ns = {});

// Gamma fit of the downlink interference power.
struct GammaInterferenceParams {
    double shape = 0.0;  // zeta(R)
    double scale = 0.0;  // eta
};

GammaInterferenceParams gamma_interference_params(const NetworkConfig& net);

// Exact mean and variance of the downlink interference power.
double interference_mean(const NetworkConfig& net);
double interference_variance(const NetworkConfig& net);

// rho(s) and its derivatives, the exponent of the Laplace transform of the
// total received downlink power (L_P = exp(-2 pi lambda_b rho)).
struct RhoDerivativeTable {
    double s = 0.0;
    std::vector<double> values;  // values[0] = rho, values[m] = rho^(m)
};

RhoDerivativeTable rho_derivs(double s, int max_order, const NetworkConfig& net,
                              const specfun::NumericalSettings& ns = {});

struct DownlinkOutage {
    double lower = 0.0;  // series truncated at floor(zeta)
    double upper = 0.0;  // series truncated at ceil(zeta)
    double point = 0.0;  // linear interpolation in zeta between the two
    double zeta = 0.0;
    bool degenerate = false;  // zeta == 0: no interference
    bool clamped = false;     // a raw value left [0,1] by more than the warn threshold
};

DownlinkOutage downlink_outage(const NetworkConfig& net, const specfun::NumericalSettings& ns = {});

// Successful communication probability (1 - p_ul)(1 - p_dl point).
double scmp(const NetworkConfig& net, const specfun::NumericalSettings& ns = {});

// Everything the computation layer needs from the radio side at one R.
struct CommProfile {
    double coverage_radius = 0.0;
    double mean_aps = 0.0;      // lambda_b pi R^2
    double ap_success = 0.0;    // mean_ap_success
    double uplink_outage = 1.0;
    DownlinkOutage downlink;
    double scmp = 0.0;
};

CommProfile comm_profile(const NetworkConfig& net, const specfun::NumericalSettings& ns = {});

}  // namespace cfmec::comm
