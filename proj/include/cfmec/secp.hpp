#pragma once

#include <map>
#include <span>
#include <vector>

#include "cfmec/comm.hpp"
#include "cfmec/model.hpp"
#include "cfmec/offload.hpp"
#include "cfmec/specfun.hpp"

namespace cfmec::edge {

// SECP at one (R, theta, t). The value factorizes exactly as
// computation * uplink * downlink, where
//   uplink      = sum_n Poisson(n) (1 - (1 - p0)^n) = 1 - p_ul
//   computation = uplink-weighted mean of P[T_comp <= t | N = n]
//   downlink    = 1 - p_dl (point estimate)
struct SecpPoint {
    double coverage_radius = 0.0;
    double theta = 0.0;
    double target_latency = 0.0;
    double value = 0.0;
    double computation = 0.0;
    double uplink = 0.0;
    double downlink = 0.0;
};

SecpPoint secp(const comm::CommProfile& profile, const NetworkConfig& net, const ComputeConfig& comp,
               const specfun::NumericalSettings& ns = {});
SecpPoint secp(const NetworkConfig& net, const ComputeConfig& comp,
               const specfun::NumericalSettings& ns = {});

// Largest SECP over theta at a fixed radius, theta restricted to stable values.
struct ThetaBest {
    double theta = 0.0;
    double secp = 0.0;
};

ThetaBest best_theta(const comm::CommProfile& profile, const NetworkConfig& net,
                     const ComputeConfig& comp, std::span<const double> theta_grid,
                     const specfun::NumericalSettings& ns = {});

// max_theta secp as a function of R, memoized. A radius where every theta is
// unstable maps to secp = -1.
class SecpFrontier {
public:
    SecpFrontier(NetworkConfig net, ComputeConfig comp,
                 std::vector<double> theta_grid = offload::uniform_grid(0.0, 1.0, 21),
                 specfun::NumericalSettings ns = {});

    ThetaBest operator()(double R);

    const NetworkConfig& network() const noexcept { return net_; }
    const ComputeConfig& compute() const noexcept { return comp_; }
    std::span<const double> theta_grid() const noexcept { return grid_; }
    const specfun::NumericalSettings& settings() const noexcept { return ns_; }
    int evaluations() const noexcept { return evaluations_; }
    const std::map<double, ThetaBest>& seen() const noexcept { return seen_; }

private:
    NetworkConfig net_;
    ComputeConfig comp_;
    std::vector<double> grid_;
    specfun::NumericalSettings ns_;
    std::map<double, ThetaBest> seen_;
    int evaluations_ = 0;
};

struct RThreshold {
    double coverage_radius = 0.0;
    double theta = 0.0;
    double secp = 0.0;
    int radius_evaluations = 0;
};

struct RSearchOptions {
    double r_lo = 0.01;
    double r_hi = 0.2;
    int prescan_points = 8;
    double r_tol = 1e-4;  // km
    std::vector<double> theta_grid = offload::uniform_grid(0.0, 1.0, 21);
};

// Coarse pre-scan over R, then golden-section refinement around the best
// scan point with the theta maximization nested inside.
RThreshold find_r_threshold(const NetworkConfig& net, const ComputeConfig& comp,
                            const RSearchOptions& opt = {},
                            const specfun::NumericalSettings& ns = {});
RThreshold find_r_threshold(SecpFrontier& frontier, double r_lo, double r_hi, int prescan_points = 8,
                            double r_tol = 1e-4);

}  // namespace cfmec::edge
