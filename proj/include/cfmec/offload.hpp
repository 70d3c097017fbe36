#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cfmec/model.hpp"
#include "cfmec/specfun.hpp"

namespace cfmec::offload {

struct ArrivalRates {
    double lambda_c = 0.0;  // at the CS
    double lambda_m = 0.0;  // executed by one MEC server
    double lambda_o = 0.0;  // offered to one MEC server's coverage
};

// Probability that a tagged MEC server is the one picked among its
// Poisson(mean_aps) neighbours plus itself: (1 - e^-m) / m, 1 at m = 0.
double min_load_selection_prob(double mean_aps);

ArrivalRates arrival_rates(const NetworkConfig& net, const ComputeConfig& comp, double uplink_outage);

// Open interval of theta for which both queues are stable.
struct ThetaInterval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double theta) const { return theta > lo && theta < hi; }
    bool empty() const { return !(hi > lo); }
};

// lo is where the MEC load hits capacity, hi where the CS load does. A bound
// outside [0,1] means that side is stable for every theta.
ThetaInterval stable_theta_interval(const NetworkConfig& net, const ComputeConfig& comp,
                                    double uplink_outage);

// Queue-length distribution of the M/H/1 MEC queue written as a mixture of
// geometrics: P[N = v] = sum_i eps_i omega_i^v.
class QueueSpectrum {
public:
    QueueSpectrum() = default;
    QueueSpectrum(std::vector<double> omega, std::vector<double> eps, double rho,
                  std::vector<double> residuals);

    std::span<const double> omega() const noexcept { return omega_; }
    std::span<const double> eps() const noexcept { return eps_; }
    double rho() const noexcept { return rho_; }
    std::span<const double> residuals() const noexcept { return residuals_; }
    double max_omega() const noexcept;

    double pmf(std::size_t v) const;
    // P[N >= v] = sum_i eps_i omega_i^v / (1 - omega_i)
    double tail(std::size_t v) const;

private:
    std::vector<double> omega_;
    std::vector<double> eps_;
    double rho_ = 0.0;
    std::vector<double> residuals_;
};

// Throws StabilityError when rho_m >= 1, NumericalError on bad roots and
// ConsistencyError when the resulting pmf fails normalization or positivity.
QueueSpectrum queue_spectrum(const ComputeConfig& comp, double lambda_m);

// pmf of the minimum of n independent queue lengths with this spectrum.
double min_queue_pmf(const QueueSpectrum& q, int n, std::size_t v);

// P[T_c <= t] for the M/H/1 CS queue, inverted numerically.
double scp_cs(const ComputeConfig& comp, double lambda_c,
              const specfun::LaplaceInversionSettings& ls = {});

// P[T_mec <= t | N = n] with per-v CDFs of (v+1)-fold service sums cached.
class MecLatency {
public:
    MecLatency(const ComputeConfig& comp, QueueSpectrum spectrum,
               const specfun::NumericalSettings& ns = {});

    const QueueSpectrum& spectrum() const noexcept { return q_; }

    // P[T_mec <= t | N = n], n >= 1.
    double given_n(int n);
    // sum_{n>=1} Poisson(n; mean_aps) given_n(n).
    double mixture(double mean_aps);
    // CDF at the target latency of the sum of v+1 service times.
    double service_sum_cdf(std::size_t v);

private:
    const ComputeConfig* comp_;
    QueueSpectrum q_;
    specfun::NumericalSettings ns_;
    std::vector<double> cdf_cache_;
};

// Closed form for one task type: sum_{n>=1} Poisson(n; m) (1 - e^{-mu t (1 - rho^n)}).
double scp_mec_exponential(double mu_m, double rho_m, double t, double mean_aps,
                           double tail_tol = 1e-10);

// Unconditional P[T_mec <= t], mixture over the number of connected APs.
double scp_mec(const NetworkConfig& net, const ComputeConfig& comp, double lambda_m,
               const specfun::NumericalSettings& ns = {});

// theta P[T_c <= t] + (1 - theta) P[T_mec <= t].
double scp(const NetworkConfig& net, const ComputeConfig& comp, double uplink_outage,
           const specfun::NumericalSettings& ns = {});
double scp(const NetworkConfig& net, const ComputeConfig& comp,
           const specfun::NumericalSettings& ns = {});

struct ThetaOptimum {
    double theta = 0.0;
    double value = 0.0;
};

// Grid scan over stable theta values followed by golden-section refinement
// around the best grid point. objective(theta) is maximized.
template <class Objective>
ThetaOptimum maximize_over_theta(Objective&& objective, std::span<const double> grid,
                                 ThetaInterval feasible, double tol = 1e-4);

ThetaOptimum optimal_theta(const NetworkConfig& net, const ComputeConfig& comp,
                           std::span<const double> theta_grid, double uplink_outage,
                           const specfun::NumericalSettings& ns = {});

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

}  // namespace cfmec::offload

#include "cfmec/detail/theta_search.hpp"
