#include "cfmec/secp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "cfmec/errors.hpp"

namespace cfmec::edge {

SecpPoint secp(const comm::CommProfile& profile, const NetworkConfig& net, const ComputeConfig& comp,
               const specfun::NumericalSettings& ns) {
    SecpPoint pt;
    pt.coverage_radius = net.coverage_radius();
    pt.theta = comp.offload_prob();
    pt.target_latency = comp.target_latency();
    pt.downlink = 1.0 - profile.downlink.point;
    const double m = profile.mean_aps;
    if (!(m > 0.0)) return pt;

    const auto rates = offload::arrival_rates(net, comp, profile.uplink_outage);
    const double theta = comp.offload_prob();
    const double pc = theta > 0.0 ? offload::scp_cs(comp, rates.lambda_c, ns.laplace) : 0.0;
    std::optional<offload::MecLatency> mec;
    if (theta < 1.0) mec.emplace(comp, offload::queue_spectrum(comp, rates.lambda_m), ns);

    const double miss = 1.0 - profile.ap_success;
    const int n_max = static_cast<int>(std::ceil(m + 12.0 * std::sqrt(m) + 30.0));
    double weighted = 0.0;
    double uplink = 0.0;
    for (int n = 1;; ++n) {
        const double w = std::exp(n * std::log(m) - m - std::lgamma(n + 1.0));
        if (w > 1e-300) {
            const double up = 1.0 - std::pow(miss, n);
            const double pm = mec ? mec->given_n(n) : 0.0;
            weighted += w * up * (theta * pc + (1.0 - theta) * pm);
            uplink += w * up;
        }
        if (n >= m && boost::math::gamma_p(n + 1.0, m) < ns.tail_tol) break;
        if (n > n_max) throw NumericalError("secp: Poisson sum over connected APs did not converge");
    }
    pt.uplink = uplink;
    pt.computation = uplink > 0.0 ? weighted / uplink : 0.0;
    pt.value = std::clamp(weighted * pt.downlink, 0.0, 1.0);
    return pt;
}

SecpPoint secp(const NetworkConfig& net, const ComputeConfig& comp, const specfun::NumericalSettings& ns) {
    return secp(comm::comm_profile(net, ns), net, comp, ns);
}

ThetaBest best_theta(const comm::CommProfile& profile, const NetworkConfig& net,
                     const ComputeConfig& comp, std::span<const double> theta_grid,
                     const specfun::NumericalSettings& ns) {
    const auto feasible = offload::stable_theta_interval(net, comp, profile.uplink_outage);
    const auto opt = offload::maximize_over_theta(
        [&](double th) { return secp(profile, net, comp.with_offload_prob(th), ns).value; },
        theta_grid, feasible);
    return {opt.theta, opt.value};
}

SecpFrontier::SecpFrontier(NetworkConfig net, ComputeConfig comp, std::vector<double> theta_grid,
                           specfun::NumericalSettings ns)
    : net_(std::move(net)), comp_(std::move(comp)), grid_(std::move(theta_grid)), ns_(ns) {}

ThetaBest SecpFrontier::operator()(double R) {
    if (auto it = seen_.find(R); it != seen_.end()) return it->second;
    const auto n = net_.with_coverage_radius(R);
    ThetaBest b;
    try {
        b = best_theta(comm::comm_profile(n, ns_), n, comp_, grid_, ns_);
    } catch (const StabilityError&) {
        b = {std::numeric_limits<double>::quiet_NaN(), -1.0};
    }
    ++evaluations_;
    seen_.emplace(R, b);
    return b;
}

RThreshold find_r_threshold(SecpFrontier& frontier, double r_lo, double r_hi, int prescan_points,
                            double r_tol) {
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw ConfigError("find_r_threshold: need 0 < r_lo < r_hi");
    if (prescan_points < 3) throw ConfigError("find_r_threshold: need at least 3 pre-scan points");
    const int evals0 = frontier.evaluations();
    auto f = [&](double R) { return frontier(R).secp; };

    const auto scan = offload::uniform_grid(r_lo, r_hi, static_cast<std::size_t>(prescan_points));
    std::size_t k = 0;
    double best = -2.0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double v = f(scan[i]);
        if (v > best) {
            best = v;
            k = i;
        }
    }
    if (best < 0.0) throw StabilityError("find_r_threshold: no stable (R, theta) in the search range");

    double a = scan[k > 0 ? k - 1 : 0];
    double b = scan[std::min(k + 1, scan.size() - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > r_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    RThreshold out;
    out.secp = -1.0;
    for (const auto& [R, tb] : frontier.seen()) {
        if (R < r_lo || R > r_hi) continue;
        if (tb.secp > out.secp) {
            out.coverage_radius = R;
            out.theta = tb.theta;
            out.secp = tb.secp;
        }
    }
    out.radius_evaluations = frontier.evaluations() - evals0;
    return out;
}

RThreshold find_r_threshold(const NetworkConfig& net, const ComputeConfig& comp,
                            const RSearchOptions& opt, const specfun::NumericalSettings& ns) {
    SecpFrontier frontier(net, comp, opt.theta_grid, ns);
    return find_r_threshold(frontier, opt.r_lo, opt.r_hi, opt.prescan_points, opt.r_tol);
}

}  // namespace cfmec::edge
