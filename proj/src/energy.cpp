#include "cfmec/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"
#include "cfmec/offload.hpp"

namespace cfmec::energy {

EnergyConfig::EnergyConfig(EnergyParams p) : p_(std::move(p)) {
    const double scalars[] = {p_.p_rf_ap,       p_.p_rf_user,     p_.p_osc,        p_.p_cod,
                              p_.p_dec,         p_.p_user_tx,     p_.p_ap_tx,      p_.p_user_fixed,
                              p_.p_ap_fixed,    p_.energy_per_op, p_.bandwidth,    p_.uplink_bits,
                              p_.downlink_bits, p_.kappa_m,       p_.kappa_c,      p_.cycles_per_byte};
    for (double v : scalars)
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("EnergyConfig: parameters must be positive");
    if (!(p_.pa_efficiency > 0.0 && p_.pa_efficiency <= 1.0))
        throw ConfigError("EnergyConfig: PA efficiency must lie in (0, 1]");
    if (!(p_.delta >= 1.0)) throw ConfigError("EnergyConfig: delta must be >= 1");
    if (p_.f_mec.empty() || p_.f_mec.size() != p_.f_cs.size())
        throw ConfigError("EnergyConfig: need one MEC and one CS frequency per task type");
    for (double f : p_.f_mec)
        if (!(f > 0.0)) throw ConfigError("EnergyConfig: frequencies must be positive");
    for (double f : p_.f_cs)
        if (!(f > 0.0)) throw ConfigError("EnergyConfig: frequencies must be positive");
}

double EnergyConfig::service_rate(double f) const noexcept {
    return 8.0 * f / (p_.cycles_per_byte * p_.uplink_bits);
}

EnergyConfig EnergyConfig::with_types(const std::vector<std::size_t>& idx) const {
    EnergyParams q = p_;
    q.f_mec.clear();
    q.f_cs.clear();
    for (std::size_t i : idx) {
        if (i >= p_.f_mec.size()) throw ConfigError("EnergyConfig::with_types: type index out of range");
        q.f_mec.push_back(p_.f_mec[i]);
        q.f_cs.push_back(p_.f_cs[i]);
    }
    return EnergyConfig(std::move(q));
}

ComputeConfig compute_from_frequencies(const EnergyConfig& ec, std::vector<double> type_probs,
                                       double theta, double target_latency) {
    const auto& p = ec.params();
    if (type_probs.size() != p.f_mec.size())
        throw ConfigError("compute_from_frequencies: type count does not match the frequencies");
    ComputeParams cp;
    cp.type_probs = std::move(type_probs);
    for (std::size_t i = 0; i < p.f_mec.size(); ++i) {
        cp.mu_c.push_back(ec.service_rate(p.f_cs[i]));
        cp.mu_m.push_back(ec.service_rate(p.f_mec[i]));
    }
    cp.offload_prob = theta;
    cp.target_latency = target_latency;
    return ComputeConfig(std::move(cp));
}

double computation_energy(const ComputeConfig& comp, const EnergyConfig& ec) {
    const auto& p = ec.params();
    if (p.f_mec.size() != comp.num_types())
        throw ConfigError("computation_energy: one frequency pair per task type is required");
    const auto probs = comp.type_probs();
    double cs = 0.0, mec = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cs += probs[i] * std::pow(p.f_cs[i], p.delta) / comp.mu_c()[i];
        mec += probs[i] * std::pow(p.f_mec[i], p.delta) / comp.mu_m()[i];
    }
    const double theta = comp.offload_prob();
    return theta * p.kappa_c * cs + (1.0 - theta) * p.kappa_m * mec;
}

EnergyBreakdown communication_energy(const NetworkConfig& net, const EnergyConfig& ec) {
    const auto& p = ec.params();
    const double aps = mean_connected_aps(net);
    const double M = net.antennas_per_ap();
    const double B = p.bandwidth;
    const double ru = std::log2(1.0 + net.sir_threshold_ul());
    const double rd = std::log2(1.0 + net.sir_threshold_dl());
    const double zeta = ec.pa_inverse_efficiency();
    const double per_antenna = p.p_rf_ap + 2.0 * p.energy_per_op * B;  // RF chain + MRC/MRT ops

    EnergyBreakdown e;
    e.p_ul = aps * (M * per_antenna + B * ru * p.p_dec) + p.p_user_fixed + p.p_rf_user + B * ru * p.p_cod +
             p.p_user_tx * zeta;
    e.p_dl = aps * (zeta * p.p_ap_tx + p.p_ap_fixed + p.p_osc + M * per_antenna + B * rd * p.p_cod) +
             p.p_dec * B * rd + p.p_rf_user;
    e.t_ul = p.uplink_bits / (ru * B);
    e.t_dl = p.downlink_bits / (rd * B);
    e.e_comm = e.p_ul * e.t_ul + e.p_dl * e.t_dl;
    e.e_total = e.e_comm;
    return e;
}

EnergyBreakdown energy_breakdown(const NetworkConfig& net, const ComputeConfig& comp, const EnergyConfig& ec) {
    auto e = communication_energy(net, ec);
    e.e_comp = computation_energy(comp, ec);
    e.e_total = e.e_comp + e.e_comm;
    return e;
}

namespace {

std::string infeasible_message(double xi, double best) {
    std::ostringstream os;
    os << "minimize_energy: SECP target " << xi << " is out of reach; best achievable " << best;
    return os.str();
}

}  // namespace

EnergyOptimum minimize_energy(edge::SecpFrontier& frontier, const EnergyConfig& ec, double xi,
                              const EnergySearchOptions& opt) {
    if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("minimize_energy: xi must lie in (0, 1)");
    if (!(opt.r_lo > 0.0 && opt.r_hi > opt.r_lo)) throw ConfigError("minimize_energy: need 0 < r_lo < r_hi");
    if (opt.scan_points < 3) throw ConfigError("minimize_energy: need at least 3 scan points");
    auto f = [&](double R) { return frontier(R).secp; };

    // Feasibility scan. The first scan point reaching xi bounds R* from above.
    const auto scan = offload::uniform_grid(opt.r_lo, opt.r_hi, static_cast<std::size_t>(opt.scan_points));
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < scan.size() && !found; ++i) {
        if (f(scan[i]) >= xi) {
            found = true;
            hi = scan[i];
            lo = i > 0 ? scan[i - 1] : scan[i];
        }
    }
    if (!found) {
        // The peak may fall between scan points.
        const auto peak = edge::find_r_threshold(frontier, opt.r_lo, opt.r_hi, opt.scan_points, opt.r_tol);
        if (peak.secp < xi) throw InfeasibleError(infeasible_message(xi, peak.secp), peak.secp);
        hi = peak.coverage_radius;
        lo = opt.r_lo;
        for (double r : scan)
            if (r < hi) lo = r;
    }
    while (hi - lo > opt.r_tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= xi ? hi : lo) = mid;
    }

    EnergyOptimum out;
    out.coverage_radius = hi;
    const auto best = frontier(hi);
    const auto net = frontier.network().with_coverage_radius(hi);
    const auto& comp = frontier.compute();
    const auto& ns = frontier.settings();
    const auto profile = comm::comm_profile(net, ns);
    auto g = [&](double th) {
        try {
            return edge::secp(profile, net, comp.with_offload_prob(th), ns).value;
        } catch (const StabilityError&) {
            return -1.0;
        }
    };

    // E_comp is affine in theta, so the cheapest feasible theta is one end of
    // the feasible interval around the SECP-maximizing theta.
    const double slope = computation_energy(comp.with_offload_prob(1.0), ec) -
                         computation_energy(comp.with_offload_prob(0.0), ec);
    auto edge_of_feasible = [&](double outer) {
        if (g(outer) >= xi) return outer;
        double in = best.theta, out_ = outer;
        while (std::abs(in - out_) > opt.theta_tol) {
            const double mid = 0.5 * (in + out_);
            (g(mid) >= xi ? in : out_) = mid;
        }
        return in;
    };
    const auto iv = offload::stable_theta_interval(net, comp, profile.uplink_outage);
    const double th_low = edge_of_feasible(std::max(0.0, iv.lo));
    const double th_high = edge_of_feasible(std::min(1.0, iv.hi));
    out.theta = slope > 0.0 ? th_low : th_high;
    if (slope == 0.0) out.theta = th_low;
    out.secp = g(out.theta);
    out.energy = energy_breakdown(net, comp.with_offload_prob(out.theta), ec);
    return out;
}

EnergyOptimum minimize_energy(const NetworkConfig& net, const ComputeConfig& comp, const EnergyConfig& ec,
                              double xi, const EnergySearchOptions& opt, const specfun::NumericalSettings& ns) {
    edge::SecpFrontier frontier(net, comp, offload::uniform_grid(0.0, 1.0, 21), ns);
    return minimize_energy(frontier, ec, xi, opt);
}

}  // namespace cfmec::energy
