#include "cfmec/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"
#include "cfmec/offload.hpp"
#include "cfmec/secp.hpp"
#include "cfmec/sim.hpp"

#ifndef CFMEC_VERSION
#define CFMEC_VERSION "0.0.0"
#endif

namespace cfmec::cli {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

const std::map<std::string, Kind>& kind_table() {
    static const std::map<std::string, Kind> t{
        {"scmp_vs_R", Kind::scmp_vs_R},       {"scp_surface", Kind::scp_surface},
        {"secp_surface", Kind::secp_surface}, {"r_threshold", Kind::r_threshold},
        {"energy_vs_xi", Kind::energy_vs_xi}, {"validate", Kind::validate}};
    return t;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

// A grid is either a list of numbers or {"from", "to", "points"}.
std::vector<double> read_grid(const json& j, const std::string& name) {
    std::vector<double> g;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("grid '" + name + "' must hold numbers");
            g.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        check_keys(j, "grid '" + name + "'", {"from", "to", "points"});
        const auto pts = value_or<int>(j, "points", 0);
        if (pts < 1 || !j.contains("from") || !j.contains("to"))
            throw ConfigError("grid '" + name + "' needs from, to and points >= 1");
        g = offload::uniform_grid(j["from"].get<double>(), j["to"].get<double>(), static_cast<std::size_t>(pts));
    } else {
        throw ConfigError("grid '" + name + "' must be a list or {from, to, points}");
    }
    if (g.empty()) throw ConfigError("grid '" + name + "' is empty");
    return g;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

NetworkParams read_network(const json& j) {
    check_keys(j, "network",
               {"lambda_b", "lambda_d", "antennas_per_ap", "alpha", "d0_km", "coverage_radius_km",
                "network_area_km2", "rate_bps_hz", "sir_threshold_db", "sir_threshold_ul_db",
                "sir_threshold_dl_db", "sir_threshold_ul", "sir_threshold_dl"});
    NetworkParams p;
    p.lambda_b = value_or(j, "lambda_b", 400.0);
    p.lambda_d = value_or(j, "lambda_d", 100.0);
    p.antennas_per_ap = value_or(j, "antennas_per_ap", 4);
    p.alpha = value_or(j, "alpha", 3.7);
    p.d0 = value_or(j, "d0_km", 0.001);
    p.coverage_radius = value_or(j, "coverage_radius_km", 0.05);
    p.network_area = value_or(j, "network_area_km2", 4.0);
    // The rate anchor is exact; a dB value is an explicit override.
    double ul = sir_threshold_from_rate(value_or(j, "rate_bps_hz", 1.5));
    double dl = ul;
    if (j.contains("sir_threshold_db")) ul = dl = db_to_linear(j["sir_threshold_db"].get<double>());
    if (j.contains("sir_threshold_ul_db")) ul = db_to_linear(j["sir_threshold_ul_db"].get<double>());
    if (j.contains("sir_threshold_dl_db")) dl = db_to_linear(j["sir_threshold_dl_db"].get<double>());
    p.sir_threshold_ul = value_or(j, "sir_threshold_ul", ul);
    p.sir_threshold_dl = value_or(j, "sir_threshold_dl", dl);
    (void)NetworkConfig(p);  // validates
    return p;
}

energy::EnergyParams read_energy(const json& j) {
    check_keys(j, "energy",
               {"p_rf_ap", "p_rf_user", "p_osc", "p_cod", "p_dec", "p_user_tx", "p_ap_tx", "p_user_fixed",
                "p_ap_fixed", "pa_efficiency", "energy_per_op", "bandwidth_hz", "uplink_bits", "downlink_bits",
                "f_mec", "f_cs", "kappa_m", "kappa_c", "cycles_per_byte", "delta"});
    energy::EnergyParams e;
    e.p_rf_ap = value_or(j, "p_rf_ap", e.p_rf_ap);
    e.p_rf_user = value_or(j, "p_rf_user", e.p_rf_user);
    e.p_osc = value_or(j, "p_osc", e.p_osc);
    e.p_cod = value_or(j, "p_cod", e.p_cod);
    e.p_dec = value_or(j, "p_dec", e.p_dec);
    e.p_user_tx = value_or(j, "p_user_tx", e.p_user_tx);
    e.p_ap_tx = value_or(j, "p_ap_tx", e.p_ap_tx);
    e.p_user_fixed = value_or(j, "p_user_fixed", e.p_user_fixed);
    e.p_ap_fixed = value_or(j, "p_ap_fixed", e.p_ap_fixed);
    e.pa_efficiency = value_or(j, "pa_efficiency", e.pa_efficiency);
    e.energy_per_op = value_or(j, "energy_per_op", e.energy_per_op);
    e.bandwidth = value_or(j, "bandwidth_hz", e.bandwidth);
    e.uplink_bits = value_or(j, "uplink_bits", e.uplink_bits);
    e.downlink_bits = value_or(j, "downlink_bits", e.downlink_bits);
    e.f_mec = value_or(j, "f_mec", e.f_mec);
    e.f_cs = value_or(j, "f_cs", e.f_cs);
    e.kappa_m = value_or(j, "kappa_m", e.kappa_m);
    e.kappa_c = value_or(j, "kappa_c", e.kappa_c);
    e.cycles_per_byte = value_or(j, "cycles_per_byte", e.cycles_per_byte);
    e.delta = value_or(j, "delta", e.delta);
    return e;
}

// Service rates either given directly or derived from the energy table's
// frequencies for the listed task types.
ComputeParams read_compute(const json& j, energy::EnergyParams& e) {
    check_keys(j, "compute", {"type_probs", "types", "mu_c", "mu_m", "theta", "t_s"});
    ComputeParams c;
    c.type_probs = value_or<std::vector<double>>(j, "type_probs", {1.0});
    c.offload_prob = value_or(j, "theta", 0.2);
    c.target_latency = value_or(j, "t_s", 0.012);
    if (j.contains("mu_c") || j.contains("mu_m")) {
        if (j.contains("types")) throw ConfigError("compute: give either types or mu_c/mu_m");
        c.mu_c = value_or<std::vector<double>>(j, "mu_c", {});
        c.mu_m = value_or<std::vector<double>>(j, "mu_m", {});
    } else {
        std::vector<std::size_t> types = value_or<std::vector<std::size_t>>(j, "types", {0});
        const energy::EnergyConfig full(e);
        const auto sub = full.with_types(types);
        e = sub.params();
        for (std::size_t i = 0; i < types.size(); ++i) {
            c.mu_c.push_back(sub.service_rate(e.f_cs[i]));
            c.mu_m.push_back(sub.service_rate(e.f_mec[i]));
        }
    }
    (void)ComputeConfig(c);  // validates
    return c;
}

std::vector<DeploymentRow> read_rows(const json& j, const NetworkParams& net, const ComputeParams& comp) {
    std::vector<DeploymentRow> rows;
    if (!j.is_array() || j.empty()) throw ConfigError("rows must be a non-empty list");
    for (const auto& r : j) {
        check_keys(r, "row", {"antennas_per_ap", "lambda_b", "t_s"});
        DeploymentRow d;
        d.antennas_per_ap = value_or(r, "antennas_per_ap", net.antennas_per_ap);
        d.lambda_b = value_or(r, "lambda_b", net.lambda_b);
        d.target_latency = value_or(r, "t_s", comp.target_latency);
        rows.push_back(d);
    }
    return rows;
}

// Applies fn to every index, spread over hardware threads; results come
// back in index order.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, Fn&& fn) {
    std::vector<R> out(n);
    const std::size_t threads = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> err(n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    err[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

using Row = std::vector<Cell>;

Cell num(double v) { return std::isfinite(v) ? Cell{v} : Cell{}; }
Cell integer(long long v) { return Cell{v}; }

NetworkConfig deployment(const ExperimentSpec& s, const DeploymentRow& r, double R) {
    NetworkParams p = s.network;
    p.antennas_per_ap = r.antennas_per_ap;
    p.lambda_b = r.lambda_b;
    p.coverage_radius = R;
    return NetworkConfig(p);
}

std::vector<DeploymentRow> rows_or_default(const ExperimentSpec& s) {
    if (!s.rows.empty()) return s.rows;
    return {{s.network.antennas_per_ap, s.network.lambda_b, s.compute.target_latency}};
}

Table scmp_table(const ExperimentSpec& s) {
    Table t;
    t.columns = {"R_km", "mean_aps", "p_oul", "p_odl_lo", "p_odl_hi", "p_odl", "scmp"};
    const bool mc = s.replications > 0;
    if (mc) t.columns.insert(t.columns.end(), {"sim_p_oul", "sim_p_oul_se", "sim_p_odl", "sim_p_odl_se"});
    t.rows = parallel_map<Row>(s.radius_grid.size(), [&](std::size_t i) {
        const NetworkConfig net = deployment(s, rows_or_default(s)[0], s.radius_grid[i]);
        const auto pr = comm::comm_profile(net);
        Row r{num(pr.coverage_radius), num(pr.mean_aps), num(pr.uplink_outage),
              num(std::min(pr.downlink.lower, pr.downlink.upper)),
              num(std::max(pr.downlink.lower, pr.downlink.upper)), num(pr.downlink.point), num(pr.scmp)};
        if (mc) {
            auto sc = sim::make_scenario(net, s.replications, sim::stream_seed(s.seed, i));
            const auto ul = sim::simulate_uplink_outage(net, sc);
            const auto dl = sim::simulate_downlink_sir(net, sc);
            r.insert(r.end(), {num(ul.outage.mean), num(ul.outage.stderr_), num(dl.outage.mean),
                               num(dl.outage.stderr_)});
        }
        return r;
    });
    return t;
}

struct SurfacePoint {
    DeploymentRow dep;
    double R;
    double theta;
    double t;
};

std::vector<SurfacePoint> surface_points(const ExperimentSpec& s) {
    std::vector<SurfacePoint> pts;
    const auto lat = s.latency_grid.empty() ? std::vector<double>{} : s.latency_grid;
    for (const auto& d : rows_or_default(s)) {
        const auto ts = lat.empty() ? std::vector<double>{d.target_latency} : lat;
        for (double t : ts)
            for (double R : s.radius_grid)
                for (double th : s.theta_grid) pts.push_back({d, R, th, t});
    }
    return pts;
}

Table scp_table(const ExperimentSpec& s) {
    Table t;
    t.columns = {"M", "lambda_b", "t_s", "R_km", "theta", "rho_c", "rho_m", "stable", "scp"};
    const bool mc = s.replications > 0;
    if (mc) t.columns.insert(t.columns.end(), {"sim_scp", "sim_tasks"});
    const auto pts = surface_points(s);
    const ComputeConfig base(s.compute);
    t.rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
        const auto& p = pts[i];
        const NetworkConfig net = deployment(s, p.dep, p.R);
        const ComputeConfig comp = base.with_offload_prob(p.theta).with_target_latency(p.t);
        const double pul = comm::uplink_outage(net);
        const auto rates = offload::arrival_rates(net, comp, pul);
        const auto st = stability(comp, rates.lambda_c, rates.lambda_m);
        const bool stable = st.stable_cs && st.stable_mec;
        Row r{integer(p.dep.antennas_per_ap), num(p.dep.lambda_b), num(p.t), num(p.R), num(p.theta),
              num(st.rho_c), num(st.rho_m), integer(stable ? 1 : 0),
              stable ? num(offload::scp(net, comp, pul)) : Cell{}};
        if (mc) {
            if (stable) {
                const auto run = sim::simulate_mlcm(net, comp, s.sim_duration, sim::stream_seed(s.seed, i));
                r.insert(r.end(), {num(run.success_fraction(p.t)), integer(static_cast<long long>(run.arrivals))});
            } else {
                r.insert(r.end(), {Cell{}, Cell{}});
            }
        }
        return r;
    });
    return t;
}

Table secp_table(const ExperimentSpec& s) {
    Table t;
    t.columns = {"M", "lambda_b", "t_s", "R_km", "theta", "stable", "secp", "computation", "uplink", "downlink"};
    const auto pts = surface_points(s);
    const ComputeConfig base(s.compute);
    // One communication profile per distinct (deployment, R).
    std::map<std::tuple<int, double, double>, comm::CommProfile> profiles;
    for (const auto& p : pts) {
        const auto key = std::make_tuple(p.dep.antennas_per_ap, p.dep.lambda_b, p.R);
        if (!profiles.count(key)) profiles.emplace(key, comm::comm_profile(deployment(s, p.dep, p.R)));
    }
    t.rows = parallel_map<Row>(pts.size(), [&](std::size_t i) {
        const auto& p = pts[i];
        const NetworkConfig net = deployment(s, p.dep, p.R);
        const auto& pr = profiles.at(std::make_tuple(p.dep.antennas_per_ap, p.dep.lambda_b, p.R));
        const ComputeConfig comp = base.with_offload_prob(p.theta).with_target_latency(p.t);
        Row r{integer(p.dep.antennas_per_ap), num(p.dep.lambda_b), num(p.t), num(p.R), num(p.theta)};
        try {
            const auto v = edge::secp(pr, net, comp);
            r.insert(r.end(), {integer(1), num(v.value), num(v.computation), num(v.uplink), num(v.downlink)});
        } catch (const StabilityError&) {
            r.insert(r.end(), {integer(0), Cell{}, Cell{}, Cell{}, num(1.0 - pr.downlink.point)});
        }
        return r;
    });
    return t;
}

Table rth_table(const ExperimentSpec& s) {
    Table t;
    t.columns = {"M", "lambda_b", "t_s", "area_km2", "R_th_m", "theta", "secp", "radius_evaluations"};
    struct Job {
        DeploymentRow dep;
        double area;
    };
    std::vector<Job> jobs;
    const auto areas = s.area_grid.empty() ? std::vector<double>{s.network.network_area} : s.area_grid;
    for (const auto& d : rows_or_default(s))
        for (double a : areas) jobs.push_back({d, a});
    const ComputeConfig base(s.compute);
    t.rows = parallel_map<Row>(jobs.size(), [&](std::size_t i) {
        const auto& j = jobs[i];
        NetworkParams p = s.network;
        p.antennas_per_ap = j.dep.antennas_per_ap;
        p.lambda_b = j.dep.lambda_b;
        p.network_area = j.area;
        edge::RSearchOptions o;
        o.r_lo = s.r_lo;
        o.r_hi = s.r_hi;
        o.theta_grid = s.theta_grid;
        const auto r = edge::find_r_threshold(NetworkConfig(p), base.with_target_latency(j.dep.target_latency), o);
        return Row{integer(j.dep.antennas_per_ap), num(j.dep.lambda_b), num(j.dep.target_latency),
                   num(j.area),  num(1e3 * r.coverage_radius),  num(r.theta),
                   num(r.secp),  integer(r.radius_evaluations)};
    });
    return t;
}

Table energy_table(const ExperimentSpec& s, bool& any_infeasible, bool& all_infeasible) {
    Table t;
    t.columns = {"M",      "lambda_b", "t_s",    "xi",     "feasible", "R_star_km", "theta_star", "secp",
                 "E_comp", "E_comm",   "E_total", "P_ul",  "P_dl",     "achievable"};
    const energy::EnergyConfig ec(s.energy);
    const ComputeConfig base(s.compute);
    const auto rows = rows_or_default(s);
    auto blocks = parallel_map<std::vector<Row>>(rows.size(), [&](std::size_t i) {
        const auto& d = rows[i];
        const NetworkConfig net = deployment(s, d, s.network.coverage_radius);
        edge::SecpFrontier frontier(net, base.with_target_latency(d.target_latency), s.theta_grid);
        energy::EnergySearchOptions o;
        o.r_lo = s.r_lo;
        o.r_hi = s.r_hi;
        std::vector<Row> out;
        for (double xi : s.xi_grid) {
            Row r{integer(d.antennas_per_ap), num(d.lambda_b), num(d.target_latency), num(xi)};
            try {
                const auto opt = energy::minimize_energy(frontier, ec, xi, o);
                r.insert(r.end(), {integer(1), num(opt.coverage_radius), num(opt.theta), num(opt.secp),
                                   num(opt.energy.e_comp), num(opt.energy.e_comm), num(opt.energy.e_total),
                                   num(opt.energy.p_ul), num(opt.energy.p_dl), Cell{}});
            } catch (const InfeasibleError& e) {
                r.insert(r.end(), {integer(0), Cell{}, Cell{}, Cell{}, Cell{}, Cell{}, Cell{}, Cell{}, Cell{},
                                   num(e.achievable())});
            }
            out.push_back(std::move(r));
        }
        return out;
    });
    any_infeasible = false;
    all_infeasible = true;
    for (auto& b : blocks) {
        for (auto& r : b) {
            const bool feasible = std::get<long long>(r[4]) == 1;
            any_infeasible |= !feasible;
            all_infeasible &= !feasible;
            t.rows.push_back(std::move(r));
        }
    }
    return t;
}

// Analytics against the Monte Carlo oracles, one row per comparison.
Table validate_table(const ExperimentSpec& s) {
    Table t;
    t.columns = {"check", "R_km", "analytic", "simulated", "stderr", "tolerance", "pass"};
    const std::size_t reps = s.replications > 0 ? s.replications : 10000;
    const ComputeConfig comp(s.compute);
    auto blocks = parallel_map<std::vector<Row>>(s.radius_grid.size(), [&](std::size_t i) {
        const double R = s.radius_grid[i];
        const NetworkConfig net = deployment(s, rows_or_default(s)[0], R);
        const auto sc = sim::make_scenario(net, reps, sim::stream_seed(s.seed, i));
        const auto ul = sim::simulate_uplink_outage(net, sc);
        const auto dl = sim::simulate_downlink_sir(net, sc);
        const auto pr = comm::comm_profile(net);
        std::vector<Row> out;
        auto add = [&](const std::string& name, double an, double sim_v, double se, double tol, bool pass) {
            out.push_back({name, num(R), num(an), num(sim_v), num(se), num(tol), integer(pass ? 1 : 0)});
        };
        {
            const double tol = 0.02 + 3.0 * ul.outage.stderr_;
            add("uplink_outage", pr.uplink_outage, ul.outage.mean, ul.outage.stderr_, tol,
                std::abs(pr.uplink_outage - ul.outage.mean) <= tol);
        }
        {
            const double lo = std::min(pr.downlink.lower, pr.downlink.upper);
            const double hi = std::max(pr.downlink.lower, pr.downlink.upper);
            const double slack = 0.03 + 3.0 * dl.outage.stderr_;
            const double v = dl.outage.mean;
            add("downlink_outage_in_bracket", pr.downlink.point, v, dl.outage.stderr_, slack,
                v >= lo - slack && v <= hi + slack);
        }
        {
            const double an = comm::interference_mean(net);
            const double tol = 3.0 * dl.interference_mean.stderr_;
            add("interference_mean", an, dl.interference_mean.mean, dl.interference_mean.stderr_, tol,
                std::abs(an - dl.interference_mean.mean) <= tol);
        }
        {
            const double an = comm::interference_variance(net);
            const double tol = 3.0 * dl.interference_variance.stderr_;
            add("interference_variance", an, dl.interference_variance.mean, dl.interference_variance.stderr_, tol,
                std::abs(an - dl.interference_variance.mean) <= tol);
        }
        {
            const double pul = pr.uplink_outage;
            const auto rates = offload::arrival_rates(net, comp, pul);
            const auto st = stability(comp, rates.lambda_c, rates.lambda_m);
            if (st.stable_cs && st.stable_mec) {
                const auto run = sim::simulate_mlcm(net, comp, s.sim_duration, sim::stream_seed(s.seed, 1000 + i));
                const auto q = offload::queue_spectrum(comp, rates.lambda_m);
                std::vector<double> an;
                for (std::size_t v = 0; v < run.mec_occupancy_pmf.size() + 50; ++v) an.push_back(q.pmf(v));
                const double tv = sim::total_variation(run.mec_occupancy_pmf, an);
                add("mec_queue_pmf_tv", 0.0, tv, 0.0, 0.02, tv <= 0.02);
                const double sc_an = offload::scp(net, comp, pul);
                const double sc_sim = run.success_fraction(comp.target_latency());
                add("scp", sc_an, sc_sim, 0.0, 0.03, std::abs(sc_an - sc_sim) <= 0.03);
            }
        }
        return out;
    });
    for (auto& b : blocks)
        for (auto& r : b) t.rows.push_back(std::move(r));
    return t;
}

std::string csv_field(const Cell& c) {
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double v) const {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10g", v);
            return buf;
        }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) {
                if (ch == '"') q += '"';
                q += ch;
            }
            return q + "\"";
        }
    };
    return std::visit(V{}, c);
}

json preset_base() {
    return {{"network",
             {{"lambda_b", 400.0},
              {"lambda_d", 100.0},
              {"antennas_per_ap", 4},
              {"alpha", 3.7},
              {"d0_km", 0.001},
              {"rate_bps_hz", 1.5},
              {"network_area_km2", 4.0}}},
            {"compute", {{"type_probs", {1.0}}, {"types", {0}}, {"theta", 0.2}, {"t_s", 0.012}}},
            {"seed", 1},
            {"replications", 0}};
}

json radius_grid_default() { return {{"from", 0.01}, {"to", 0.2}, {"points", 20}}; }
json theta_grid_default() { return {{"from", 0.0}, {"to", 1.0}, {"points", 21}}; }

}  // namespace

std::string to_string(Kind k) {
    for (const auto& [name, v] : kind_table())
        if (v == k) return name;
    return "?";
}

Kind kind_from_string(const std::string& s) {
    const auto it = kind_table().find(s);
    if (it == kind_table().end()) throw ConfigError("unknown experiment kind '" + s + "'");
    return it->second;
}

json merge(json base, const json& patch) {
    if (!base.is_object() || !patch.is_object()) return patch;
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            base[it.key()] = merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
    return base;
}

std::vector<std::string> preset_names() {
    return {"paper_fig2", "paper_fig3", "paper_fig4", "paper_fig5", "paper_fig6", "paper_table_rth", "paper_fig7"};
}

json preset(const std::string& name) {
    json j = preset_base();
    j["name"] = name;
    if (name == "paper_fig2") {
        j["kind"] = "scmp_vs_R";
        j["grid"] = {{"R_km", radius_grid_default()}};
    } else if (name == "paper_fig3") {
        j["kind"] = "scp_surface";
        j["compute"]["type_probs"] = {0.6, 0.4};
        j["compute"]["types"] = {0, 1};
        j["grid"] = {{"R_km", radius_grid_default()}, {"theta", theta_grid_default()}};
    } else if (name == "paper_fig4") {
        j["kind"] = "scp_surface";
        j["grid"] = {{"R_km", radius_grid_default()}, {"theta", theta_grid_default()}};
    } else if (name == "paper_fig5") {
        j["kind"] = "scp_surface";
        j["grid"] = {{"R_km", radius_grid_default()},
                     {"theta", {0.3, 0.7}},
                     {"rows",
                      {{{"antennas_per_ap", 4}, {"lambda_b", 400.0}},
                       {{"antennas_per_ap", 2}, {"lambda_b", 800.0}},
                       {{"antennas_per_ap", 1}, {"lambda_b", 1600.0}}}}};
    } else if (name == "paper_fig6") {
        j["kind"] = "secp_surface";
        j["grid"] = {{"R_km", radius_grid_default()}, {"theta", theta_grid_default()}};
    } else if (name == "paper_table_rth") {
        j["kind"] = "r_threshold";
        j["grid"] = {{"rows",
                      {{{"antennas_per_ap", 4}, {"lambda_b", 400.0}, {"t_s", 0.004}},
                       {{"antennas_per_ap", 4}, {"lambda_b", 400.0}, {"t_s", 0.012}},
                       {{"antennas_per_ap", 1}, {"lambda_b", 1600.0}, {"t_s", 0.004}},
                       {{"antennas_per_ap", 1}, {"lambda_b", 1600.0}, {"t_s", 0.012}}}},
                     {"area_km2", {1.0, 4.0, 10.0}},
                     {"theta", theta_grid_default()}};
        j["search"] = {{"r_lo_km", 0.01}, {"r_hi_km", 0.2}};
    } else if (name == "paper_fig7") {
        j["kind"] = "energy_vs_xi";
        j["grid"] = {{"rows",
                      {{{"antennas_per_ap", 4}, {"lambda_b", 400.0}},
                       {{"antennas_per_ap", 1}, {"lambda_b", 400.0}},
                       {{"antennas_per_ap", 1}, {"lambda_b", 1600.0}}}},
                     {"xi", {{"from", 0.04}, {"to", 0.48}, {"points", 12}}},
                     {"theta", theta_grid_default()}};
        j["search"] = {{"r_lo_km", 0.005}, {"r_hi_km", 0.2}};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return j;
}

ExperimentSpec parse_spec(const json& j) {
    check_keys(j, "spec",
               {"kind", "name", "network", "compute", "energy", "grid", "search", "seed", "replications",
                "sim_duration_s", "output"});
    if (!j.contains("kind")) throw ConfigError("spec: 'kind' is required");
    ExperimentSpec s;
    s.kind = kind_from_string(j["kind"].get<std::string>());
    s.name = value_or<std::string>(j, "name", to_string(s.kind));
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("spec: name must be a plain file stem");
    s.network = read_network(j.value("network", json::object()));
    s.energy = read_energy(j.value("energy", json::object()));
    s.compute = read_compute(j.value("compute", json::object()), s.energy);
    s.seed = value_or<std::uint64_t>(j, "seed", 1);
    s.replications = value_or<std::size_t>(j, "replications", 0);
    s.sim_duration = value_or(j, "sim_duration_s", 500.0);
    if (!(s.sim_duration > 0.0)) throw ConfigError("spec: sim_duration_s must be positive");

    const json g = j.value("grid", json::object());
    check_keys(g, "grid", {"R_km", "theta", "t_s", "xi", "area_km2", "rows"});
    if (g.contains("R_km")) s.radius_grid = read_grid(g["R_km"], "R_km");
    s.theta_grid = g.contains("theta") ? read_grid(g["theta"], "theta")
                                       : offload::uniform_grid(0.0, 1.0, 21);
    if (g.contains("t_s")) s.latency_grid = read_grid(g["t_s"], "t_s");
    if (g.contains("xi")) s.xi_grid = read_grid(g["xi"], "xi");
    if (g.contains("area_km2")) s.area_grid = read_grid(g["area_km2"], "area_km2");
    if (g.contains("rows")) s.rows = read_rows(g["rows"], s.network, s.compute);
    for (double th : s.theta_grid)
        if (!(th >= 0.0 && th <= 1.0)) throw ConfigError("grid: theta values must lie in [0, 1]");
    for (double R : s.radius_grid)
        if (!(R >= 0.0)) throw ConfigError("grid: R_km values must be non-negative");
    for (double t : s.latency_grid)
        if (!(t > 0.0)) throw ConfigError("grid: t_s values must be positive");
    for (double a : s.area_grid)
        if (!(a > 0.0)) throw ConfigError("grid: area_km2 values must be positive");

    const json se = j.value("search", json::object());
    check_keys(se, "search", {"r_lo_km", "r_hi_km"});
    s.r_lo = value_or(se, "r_lo_km", s.kind == Kind::r_threshold ? 0.01 : 0.005);
    s.r_hi = value_or(se, "r_hi_km", 0.2);
    if (!(s.r_lo > 0.0 && s.r_hi > s.r_lo)) throw ConfigError("search: need 0 < r_lo_km < r_hi_km");

    switch (s.kind) {
        case Kind::scmp_vs_R:
        case Kind::scp_surface:
        case Kind::secp_surface:
        case Kind::validate:
            if (s.radius_grid.empty()) throw ConfigError("grid.R_km is required for " + to_string(s.kind));
            break;
        case Kind::energy_vs_xi:
            if (s.xi_grid.empty()) throw ConfigError("grid.xi is required for energy_vs_xi");
            for (double xi : s.xi_grid)
                if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("grid: xi values must lie in (0, 1)");
            energy::computation_energy(ComputeConfig(s.compute), energy::EnergyConfig(s.energy));
            break;
        case Kind::r_threshold:
            break;
    }
    s.source = j;
    return s;
}

void Table::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
    os << "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
        os << "\r\n";
    }
}

Table evaluate(const ExperimentSpec& spec, bool& any_infeasible, bool& all_infeasible) {
    any_infeasible = all_infeasible = false;
    switch (spec.kind) {
        case Kind::scmp_vs_R: return scmp_table(spec);
        case Kind::scp_surface: return scp_table(spec);
        case Kind::secp_surface: return secp_table(spec);
        case Kind::r_threshold: return rth_table(spec);
        case Kind::energy_vs_xi: return energy_table(spec, any_infeasible, all_infeasible);
        case Kind::validate: return validate_table(spec);
    }
    throw ConfigError("unhandled experiment kind");
}

RunOutcome run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    out.csv_path = out_dir / (spec.name + ".csv");
    out.manifest_path = out_dir / (spec.name + ".manifest.json");
    std::filesystem::create_directories(out_dir);
    try {
        bool any = false, all = false;
        out.table = evaluate(spec, any, all);
        std::ofstream f(out.csv_path, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + out.csv_path.string());
        out.table.write_csv(f);
        if (all) {
            out.exit_code = 3;
            out.status = "infeasible";
            out.message = "no requested SECP target is achievable";
        } else {
            out.status = "ok";
            if (any) out.message = "some SECP targets are infeasible; see the feasible column";
        }
    } catch (const ConfigError& e) {
        out.exit_code = 2;
        out.status = "usage_error";
        out.message = e.what();
    } catch (const InfeasibleError& e) {
        out.exit_code = 3;
        out.status = "infeasible";
        out.message = std::string(e.what()) + " (achievable " + std::to_string(e.achievable()) + ")";
    } catch (const std::exception& e) {
        // NumericalError, StabilityError, ConsistencyError and anything else.
        out.exit_code = 4;
        out.status = "numerical_error";
        out.message = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json m;
    m["schema_version"] = kSchemaVersion;
    m["tool"] = "cfmec";
    m["version"] = CFMEC_VERSION;
    m["compiler"] = __VERSION__;
    m["kind"] = to_string(spec.kind);
    m["name"] = spec.name;
    m["status"] = out.status;
    m["exit_code"] = out.exit_code;
    m["message"] = out.message;
    m["seed"] = spec.seed;
    m["replications"] = spec.replications;
    m["wall_time_s"] = wall;
    m["rows"] = out.table.rows.size();
    m["outputs"] = {{"csv", out.exit_code == 0 || out.exit_code == 3 ? out.csv_path.filename().string() : ""}};
    m["config"] = spec.source;
    std::ofstream mf(out.manifest_path);
    mf << m.dump(2) << '\n';
    return out;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Edge-computing cell-free massive MIMO analytics and simulation"};
    app.require_subcommand(1);

    std::string spec_file, preset_name, out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t reps = 0;
    auto* run = app.add_subcommand("run", "Run an experiment file or preset");
    run->add_option("spec-file", spec_file, "Experiment JSON file");
    auto* seed_opt = run->add_option("--seed", seed, "RNG seed");
    auto* reps_opt = run->add_option("--reps", reps, "Monte Carlo replications");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--preset", preset_name, "Start from a preset; the experiment file overrides it");

    auto* list = app.add_subcommand("presets", "List preset names");
    std::string show_name;
    auto* show = app.add_subcommand("show-preset", "Print a preset as JSON");
    show->add_option("name", show_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*list) {
            for (const auto& n : preset_names()) std::cout << n << '\n';
            return 0;
        }
        if (*show) {
            std::cout << preset(show_name).dump(2) << '\n';
            return 0;
        }
        if (spec_file.empty() && preset_name.empty()) {
            std::cerr << "run: give a spec file, --preset, or both\n";
            return 2;
        }
        json j = preset_name.empty() ? json::object() : preset(preset_name);
        if (!spec_file.empty()) {
            std::ifstream f(spec_file);
            if (!f) {
                std::cerr << "cannot open " << spec_file << '\n';
                return 2;
            }
            json user;
            try {
                user = json::parse(f);
            } catch (const json::parse_error& e) {
                std::cerr << spec_file << ": " << e.what() << '\n';
                return 2;
            }
            j = merge(j, user);
        }
        if (*seed_opt) j["seed"] = seed;
        if (*reps_opt) j["replications"] = reps;
        const ExperimentSpec spec = parse_spec(j);
        const auto outcome = run_experiment(spec, out_dir);
        if (outcome.exit_code != 0) std::cerr << outcome.status << ": " << outcome.message << '\n';
        else if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
        std::cout << outcome.csv_path.string() << '\n' << outcome.manifest_path.string() << '\n';
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace cfmec::cli
