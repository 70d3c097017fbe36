#include "cfmec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "cfmec/comm.hpp"
#include "cfmec/errors.hpp"

namespace cfmec::sim {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Runs body(rep) for every replication; the split over threads does not
// affect results because each replication owns its RNG stream and output slot.
template <class Body>
void for_each_replication(std::size_t n, Body&& body) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t threads = std::min<std::size_t>(hw, std::max<std::size_t>(1, n / 256));
    if (threads <= 1) {
        for (std::size_t r = 0; r < n; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t r = t; r < n; r += threads) body(r);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Point {
    double x, y;
};

void drop_square(Engine& rng, double density, double half, std::vector<Point>& out) {
    out.clear();
    std::poisson_distribution<long> count(density * 4.0 * half * half);
    std::uniform_real_distribution<double> u(-half, half);
    const long n = count(rng);
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double x = u(rng);
        out.push_back({x, u(rng)});
    }
}

void drop_disc(Engine& rng, double density, double radius, std::vector<Point>& out) {
    out.clear();
    std::poisson_distribution<long> count(density * kPi * radius * radius);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const long n = count(rng);
    for (long i = 0; i < n; ++i) {
        const double r = radius * std::sqrt(u(rng));
        const double a = 2.0 * kPi * u(rng);
        out.push_back({r * std::cos(a), r * std::sin(a)});
    }
}

// Bounded pathloss from a squared distance.
inline double gain(double d2, double d0sq, double half_alpha) {
    return std::pow(std::max(d2, d0sq), -half_alpha);
}

// Uniform cell grid over [-half, half]^2 for disc-count queries.
class CellGrid {
public:
    CellGrid(double half, double cell) : half_(half) {
        n_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * half / cell)));
        cell_ = 2.0 * half / static_cast<double>(n_);
    }

    void fill(const std::vector<Point>& pts) {
        pts_ = &pts;
        start_.assign(n_ * n_ + 1, 0);
        idx_.resize(pts.size());
        for (const auto& p : pts) ++start_[cell_of(p) + 1];
        for (std::size_t c = 0; c < n_ * n_; ++c) start_[c + 1] += start_[c];
        std::vector<std::size_t> fillpos(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i) idx_[fillpos[cell_of(pts[i])]++] = i;
    }

    std::size_t count_within(Point c, double r) const {
        const double r2 = r * r;
        const long lo_x = clamp_index(c.x - r), hi_x = clamp_index(c.x + r);
        const long lo_y = clamp_index(c.y - r), hi_y = clamp_index(c.y + r);
        std::size_t k = 0;
        for (long iy = lo_y; iy <= hi_y; ++iy) {
            for (long ix = lo_x; ix <= hi_x; ++ix) {
                const std::size_t cell = static_cast<std::size_t>(iy) * n_ + static_cast<std::size_t>(ix);
                for (std::size_t j = start_[cell]; j < start_[cell + 1]; ++j) {
                    const auto& p = (*pts_)[idx_[j]];
                    const double dx = p.x - c.x, dy = p.y - c.y;
                    if (dx * dx + dy * dy < r2) ++k;
                }
            }
        }
        return k;
    }

private:
    long clamp_index(double v) const {
        const long i = static_cast<long>(std::floor((v + half_) / cell_));
        return std::clamp<long>(i, 0, static_cast<long>(n_) - 1);
    }
    std::size_t cell_of(const Point& p) const {
        return static_cast<std::size_t>(clamp_index(p.y)) * n_ + static_cast<std::size_t>(clamp_index(p.x));
    }

    double half_;
    double cell_ = 1.0;
    std::size_t n_ = 1;
    const std::vector<Point>* pts_ = nullptr;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> idx_;
};

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t rep) {
    return splitmix64(splitmix64(seed) ^ (rep + 0x632be59bd9b4e019ULL));
}

Engine replication_engine(std::uint64_t seed, std::uint64_t rep) {
    return Engine(stream_seed(seed, rep));
}

Estimate estimate(const std::vector<double>& xs) {
    Estimate e;
    e.samples = xs.size();
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        const double n = static_cast<double>(xs.size());
        e.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

double interference_guard(const NetworkConfig& net, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw ConfigError("interference_guard: tail fraction must lie in (0, 1)");
    // Tail 2 pi D^(2-a)/(a-2) over the full integral pi d0^(2-a) a/(a-2).
    const double a = net.alpha();
    return net.d0() * std::pow(2.0 / (a * tail_fraction), 1.0 / (a - 2.0));
}

SpatialScenario make_scenario(const NetworkConfig& net, std::size_t replications, std::uint64_t seed) {
    SpatialScenario sc;
    sc.guard = interference_guard(net);
    sc.half_width = 4.0 * net.coverage_radius() + sc.guard;
    sc.replications = replications;
    sc.seed = seed;
    return sc;
}

void validate(const SpatialScenario& sc, const NetworkConfig& net) {
    if (sc.replications < 1) throw ConfigError("SpatialScenario: need at least one replication");
    if (!(sc.guard >= 0.0)) throw ConfigError("SpatialScenario: guard must be non-negative");
    if (sc.half_width < 4.0 * net.coverage_radius() + sc.guard - 1e-12)
        throw ConfigError("SpatialScenario: window must cover 4R + guard");
}

UplinkSimResult simulate_uplink_outage(const NetworkConfig& net, const SpatialScenario& sc) {
    validate(sc, net);
    const double R = net.coverage_radius();
    const double d0sq = net.d0() * net.d0();
    const double ha = 0.5 * net.alpha();
    const double thr = net.sir_threshold_ul();
    const int M = net.antennas_per_ap();
    std::vector<double> out(sc.replications), aps(sc.replications);

    for_each_replication(sc.replications, [&](std::size_t rep) {
        auto rng = replication_engine(sc.seed, rep);
        std::vector<Point> users, ap;
        drop_disc(rng, net.lambda_b(), R, ap);
        drop_square(rng, net.lambda_d(), sc.half_width, users);
        std::gamma_distribution<double> desired(static_cast<double>(M), 1.0);
        std::exponential_distribution<double> fade(1.0);
        bool all_fail = true;
        for (const auto& a : ap) {
            const double sig = desired(rng) * gain(a.x * a.x + a.y * a.y, d0sq, ha);
            double intf = 0.0;
            for (const auto& u : users) {
                const double dx = u.x - a.x, dy = u.y - a.y;
                intf += fade(rng) * gain(dx * dx + dy * dy, d0sq, ha);
            }
            if (sig >= thr * intf) {
                all_fail = false;
                break;
            }
        }
        out[rep] = all_fail ? 1.0 : 0.0;
        aps[rep] = static_cast<double>(ap.size());
    });
    return {estimate(out), estimate(aps)};
}

DownlinkSimResult simulate_downlink_sir(const NetworkConfig& net, const SpatialScenario& sc) {
    validate(sc, net);
    const double R = net.coverage_radius();
    const double d0sq = net.d0() * net.d0();
    const double ha = 0.5 * net.alpha();
    const double thr = net.sir_threshold_dl();
    const int M = net.antennas_per_ap();
    // APs sit far enough inside the window that their whole coverage disc
    // of users is simulated.
    const double ap_half = sc.half_width - R;
    std::vector<double> out(sc.replications), intf(sc.replications), aps(sc.replications);

    for_each_replication(sc.replications, [&](std::size_t rep) {
        auto rng = replication_engine(sc.seed, rep);
        std::vector<Point> users, ap;
        drop_square(rng, net.lambda_b(), ap_half, ap);
        drop_square(rng, net.lambda_d(), sc.half_width, users);
        CellGrid grid(sc.half_width, std::max(R, 1e-6));
        grid.fill(users);
        std::gamma_distribution<double> desired(static_cast<double>(M), 1.0);
        double sig = 0.0, I = 0.0;
        std::size_t connected = 0;
        for (const auto& a : ap) {
            const double d2 = a.x * a.x + a.y * a.y;
            const double l = gain(d2, d0sq, ha);
            if (d2 < R * R) {
                sig += desired(rng) * l;
                ++connected;
            }
            // One unit-mean exponential per other user served by this AP.
            const std::size_t served = R > 0.0 ? grid.count_within(a, R) : 0;
            if (served > 0) {
                std::gamma_distribution<double> streams(static_cast<double>(served), 1.0);
                I += streams(rng) * l;
            }
        }
        out[rep] = (connected == 0 || sig < thr * I) ? 1.0 : 0.0;
        intf[rep] = I;
        aps[rep] = static_cast<double>(connected);
    });

    DownlinkSimResult res;
    res.outage = estimate(out);
    res.connected_aps = estimate(aps);
    res.interference_mean = estimate(intf);
    const double n = static_cast<double>(intf.size());
    const double mu = res.interference_mean.mean;
    double m2 = 0.0, m4 = 0.0;
    for (double x : intf) {
        const double d = (x - mu) * (x - mu);
        m2 += d;
        m4 += d * d;
    }
    res.interference_variance.samples = intf.size();
    if (n > 1.0) {
        res.interference_variance.mean = m2 / (n - 1.0);
        const double s4 = (m2 / n) * (m2 / n);
        res.interference_variance.stderr_ = std::sqrt(std::max(0.0, m4 / n - s4) / n);
    }
    return res;
}

// ---------------------------------------------------------------------------

void EventLog::write_csv(std::ostream& os) const {
    os << "arrival_s,server_id,queue_len_seen,sojourn_s,type_idx\n";
    os.precision(17);
    for (const auto& t : tasks)
        os << t.arrival_s << ',' << t.server_id << ',' << t.queue_len_seen << ',' << t.sojourn_s << ','
           << t.type_idx << '\n';
}

double MlcmRun::success_fraction(double t) const {
    if (arrivals == 0) return 0.0;
    std::size_t ok = 0;
    for (const auto& r : log.tasks)
        if (r.sojourn_s <= t) ++ok;
    return static_cast<double>(ok) / static_cast<double>(arrivals);
}

namespace {

double mean_sojourn_where(const EventLog& log, bool cs) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.tasks) {
        if ((r.server_id < 0) == cs) {
            s += r.sojourn_s;
            ++n;
        }
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

// Number-in-system trajectory of one FIFO server, accumulated into a
// time-weighted histogram over [from, to].
class OccupancyTracker {
public:
    void add_arrival(double t) { events_.push_back({t, +1}); }
    void add_departure(double t) { events_.push_back({t, -1}); }

    void accumulate(double from, double to, std::vector<double>& hist) {
        std::sort(events_.begin(), events_.end(), [](const Ev& a, const Ev& b) {
            return a.t < b.t || (a.t == b.t && a.d < b.d);
        });
        long n = 0;
        double last = from;
        for (const auto& e : events_) {
            if (e.t > from) {
                const double hi = std::min(e.t, to);
                if (hi > last) add(hist, n, hi - last);
                last = std::max(last, hi);
            }
            n += e.d;
            if (e.t >= to) break;
        }
        if (to > last) add(hist, n, to - last);
    }

private:
    struct Ev {
        double t;
        int d;
    };
    static void add(std::vector<double>& h, long n, double dt) {
        const auto k = static_cast<std::size_t>(n);
        if (h.size() <= k) h.resize(k + 1, 0.0);
        h[k] += dt;
    }
    std::vector<Ev> events_;
};

struct FifoServer {
    std::deque<double> departures;  // of tasks still in system, ascending
    double last_departure = 0.0;
    OccupancyTracker occ;

    std::size_t length_at(double t) {
        while (!departures.empty() && departures.front() <= t) departures.pop_front();
        return departures.size();
    }
    // Admits a task arriving at t with the given service; returns departure.
    double admit(double t, double service) {
        const double dep = std::max(t, last_departure) + service;
        last_departure = dep;
        departures.push_back(dep);
        occ.add_arrival(t);
        occ.add_departure(dep);
        return dep;
    }
};

std::vector<double> normalize(std::vector<double> h) {
    double s = 0.0;
    for (double v : h) s += v;
    if (s > 0.0)
        for (double& v : h) v /= s;
    return h;
}

double mean_of(const std::vector<double>& pmf) {
    double m = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
    return m;
}

}  // namespace

double MlcmRun::mean_sojourn_cs() const { return mean_sojourn_where(log, true); }
double MlcmRun::mean_sojourn_mec() const { return mean_sojourn_where(log, false); }

MlcmRun simulate_mlcm(const NetworkConfig& net, const ComputeConfig& comp, double duration,
                      std::uint64_t seed, const MlcmOptions& opt) {
    if (!(duration > 0.0)) throw ConfigError("simulate_mlcm: duration must be positive");
    if (!(opt.warmup_fraction >= 0.0 && opt.warmup_fraction < 1.0))
        throw ConfigError("simulate_mlcm: warm-up fraction must lie in [0, 1)");
    if (opt.fixed_connections < 0 || opt.num_servers < 0)
        throw ConfigError("simulate_mlcm: server counts must be non-negative");

    const double p_ul = opt.uplink_outage >= 0.0 ? opt.uplink_outage : comm::uplink_outage(net);
    const double theta = comp.offload_prob();
    const double rate = net.lambda_d() * net.network_area() * (1.0 - p_ul);
    const int K = opt.num_servers > 0
                      ? opt.num_servers
                      : std::max(1, static_cast<int>(std::lround(net.lambda_b() * net.network_area())));
    const double mean_conn = mean_connected_aps(net);

    Engine rng(stream_seed(seed, 0));
    std::exponential_distribution<double> gap(rate > 0.0 ? rate : 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::poisson_distribution<int> conn(mean_conn > 0.0 ? mean_conn : 1.0);
    std::uniform_int_distribution<int> pick(0, K - 1);
    const auto probs = comp.type_probs();
    std::discrete_distribution<std::size_t> type(probs.begin(), probs.end());

    FifoServer cs;
    std::vector<FifoServer> mec(static_cast<std::size_t>(K));
    const double warm = opt.warmup_fraction * duration;
    MlcmRun run;
    run.num_servers = K;
    run.measured_time = duration - warm;

    std::vector<int> chosen;
    std::vector<int> ties;
    double t = 0.0;
    if (rate > 0.0) {
        while (true) {
            t += gap(rng);
            if (t >= duration) break;
            const bool counted = t >= warm;
            if (counted) ++run.arrivals;
            const std::size_t ty = type(rng);
            TaskRecord rec;
            rec.arrival_s = t;
            rec.type_idx = ty;
            if (u01(rng) < theta) {
                rec.server_id = -1;
                rec.queue_len_seen = cs.length_at(t);
                std::exponential_distribution<double> svc(comp.mu_c()[ty]);
                rec.service_s = svc(rng);
                rec.sojourn_s = cs.admit(t, rec.service_s) - t;
            } else {
                int n = opt.fixed_connections > 0 ? opt.fixed_connections : (mean_conn > 0.0 ? conn(rng) : 0);
                n = std::min(n, K);
                if (n == 0) {
                    if (counted) ++run.dropped;
                    continue;
                }
                // n distinct servers: all of them, or rejection sampling.
                chosen.clear();
                if (n == K) {
                    for (int k = 0; k < K; ++k) chosen.push_back(k);
                } else {
                    while (static_cast<int>(chosen.size()) < n) {
                        const int k = pick(rng);
                        if (std::find(chosen.begin(), chosen.end(), k) == chosen.end()) chosen.push_back(k);
                    }
                }
                std::size_t best = std::numeric_limits<std::size_t>::max();
                ties.clear();
                for (int k : chosen) {
                    const std::size_t len = mec[static_cast<std::size_t>(k)].length_at(t);
                    if (len < best) {
                        best = len;
                        ties.clear();
                    }
                    if (len == best) ties.push_back(k);
                }
                const int k = ties.size() == 1
                                  ? ties[0]
                                  : ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
                rec.server_id = k;
                rec.queue_len_seen = best;
                std::exponential_distribution<double> svc(comp.mu_m()[ty]);
                rec.service_s = svc(rng);
                rec.sojourn_s = mec[static_cast<std::size_t>(k)].admit(t, rec.service_s) - t;
            }
            if (rec.queue_len_seen + 1 > opt.max_queue) {
                std::ostringstream os;
                os << "simulate_mlcm: queue length exceeded " << opt.max_queue << " at t = " << t;
                throw StabilityError(os.str());
            }
            if (counted) run.log.tasks.push_back(rec);
        }
    }

    std::vector<double> h;
    for (auto& s : mec) s.occ.accumulate(warm, duration, h);
    run.mec_occupancy_pmf = normalize(std::move(h));
    std::vector<double> hc;
    cs.occ.accumulate(warm, duration, hc);
    run.cs_occupancy_pmf = normalize(std::move(hc));
    run.cs_mean_occupancy = mean_of(run.cs_occupancy_pmf);
    run.mec_mean_occupancy = mean_of(run.mec_occupancy_pmf);
    return run;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    const std::size_t n = std::max(p.size(), q.size());
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = k < p.size() ? p[k] : 0.0;
        const double b = k < q.size() ? q[k] : 0.0;
        s += std::abs(a - b);
    }
    return 0.5 * s;
}

}  // namespace cfmec::sim
