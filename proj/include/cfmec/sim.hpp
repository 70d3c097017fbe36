#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "cfmec/model.hpp"

// Monte Carlo counterparts of the analytical results: a spatial simulator
// for SIR statistics and an event-driven simulator of the CS queue plus the
// minimum-load MEC servers.
namespace cfmec::sim {

using Engine = std::mt19937_64;

// Seed of replication `rep`'s private stream; runs agree regardless of how
// replications are spread over threads.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t rep);
Engine replication_engine(std::uint64_t seed, std::uint64_t rep);

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
};

// Sample mean and its standard error.
Estimate estimate(const std::vector<double>& xs);

struct SpatialScenario {
    double half_width = 0.0;  // km, square window centred on the typical user
    double guard = 0.0;       // km
    std::size_t replications = 1;
    std::uint64_t seed = 1;
};

// Distance beyond which the interference mean left out is below
// `tail_fraction` of the total.
double interference_guard(const NetworkConfig& net, double tail_fraction = 1e-4);

// Window of half-width 4R + guard.
SpatialScenario make_scenario(const NetworkConfig& net, std::size_t replications, std::uint64_t seed);

// Throws ConfigError unless the window covers 4R + guard and replications >= 1.
void validate(const SpatialScenario& sc, const NetworkConfig& net);

struct UplinkSimResult {
    Estimate outage;
    Estimate connected_aps;
};

// Fraction of drops where every connected AP sees SIR below the uplink
// threshold.
UplinkSimResult simulate_uplink_outage(const NetworkConfig& net, const SpatialScenario& sc);

struct DownlinkSimResult {
    Estimate outage;
    Estimate interference_mean;
    // Sample variance; the standard error uses the fourth central moment.
    Estimate interference_variance;
    Estimate connected_aps;
};

DownlinkSimResult simulate_downlink_sir(const NetworkConfig& net, const SpatialScenario& sc);

// ---------------------------------------------------------------------------
// Minimum-load dispatch

struct TaskRecord {
    double arrival_s = 0.0;
    int server_id = -1;  // -1 is the CS
    std::size_t queue_len_seen = 0;
    double sojourn_s = 0.0;
    double service_s = 0.0;
    std::size_t type_idx = 0;
};

struct EventLog {
    std::vector<TaskRecord> tasks;  // post warm-up, in arrival order

    // CSV with header arrival_s,server_id,queue_len_seen,sojourn_s,type_idx.
    void write_csv(std::ostream& os) const;
};

struct MlcmOptions {
    // 0: round(lambda_b * |A|), at least 1.
    int num_servers = 0;
    // 0: Poisson(lambda_b pi R^2) connected servers per task, else this many.
    int fixed_connections = 0;
    // Uplink outage used to thin arrivals. Negative: use the analytical value.
    double uplink_outage = -1.0;
    double warmup_fraction = 0.1;
    std::size_t max_queue = 1000000;
};

struct MlcmRun {
    EventLog log;
    int num_servers = 0;
    double measured_time = 0.0;       // length of the post warm-up window
    std::size_t arrivals = 0;         // post warm-up, including dropped tasks
    std::size_t dropped = 0;          // MEC tasks with no connected server
    std::vector<double> mec_occupancy_pmf;  // time-average, pooled over servers
    std::vector<double> cs_occupancy_pmf;
    double cs_mean_occupancy = 0.0;
    double mec_mean_occupancy = 0.0;  // per server

    // Fraction of post warm-up arrivals done within t; dropped tasks fail.
    double success_fraction(double t) const;
    double mean_sojourn_cs() const;
    double mean_sojourn_mec() const;
};

// Tasks arrive at rate lambda_d |A| (1 - p_ul). Each goes to the CS with
// probability theta, otherwise to the shortest queue among its connected
// MEC servers (ties broken uniformly). Queue length counts the task in
// service. Arrivals stop at `duration`; every admitted task is run to
// completion. Throws StabilityError when a queue exceeds max_queue.
MlcmRun simulate_mlcm(const NetworkConfig& net, const ComputeConfig& comp, double duration,
                      std::uint64_t seed, const MlcmOptions& opt = {});

// Total variation distance between two pmfs (missing entries are zero).
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace cfmec::sim
