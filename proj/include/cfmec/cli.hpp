#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cfmec/energy.hpp"
#include "cfmec/model.hpp"

// Batch experiments: JSON experiment files, the preset library, CSV output
// and the JSON manifest written next to it.
namespace cfmec::cli {

enum class Kind { scmp_vs_R, scp_surface, secp_surface, r_threshold, energy_vs_xi, validate };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);

// One (M, lambda_b, t) row of an R_th or energy sweep.
struct DeploymentRow {
    int antennas_per_ap = 4;
    double lambda_b = 400.0;
    double target_latency = 0.012;
};

struct ExperimentSpec {
    Kind kind = Kind::scmp_vs_R;
    std::string name;
    NetworkParams network;
    ComputeParams compute;
    energy::EnergyParams energy;
    std::vector<double> radius_grid;       // km
    std::vector<double> theta_grid;
    std::vector<double> latency_grid;      // s
    std::vector<double> xi_grid;
    std::vector<double> area_grid;         // km^2
    std::vector<DeploymentRow> rows;
    double r_lo = 0.005;
    double r_hi = 0.2;
    std::uint64_t seed = 1;
    std::size_t replications = 0;          // 0 disables Monte Carlo columns
    double sim_duration = 500.0;           // s, for the queueing simulator
    nlohmann::json source;                 // resolved input, echoed in the manifest
};

// Throws ConfigError on anything malformed.
ExperimentSpec parse_spec(const nlohmann::json& j);

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
nlohmann::json preset(const std::string& name);

// Overlays `patch` onto `base` key by key (objects merge, everything else
// replaces).
nlohmann::json merge(nlohmann::json base, const nlohmann::json& patch);

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void write_csv(std::ostream& os) const;
};

struct RunOutcome {
    int exit_code = 0;   // 0 ok, 2 usage, 3 infeasible, 4 numerical
    std::string status;  // ok | usage_error | infeasible | numerical_error
    std::string message;
    Table table;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;
};

// Evaluates the experiment without touching the filesystem.
Table evaluate(const ExperimentSpec& spec, bool& any_infeasible, bool& all_infeasible);

// Runs the experiment, writes <out>/<name>.csv and <out>/<name>.manifest.json.
// The manifest is written on every outcome, including failures.
RunOutcome run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

// Entry point used by the cfmec executable.
int main_entry(int argc, char** argv);

}  // namespace cfmec::cli
