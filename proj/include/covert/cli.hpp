#pragma once

#include "covert/core.hpp"
#include "covert/montecarlo.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace covert::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kValidationFailure = 2, kInfeasible = 3, kNonconvergence = 4 };

/// Bad command line: unknown subcommand, flag or kind name.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// `key = value` lines; `#` starts a comment. Throws ConfigError on malformed or repeated keys.
std::vector<KeyValue> parse_key_values(std::string_view text);

double parse_number(std::string_view text, std::string_view what);

/// Applies one setting. Power fields also accept `<name>_dbm` and `<name>_mw`.
void apply_setting(NetworkConfig& c, std::string_view key, std::string_view value);

/// Defaults overridden by the settings in `text`; the result is validated.
NetworkConfig parse_config(std::string_view text);
/// Empty path means the defaults.
NetworkConfig load_config(const std::string& path);

std::string read_file(const std::string& path);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// Fixed-format number so that reruns are byte-identical.
std::string fmt(double x);

struct RunInfo {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
};

/// Comment line with the config hash, seed and version, then the header and rows.
void write_csv(std::ostream& os, const Table& t, const RunInfo& info);

/// Writes `path` and `path.meta.json`; an empty path sends the CSV to `fallback`.
void write_outputs(const std::string& path, const Table& t, const RunInfo& info, int exit_code,
                   std::ostream& fallback);

struct Result {
    Table table;
    RunInfo info;
    int exit_code = kOk;
    std::vector<std::string> diagnostics;
    std::optional<Table> surface;
};

struct ValidateOptions {
    std::string config_path;
    std::vector<mc::MetricKind> kinds;  // empty means every kind except InterferenceCdfAt
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    double p_s_dbm = 10.0;
    int grid = 0;  // 0: 10 rho points and 20 tau points
    unsigned workers = 0;
};

/// Parses a comma separated list of metric kinds; throws UsageError listing the valid names.
std::vector<mc::MetricKind> parse_kinds(std::string_view list);

/// Analytic value next to a Monte Carlo estimate at each grid point, with a pass flag.
Result run_validate(const ValidateOptions& o);

struct LowerStageOptions {
    std::string config_path;
    double p_s_dbm = 10.0;
    int grid = 200;
    std::optional<double> tau_min;  // mW; must exceed noise_adv
    std::optional<double> tau_max;
};

/// Detection error on a tau grid followed by the Rosenbrock optimum.
Result run_lower_stage(const LowerStageOptions& o);

struct EquilibriumOptions {
    std::string config_path;
    std::vector<Scheme> schemes{Scheme::PS};
    std::uint64_t seed = 1;
    int population = 60;
    int generations = 120;
    unsigned workers = 1;
    bool grid_solver = false;  // exhaustive grid instead of the GA
    int grid = 0;              // > 0 also produces a grid x grid utility surface
};

Result run_equilibrium(const EquilibriumOptions& o);

enum class SweepTask { Equilibrium, LowerStage, Validate };

struct SweepSpec {
    std::string config_path;
    std::string field;
    std::vector<double> values;
    SweepTask task = SweepTask::Equilibrium;
    std::vector<Scheme> schemes{Scheme::PS, Scheme::TS};
    std::string out;
    std::vector<KeyValue> overrides;
    bool grid_solver = false;
    int grid = 40;
    double p_s_dbm = 10.0;
    std::uint64_t trials = 20000;
    std::vector<mc::MetricKind> kinds;
};

/// `base_dir` resolves a relative `config` entry.
SweepSpec parse_sweep_spec(std::string_view text, const std::string& base_dir = "");

struct SweepOptions {
    std::string spec_path;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> trials;
    unsigned jobs = 0;
};

/// Points run concurrently with per-point seeds; rows come out in sweep order.
Result run_sweep(const SweepOptions& o, const SweepSpec& spec);

/// Full command-line entry point; returns the process exit code.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covert::cli
