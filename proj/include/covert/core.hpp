#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace covert {

/// Power conversions. Everything inside the library is linear milliwatts.
double dbm_to_mw(double x_dbm);
double mw_to_dbm(double x_mw);

enum class Scheme { PS, TS };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

/*!
 * Physical and game parameters of the network.
 *
 * Powers and noises are linear mW, distances in meters, densities per m².
 * Path loss is |x - y|^-alpha with a 1 m reference distance.
 * `lambda_u` is carried for completeness; no formula uses it.
 */
struct NetworkConfig {
    double lambda_d = 0.1;
    double lambda_a = 0.002;
    double lambda_b = 0.01;
    double lambda_u = 0.1;
    double p_active_d = 0.5;
    double p_active_b = 0.5;
    double p_cell = 1000.0;  // 30 dBm
    double alpha = 4.0;
    int m_antennas = 10;
    double r_link = 1.0;
    double noise_adv = 1e-9;  // -90 dBm
    double noise_rf = 1e-9;
    double noise_rx = 1e-9;
    double packet_bits = 2.0;
    double slot_s = 1.0;
    double ph_threshold = 10.0;  // 10 dBm
    double eps_covert = 0.01;
    double eps_power = 0.01;
    double u_reward = 1.0;
    double u_price = 1.0;
    double ps_min = 1.0;     // 0 dBm
    double ps_max = 1000.0;  // 30 dBm
    double rho_min = 0.01;
    /// Multiplies rho * p_s (mW) in the utility's cost term. 1e-3 prices the
    /// transmit power in watts, which keeps utilities O(1) with u_price = 1.
    double utility_power_scale = 1e-3;

    static NetworkConfig defaults() { return {}; }
};

/// The leader's decision.
struct Strategy {
    Scheme scheme = Scheme::PS;
    double p_s = 10.0;
    double rho = 0.01;
};

/// Kind of a config field, used by the text format. Power fields accept `_dbm` and `_mw` suffixes.
enum class FieldKind { Real, Power, Integer };

struct ConfigField {
    std::string_view name;
    FieldKind kind;
};

/// Every NetworkConfig field in declaration order.
const std::vector<ConfigField>& config_fields();

/// Throws ConfigError for an unknown name. Setting m_antennas needs an integral value.
double get_field(const NetworkConfig& c, std::string_view name);
void set_field(NetworkConfig& c, std::string_view name, double value);

/// FNV-1a over field names and value bit patterns.
std::uint64_t config_hash(const NetworkConfig& c);

struct Violation {
    std::string field;
    std::string message;
};

/// Every violated invariant, one entry per offending field. Empty means valid.
std::vector<Violation> validate(const NetworkConfig& config);

/// Throws ConfigError naming every violation when the config is invalid.
void require_valid(const NetworkConfig& config);

/// Strategy bounds check against a config; empty means the strategy is admissible.
std::vector<Violation> validate(const Strategy& strategy, const NetworkConfig& config);

/// Monte Carlo estimate of a probability with a 95% Wilson half-width.
struct ProbabilityEstimate {
    double value = 0.0;
    std::uint64_t trials = 0;
    double ci_halfwidth = 0.0;

    double lower() const;
    double upper() const;
};

ProbabilityEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials);

}  // namespace covert
