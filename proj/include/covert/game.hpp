#pragma once

#include "covert/core.hpp"
#include "covert/solvers.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace covert {

/// The adversary's best response to a transmit power.
struct LowerStageSolution {
    double tau_star = 0.0;    // linear mW, above noise_adv
    double error_star = 1.0;  // detection error at tau_star
    /// Detection error was flat at 1 over the whole scan; tau_star is then a bracket midpoint.
    bool degenerate = false;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/**
 * Rosenbrock minimum of detection_error(p_s, .) over a bracket grown by
 * doubling from noise_adv (1 + 1e-9).
 *
 * Memoized per config and p_s, with p_s snapped to a 1e-6 relative grid;
 * error_star is always re-evaluated at the exact p_s. Throws BracketingError
 * when the curve keeps falling past the doubling cap.
 */
LowerStageSolution best_response_tau(double p_s, const NetworkConfig& c);
/// Same search without the memo and without snapping.
LowerStageSolution best_response_tau_uncached(double p_s, const NetworkConfig& c);

void clear_best_response_cache();
std::size_t best_response_cache_size();

/// u_reward * P_sinr - u_price * rho * p_s * utility_power_scale.
double network_utility(const Strategy& s, const NetworkConfig& c);

struct Slacks {
    double power = 0.0;   // P_ph - (1 - eps_power)
    double covert = 0.0;  // error_star - (1 - eps_covert)
    bool feasible() const { return power >= 0.0 && covert >= 0.0; }
};

Slacks constraints(const Strategy& s, const NetworkConfig& c);

struct EquilibriumResult {
    Strategy strategy;
    double utility = 0.0;
    LowerStageSolution lower;
    double slack_power = 0.0;
    double slack_covert = 0.0;
    double sinr = 0.0;  // P_sinr at the strategy, from which utility is rebuilt
    double ph = 0.0;
    /// GA best-so-far per generation; empty for the grid oracle.
    std::vector<double> history;
    std::uint64_t evaluations = 0;
};

/// Leader's constrained optimum found by the GA over (p_s in dB, rho). Throws InfeasibleError.
EquilibriumResult solve_equilibrium(Scheme scheme, const NetworkConfig& c, const GaSpec& ga = {});

/// Exhaustive reference: n_ps powers evenly spaced in dB times n_rho evenly spaced rho values.
EquilibriumResult grid_equilibrium(Scheme scheme, const NetworkConfig& c, int n_ps, int n_rho);

}  // namespace covert
