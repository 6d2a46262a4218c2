#include "covert/game.hpp"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <utility>

namespace covert {

namespace {

constexpr int kMaxDoublings = 200;
// Dips shallower than the default relative quadrature tolerance on a value
// near 1 are not resolved, so the curve counts as flat.
constexpr double kFlat = 1e-8;
constexpr double kSnap = 1e-6;

std::mutex cache_mutex;
std::map<std::pair<std::uint64_t, std::int64_t>, LowerStageSolution> cache;

}  // namespace

LowerStageSolution best_response_tau_uncached(double p_s, const NetworkConfig& c) {
    if (!(p_s > 0.0)) throw DomainError("best_response_tau: p_s must be positive");
    auto f = [&](double t) { return detection_error(p_s, t, c); };

    const double lo = c.noise_adv * (1.0 + 1e-9);
    const double f_lo = f(lo);
    double t_prev2 = lo, t_prev = lo, f_prev = f_lo;
    bool descended = false;
    for (int k = 1; k <= kMaxDoublings; ++k) {
        const double t = lo * std::ldexp(1.0, k);
        const double ft = f(t);
        if (descended && ft >= f_prev) {
            RosenbrockSpec spec;
            spec.lo = t_prev2;
            spec.hi = t;
            spec.x0 = t_prev;
            auto r = rosenbrock_minimize(f, spec);
            return {r.x, r.f, false, t_prev2, t};
        }
        if (ft < f_lo - kFlat) descended = true;
        t_prev2 = t_prev;
        t_prev = t;
        f_prev = ft;
    }
    if (descended)
        throw BracketingError("best_response_tau: detection error still falling after " +
                              std::to_string(kMaxDoublings) + " doublings");
    // Hypotheses indistinguishable: every threshold is a best response. Take
    // the midpoint of the first doubling bracket.
    const double hi = 2.0 * lo;
    return {0.5 * (lo + hi), 1.0, true, lo, hi};
}

LowerStageSolution best_response_tau(double p_s, const NetworkConfig& c) {
    if (!(p_s > 0.0)) throw DomainError("best_response_tau: p_s must be positive");
    const std::int64_t q = std::llround(std::log(p_s) / kSnap);
    const auto key = std::make_pair(config_hash(c), q);
    LowerStageSolution sol;
    bool hit = false;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find(key);
        if (it != cache.end()) {
            sol = it->second;
            hit = true;
        }
    }
    if (!hit) {
        // Solved at the grid representative so the entry does not depend on
        // which caller got there first.
        sol = best_response_tau_uncached(std::exp(static_cast<double>(q) * kSnap), c);
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache.emplace(key, sol);
    }
    if (!sol.degenerate) sol.error_star = detection_error(p_s, sol.tau_star, c);
    return sol;
}

void clear_best_response_cache() {
    std::lock_guard<std::mutex> lock(cache_mutex);
    cache.clear();
}

std::size_t best_response_cache_size() {
    std::lock_guard<std::mutex> lock(cache_mutex);
    return cache.size();
}

double network_utility(const Strategy& s, const NetworkConfig& c) {
    return c.u_reward * sinr_prob(s, c) - c.u_price * s.rho * s.p_s * c.utility_power_scale;
}

Slacks constraints(const Strategy& s, const NetworkConfig& c) {
    Slacks out;
    out.covert = best_response_tau(s.p_s, c).error_star - (1.0 - c.eps_covert);
    out.power = ph_prob(s, c) - (1.0 - c.eps_power);
    return out;
}

namespace {

EquilibriumResult assemble(Scheme scheme, double p_s, double rho, const NetworkConfig& c) {
    EquilibriumResult r;
    r.strategy = {scheme, p_s, rho};
    r.sinr = sinr_prob(r.strategy, c);
    r.utility = c.u_reward * r.sinr - c.u_price * rho * p_s * c.utility_power_scale;
    r.lower = best_response_tau(p_s, c);
    r.ph = ph_prob(r.strategy, c);
    r.slack_power = r.ph - (1.0 - c.eps_power);
    r.slack_covert = r.lower.error_star - (1.0 - c.eps_covert);
    return r;
}

}  // namespace

EquilibriumResult solve_equilibrium(Scheme scheme, const NetworkConfig& c, const GaSpec& ga) {
    require_valid(c);
    GaBounds bounds;
    bounds.lo = {c.ps_min, c.rho_min};
    bounds.hi = {c.ps_max, 1.0};
    bounds.log_scale = {true, false};

    auto objective = [&](const Vec2& x) { return network_utility({scheme, x[0], x[1]}, c); };
    auto slacks = [&](const Vec2& x) {
        const Slacks s = constraints({scheme, x[0], x[1]}, c);
        return std::vector<double>{s.power, s.covert};
    };
    GaResult g;
    try {
        g = ga_maximize(objective, slacks, bounds, ga);
    } catch (const InfeasibleError& e) {
        throw InfeasibleError("no feasible " + std::string(to_string(scheme)) +
                                  " strategy: the power and covertness constraints cannot both hold",
                              e.slacks());
    }
    EquilibriumResult r = assemble(scheme, g.best[0], g.best[1], c);
    r.history = std::move(g.history);
    r.evaluations = g.evaluations;
    return r;
}

EquilibriumResult grid_equilibrium(Scheme scheme, const NetworkConfig& c, int n_ps, int n_rho) {
    require_valid(c);
    if (n_ps < 2 || n_rho < 2) throw DomainError("grid_equilibrium: need at least 2 points per axis");
    const double db_lo = mw_to_dbm(c.ps_min), db_hi = mw_to_dbm(c.ps_max);
    double best = -std::numeric_limits<double>::infinity();
    double best_ps = 0.0, best_rho = 0.0;
    std::vector<double> least{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    std::uint64_t evals = 0;
    for (int i = 0; i < n_ps; ++i) {
        const double p_s = i == 0 ? c.ps_min : i == n_ps - 1 ? c.ps_max
                                                              : dbm_to_mw(db_lo + (db_hi - db_lo) * i / (n_ps - 1));
        const double covert = best_response_tau(p_s, c).error_star - (1.0 - c.eps_covert);
        for (int j = 0; j < n_rho; ++j) {
            const double rho = j == n_rho - 1 ? 1.0 : c.rho_min + (1.0 - c.rho_min) * j / (n_rho - 1);
            const Strategy s{scheme, p_s, rho};
            const double power = ph_prob(s, c) - (1.0 - c.eps_power);
            ++evals;
            if (std::min(power, covert) > std::min(least[0], least[1])) least = {power, covert};
            if (power < 0.0 || covert < 0.0) continue;
            const double u = network_utility(s, c);
            if (u > best) {
                best = u;
                best_ps = p_s;
                best_rho = rho;
            }
        }
    }
    if (!(best > -std::numeric_limits<double>::infinity()))
        throw InfeasibleError("no feasible " + std::string(to_string(scheme)) + " strategy on the grid", least);
    EquilibriumResult r = assemble(scheme, best_ps, best_rho, c);
    r.evaluations = evals;
    return r;
}

}  // namespace covert
