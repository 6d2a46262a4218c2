#include "doctest.h"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"
#include "covert/game.hpp"

#include <cmath>

using namespace covert;

TEST_CASE("lower stage at 10 dBm matches an exhaustive grid") {
    auto c = NetworkConfig::defaults();
    auto sol = best_response_tau_uncached(10.0, c);
    CHECK_FALSE(sol.degenerate);
    CHECK(sol.tau_star > c.noise_adv);
    CHECK(sol.error_star == detection_error(10.0, sol.tau_star, c));
    const double lo = c.noise_adv * (1 + 1e-9);
    auto grid = exhaustive_min([&](double t) { return detection_error(10.0, t, c); }, lo, sol.bracket_hi, 10000);
    CHECK(std::abs(sol.tau_star - grid.x) <= (sol.bracket_hi - lo) / 9999);
    CHECK(sol.error_star <= grid.f + 1e-9);
}

TEST_CASE("lower stage with a vanishing signal is degenerate") {
    auto c = NetworkConfig::defaults();
    auto sol = best_response_tau(1e-12, c);
    CHECK(sol.degenerate);
    CHECK(std::abs(sol.error_star - 1.0) <= 1e-3);
    CHECK(sol.tau_star == doctest::Approx(0.5 * (sol.bracket_lo + sol.bracket_hi)));
    auto s = constraints({Scheme::PS, 1e-12, 0.5}, c);
    CHECK(s.covert == doctest::Approx(c.eps_covert));
    CHECK_THROWS_AS(best_response_tau(0.0, c), DomainError);
}

TEST_CASE("optimal detection error is nonincreasing in the transmit power") {
    auto c = NetworkConfig::defaults();
    double prev = 2.0;
    for (int i = 0; i < 10; ++i) {
        const double p = dbm_to_mw(-10.0 + 4.0 * i);
        const double e = best_response_tau(p, c).error_star;
        CAPTURE(p);
        CHECK(e <= prev + 1e-9);
        prev = e;
    }
}

TEST_CASE("memoized and direct lower stage agree") {
    auto c = NetworkConfig::defaults();
    clear_best_response_cache();
    for (double p : {3.0, 10.0, 31.6}) {
        auto a = best_response_tau(p, c);
        auto b = best_response_tau_uncached(p, c);
        const double tol = 1e-6 * (b.bracket_hi - c.noise_adv);
        CHECK(std::abs(a.tau_star - b.tau_star) <= 2 * tol);
        CHECK(std::abs(a.error_star - b.error_star) <= 1e-9);
    }
    CHECK(best_response_cache_size() == 3);
    best_response_tau(10.0 * (1 + 1e-8), c);
    CHECK(best_response_cache_size() == 3);
    auto d = c;
    d.lambda_a = 0.001;
    best_response_tau(10.0, d);
    CHECK(best_response_cache_size() == 4);
}

TEST_CASE("network utility") {
    auto c = NetworkConfig::defaults();
    c.u_reward = 0.0;
    const Strategy s{Scheme::PS, 20.0, 0.3};
    CHECK(network_utility(s, c) == -c.u_price * 0.3 * 20.0 * c.utility_power_scale);
    c = NetworkConfig::defaults();
    c.utility_power_scale = 1.0;
    const Strategy m{Scheme::TS, 20.0, c.rho_min};
    CHECK(sinr_prob(m, c) - network_utility(m, c) == doctest::Approx(0.01 * 20.0));
}

TEST_CASE("constraint slacks") {
    auto c = NetworkConfig::defaults();
    auto s = constraints({Scheme::PS, 10.0, 0.01}, c);
    CHECK(s.power >= 0.0);
    CHECK(s.covert >= 0.0);
    CHECK(s.feasible());
    c.eps_covert = 1.0;
    auto big = constraints({Scheme::PS, 1000.0, 0.01}, c);
    CHECK(big.covert == doctest::Approx(best_response_tau(1000.0, c).error_star));
    CHECK(big.covert >= 0.0);
    c.eps_power = 1.0;
    CHECK(constraints({Scheme::TS, 1.0, 1.0}, c).power >= 0.0);
}

namespace {

double covert_power_limit(const NetworkConfig& c) {
    double lo = c.ps_min, hi = c.ps_max;
    for (int i = 0; i < 60; ++i) {
        const double mid = std::sqrt(lo * hi);
        (best_response_tau(mid, c).error_star >= 1 - c.eps_covert ? lo : hi) = mid;
    }
    return hi;
}

void check_result(const EquilibriumResult& r, const NetworkConfig& c) {
    CHECK(r.slack_power >= 0.0);
    CHECK(r.slack_covert >= 0.0);
    CHECK(constraints(r.strategy, c).feasible());
    CHECK(std::abs(c.u_reward * r.sinr - c.u_price * r.strategy.rho * r.strategy.p_s * c.utility_power_scale -
                   r.utility) <= 1e-9);
    CHECK(r.strategy.p_s <= covert_power_limit(c) * (1 + 1e-9));
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
}

}  // namespace

TEST_CASE("power splitting equilibrium at the defaults") {
    auto c = NetworkConfig::defaults();
    auto r = solve_equilibrium(Scheme::PS, c);
    check_result(r, c);
    CHECK(r.strategy.rho == c.rho_min);
    CHECK(std::abs(mw_to_dbm(r.strategy.p_s) - 10.0) <= 3.0);
    auto g = grid_equilibrium(Scheme::PS, c, 40, 40);
    CHECK(r.utility >= g.utility - 1e-2);
    auto again = solve_equilibrium(Scheme::PS, c);
    CHECK(again.strategy.p_s == r.strategy.p_s);
    CHECK(again.utility == r.utility);
}

TEST_CASE("time switching equilibrium at the defaults") {
    auto c = NetworkConfig::defaults();
    auto r = solve_equilibrium(Scheme::TS, c);
    check_result(r, c);
    CHECK(r.strategy.rho >= 0.7);
    CHECK(r.strategy.rho <= 0.9);
    auto g = grid_equilibrium(Scheme::TS, c, 40, 40);
    CHECK(r.utility >= g.utility - 1e-2);
}

TEST_CASE("long links with dense adversaries are infeasible") {
    auto c = NetworkConfig::defaults();
    c.r_link = 2.0;
    c.lambda_a = 0.002;
    for (auto scheme : {Scheme::PS, Scheme::TS}) {
        try {
            solve_equilibrium(scheme, c);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& e) {
            REQUIRE(e.slacks().size() == 2);
            CHECK(std::min(e.slacks()[0], e.slacks()[1]) < 0.0);
        }
        CHECK_THROWS_AS(grid_equilibrium(scheme, c, 20, 20), InfeasibleError);
    }
}

TEST_CASE("invalid inputs") {
    auto c = NetworkConfig::defaults();
    c.alpha = 2.0;
    CHECK_THROWS_AS(solve_equilibrium(Scheme::PS, c), ConfigError);
    CHECK_THROWS_AS(grid_equilibrium(Scheme::PS, NetworkConfig::defaults(), 1, 5), DomainError);
}
