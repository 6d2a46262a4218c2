#include "doctest.h"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"
#include "covert/solvers.hpp"

#include <cmath>
#include <random>

using namespace covert;

TEST_CASE("rosenbrock on a quadratic") {
    RosenbrockSpec s;
    s.lo = 0;
    s.hi = 10;
    auto r = rosenbrock_minimize([](double x) { return (x - 3) * (x - 3); }, s);
    CHECK(std::abs(r.x - 3) <= 1e-5);
    CHECK(r.f <= 9.0);
    CHECK(r.f <= 49.0);
}

TEST_CASE("rosenbrock on a kink") {
    RosenbrockSpec s;
    s.lo = -4;
    s.hi = 7;
    const double t0 = 1.234567;
    auto r = rosenbrock_minimize([&](double x) { return std::abs(x - t0); }, s);
    CHECK(std::abs(r.x - t0) <= 1e-6 * 11);
}

TEST_CASE("rosenbrock on random unimodal functions") {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(0, 1);
    int misses = 0;
    for (int k = 0; k < 50; ++k) {
        RosenbrockSpec s;
        s.lo = -10 * u(rng);
        s.hi = 1 + 20 * u(rng);
        const double a = s.lo + (s.hi - s.lo) * u(rng);
        const double p = 1 + 2 * u(rng);
        auto r = rosenbrock_minimize([&](double x) { return std::pow(std::abs(x - a), p); }, s);
        if (std::abs(r.x - a) > 1e-6 * (s.hi - s.lo)) ++misses;
    }
    CHECK(misses == 0);
}

TEST_CASE("rosenbrock minimum at an endpoint and iteration cap") {
    RosenbrockSpec s;
    s.lo = 2;
    s.hi = 5;
    auto r = rosenbrock_minimize([](double x) { return x; }, s);
    CHECK(r.x == 2.0);
    s.max_iters = 3;
    try {
        rosenbrock_minimize([](double x) { return (x - 4.3) * (x - 4.3); }, s);
        FAIL("expected MaxIterationsError");
    } catch (const MaxIterationsError& e) {
        CHECK(std::abs(e.best_x() - 4.3) < 1.0);
    }
    s.contract = 1.5;
    CHECK_THROWS_AS(rosenbrock_minimize([](double x) { return x; }, s), DomainError);
}

TEST_CASE("rosenbrock detection threshold against a fine grid") {
    auto c = NetworkConfig::defaults();
    auto f = [&](double t) { return detection_error(10.0, t, c); };
    RosenbrockSpec s;
    s.lo = c.noise_adv * (1 + 1e-9);
    s.hi = 8.0;
    auto r = rosenbrock_minimize(f, s);
    auto g = exhaustive_min(f, s.lo, s.hi, 10000);
    const double step = (s.hi - s.lo) / 9999;
    CHECK(std::abs(r.x - g.x) <= step);
    CHECK(r.f <= g.f + 1e-9);
}

TEST_CASE("exhaustive_min") {
    auto a = exhaustive_min([](double x) { return x; }, 0, 1, 11);
    CHECK(a.x == 0.0);
    CHECK(a.f == 0.0);
    auto b = exhaustive_min([](double x) { return -x; }, 0, 1, 11);
    CHECK(b.x == 1.0);
    CHECK(b.f == -1.0);
    auto c = exhaustive_min([](double) { return 4.0; }, -2, 1, 7);
    CHECK(c.x == -2.0);
    CHECK_THROWS_AS(exhaustive_min([](double x) { return x; }, 0, 1, 1), DomainError);
}

namespace {

double bowl(const Vec2& x) { return -(x[0] - 0.3) * (x[0] - 0.3) - (x[1] - 0.7) * (x[1] - 0.7); }

std::vector<double> no_constraints(const Vec2&) { return {}; }

std::vector<double> half_plane(const Vec2& x) { return {0.5 - x[0] - x[1]}; }

bool nondecreasing(const std::vector<double>& h) {
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i] < h[i - 1]) return false;
    return true;
}

}  // namespace

TEST_CASE("ga on a concave bowl") {
    GaBounds b;
    auto r = ga_maximize(bowl, no_constraints, b, GaSpec{});
    CHECK(std::abs(r.best[0] - 0.3) <= 0.01);
    CHECK(std::abs(r.best[1] - 0.7) <= 0.01);
    CHECK(r.history.size() == 121);
    CHECK(nondecreasing(r.history));
}

TEST_CASE("ga with a linear constraint") {
    GaBounds b;
    for (auto mode : {ConstraintMode::DeathPenalty, ConstraintMode::AdaptivePenalty}) {
        GaSpec s;
        s.constraint_mode = mode;
        auto r = ga_maximize(bowl, half_plane, b, s);
        CAPTURE(static_cast<int>(mode));
        CHECK(r.best[0] + r.best[1] <= 0.5);
        CHECK(std::abs(r.best[0] - 0.05) <= 0.02);
        CHECK(std::abs(r.best[1] - 0.45) <= 0.02);
        CHECK(nondecreasing(r.history));
        REQUIRE(r.slacks.size() == 1);
        CHECK(r.slacks[0] >= 0.0);
    }
}

TEST_CASE("ga determinism and worker independence") {
    GaBounds b;
    b.lo = {1.0, 0.01};
    b.hi = {1000.0, 1.0};
    b.log_scale = {true, false};
    auto obj = [](const Vec2& x) { return -std::pow(std::log10(x[0]) - 1.0, 2) - x[1]; };
    GaSpec s;
    s.seed = 99;
    auto r1 = ga_maximize(obj, no_constraints, b, s);
    auto r2 = ga_maximize(obj, no_constraints, b, s);
    s.workers = 3;
    auto r3 = ga_maximize(obj, no_constraints, b, s);
    CHECK(r1.best == r2.best);
    CHECK(r1.best == r3.best);
    CHECK(r1.history == r3.history);
    CHECK(std::abs(std::log10(r1.best[0]) - 1.0) < 0.02);
    CHECK(r1.best[1] == 0.01);
    s.seed = 100;
    auto r4 = ga_maximize(obj, no_constraints, b, s);
    CHECK(r4.history != r1.history);
}

TEST_CASE("ga infeasible problem") {
    GaBounds b;
    GaSpec s;
    s.generations = 10;
    try {
        ga_maximize(bowl, [](const Vec2& x) { return std::vector<double>{x[0] - 2.0, 1.0}; }, b, s);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        REQUIRE(e.slacks().size() == 2);
        CHECK(e.slacks()[0] == doctest::Approx(-1.0));
    }
    s.elitism_count = s.population;
    CHECK_THROWS_AS(ga_maximize(bowl, no_constraints, b, s), DomainError);
}

TEST_CASE("ga bounds encoding") {
    GaBounds b;
    b.lo = {1.0, 0.0};
    b.hi = {1000.0, 2.0};
    b.log_scale = {true, false};
    auto x = b.decode({0.5, 0.25});
    CHECK(x[0] == doctest::Approx(std::sqrt(1000.0)));
    CHECK(x[1] == doctest::Approx(0.5));
    auto g = b.encode(x);
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(0.25));
    CHECK(b.decode({0.0, 1.0}) == Vec2{1.0, 2.0});
}
