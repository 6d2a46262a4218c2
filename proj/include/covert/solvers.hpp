#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace covert {

/**
 * One-dimensional Rosenbrock search: a step is multiplied by `expand` after
 * an improvement and by -`contract` after a failure.
 *
 * `tol` is the accuracy asked of the minimizer. Zero selects 1e-6 of the
 * interval width. The search starts at `x0`, or at the midpoint when `x0`
 * lies outside [lo, hi]; `initial_step` zero means a tenth of the width.
 */
struct RosenbrockSpec {
    double lo = 0.0;
    double hi = 1.0;
    double initial_step = 0.0;
    double expand = 3.0;
    double contract = 0.5;
    double tol = 0.0;
    int max_iters = 10000;
    double x0 = -std::numeric_limits<double>::infinity();
};

void check(const RosenbrockSpec& spec);

struct MinimizeResult {
    double x = 0.0;
    double f = 0.0;
    int iters = 0;
};

/// Throws MaxIterationsError carrying the best point when `max_iters` evaluations do not suffice.
MinimizeResult rosenbrock_minimize(const std::function<double(double)>& f, const RosenbrockSpec& spec);

/// Grid argmin over n_points equally spaced nodes, ties going to the smaller x.
MinimizeResult exhaustive_min(const std::function<double(double)>& f, double lo, double hi, int n_points);

enum class ConstraintMode { DeathPenalty, AdaptivePenalty };

struct GaSpec {
    int population = 60;
    int generations = 120;
    double crossover_rate = 0.9;
    double mutation_rate = 0.2;
    int elitism_count = 2;
    std::uint64_t seed = 1;
    ConstraintMode constraint_mode = ConstraintMode::DeathPenalty;
    double sbx_eta = 15.0;
    double mutation_sigma = 0.1;
    /// Threads evaluating one generation. Results do not depend on it.
    unsigned workers = 1;
};

void check(const GaSpec& spec);

using Vec2 = std::array<double, 2>;

/// Search box. A log-scaled coordinate is encoded uniformly in its logarithm (dB for powers).
struct GaBounds {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};
    std::array<bool, 2> log_scale{false, false};

    Vec2 decode(const Vec2& genes) const;
    Vec2 encode(const Vec2& x) const;
};

struct GaResult {
    Vec2 best{};
    double value = 0.0;
    std::vector<double> slacks;
    /// Best feasible objective after each generation; -inf until one is found.
    std::vector<double> history;
    std::uint64_t evaluations = 0;
};

/**
 * Real-coded GA maximizing `objective` subject to every entry of
 * `constraints(x)` being nonnegative.
 *
 * Under the death penalty the objective is only evaluated at feasible points.
 * The incumbent is the best feasible point ever evaluated. Throws
 * InfeasibleError with the least-violating slacks if none was found.
 */
GaResult ga_maximize(const std::function<double(const Vec2&)>& objective,
                     const std::function<std::vector<double>(const Vec2&)>& constraints, const GaBounds& bounds,
                     const GaSpec& spec);

}  // namespace covert
