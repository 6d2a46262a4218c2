#include "covert/solvers.hpp"

#include "covert/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace covert {

void check(const RosenbrockSpec& s) {
    if (!(s.lo < s.hi) || !std::isfinite(s.lo) || !std::isfinite(s.hi))
        throw DomainError("rosenbrock: need finite lo < hi");
    if (!(s.expand > 1.0)) throw DomainError("rosenbrock: expand must exceed 1");
    if (!(s.contract > 0.0 && s.contract < 1.0)) throw DomainError("rosenbrock: contract must lie in (0, 1)");
    if (s.tol < 0.0 || s.initial_step < 0.0) throw DomainError("rosenbrock: tol and initial_step must be nonnegative");
    if (s.max_iters < 1) throw DomainError("rosenbrock: max_iters must be positive");
}

MinimizeResult rosenbrock_minimize(const std::function<double(double)>& f, const RosenbrockSpec& spec) {
    check(spec);
    const double width = spec.hi - spec.lo;
    const double tol = spec.tol > 0.0 ? spec.tol : 1e-6 * width;
    // When the step drops below tol / 4, the two most recent failures bracket
    // the minimizer of a unimodal f within 2 |last step| < tol.
    const double stop = tol / 4.0;

    double x = (spec.x0 >= spec.lo && spec.x0 <= spec.hi) ? spec.x0 : spec.lo + 0.5 * width;
    double step = spec.initial_step > 0.0 ? spec.initial_step : 0.1 * width;
    double fx = f(x);
    int iters = 1;

    while (std::abs(step) >= stop) {
        const double t = std::clamp(x + step, spec.lo, spec.hi);
        if (t == x) {
            step *= -spec.contract;
            continue;
        }
        if (iters >= spec.max_iters)
            throw MaxIterationsError("rosenbrock: iteration limit reached", x, fx);
        const double ft = f(t);
        ++iters;
        if (ft < fx) {
            x = t;
            fx = ft;
            step *= spec.expand;
        } else {
            step *= -spec.contract;
        }
    }

    for (double e : {spec.lo, spec.hi}) {
        const double fe = f(e);
        ++iters;
        if (fe < fx) {
            x = e;
            fx = fe;
        }
    }
    return {x, fx, iters};
}

MinimizeResult exhaustive_min(const std::function<double(double)>& f, double lo, double hi, int n_points) {
    if (n_points < 2) throw DomainError("exhaustive_min: need at least 2 points");
    if (!(lo <= hi)) throw DomainError("exhaustive_min: need lo <= hi");
    MinimizeResult best{lo, f(lo), 1};
    for (int i = 1; i < n_points; ++i) {
        const double x = i == n_points - 1 ? hi : lo + (hi - lo) * i / (n_points - 1);
        const double v = f(x);
        if (v < best.f) {
            best.x = x;
            best.f = v;
        }
    }
    best.iters = n_points;
    return best;
}

void check(const GaSpec& s) {
    if (s.population < 4) throw DomainError("ga: population must be at least 4");
    if (s.generations < 0) throw DomainError("ga: generations must be nonnegative");
    if (s.elitism_count < 0 || s.elitism_count >= s.population)
        throw DomainError("ga: elitism_count must lie in [0, population)");
    if (!(s.crossover_rate >= 0 && s.crossover_rate <= 1) || !(s.mutation_rate >= 0 && s.mutation_rate <= 1))
        throw DomainError("ga: rates must lie in [0, 1]");
    if (!(s.sbx_eta >= 0) || !(s.mutation_sigma > 0)) throw DomainError("ga: bad operator parameters");
}

Vec2 GaBounds::decode(const Vec2& g) const {
    Vec2 x{};
    for (int i = 0; i < 2; ++i) {
        if (log_scale[i])
            x[i] = lo[i] * std::pow(hi[i] / lo[i], g[i]);
        else
            x[i] = lo[i] + (hi[i] - lo[i]) * g[i];
        if (g[i] <= 0.0) x[i] = lo[i];
        if (g[i] >= 1.0) x[i] = hi[i];
    }
    return x;
}

Vec2 GaBounds::encode(const Vec2& x) const {
    Vec2 g{};
    for (int i = 0; i < 2; ++i) {
        g[i] = log_scale[i] ? std::log(x[i] / lo[i]) / std::log(hi[i] / lo[i]) : (x[i] - lo[i]) / (hi[i] - lo[i]);
        g[i] = std::clamp(g[i], 0.0, 1.0);
    }
    return g;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Evaluation {
    std::vector<double> slacks;
    double violation = 0.0;
    double objective = kNegInf;
    bool feasible = false;
};

struct Individual {
    Vec2 genes{};
    Evaluation eval;
    double fitness = kNegInf;
};

template <class Fn>
void run_parallel(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double sbx_beta(double u, double eta) {
    return u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0)) : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

}  // namespace

GaResult ga_maximize(const std::function<double(const Vec2&)>& objective,
                     const std::function<std::vector<double>(const Vec2&)>& constraints, const GaBounds& bounds,
                     const GaSpec& spec) {
    check(spec);
    const bool death = spec.constraint_mode == ConstraintMode::DeathPenalty;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Offspring often repeat an earlier chromosome once the population has
    // converged or a gene sits on a bound, so evaluations are memoized.
    std::map<Vec2, Evaluation> memo;
    GaResult result;
    result.value = kNegInf;
    bool have_feasible = false;
    double least_violation = std::numeric_limits<double>::infinity();
    std::vector<double> least_violating_slacks;
    double penalty = 1.0;

    auto evaluate = [&](std::vector<Individual>& pop, std::size_t first) {
        std::vector<std::size_t> todo;
        std::map<Vec2, std::size_t> pending;
        for (std::size_t i = first; i < pop.size(); ++i)
            if (!memo.count(pop[i].genes) && pending.emplace(pop[i].genes, i).second) todo.push_back(i);
        std::vector<Evaluation> fresh(todo.size());
        run_parallel(todo.size(), spec.workers, [&](std::size_t k) {
            const Vec2 x = bounds.decode(pop[todo[k]].genes);
            Evaluation e;
            e.slacks = constraints(x);
            for (double s : e.slacks) e.violation += std::max(0.0, -s);
            e.feasible = e.violation == 0.0;
            if (e.feasible || !death) e.objective = objective(x);
            fresh[k] = std::move(e);
        });
        for (std::size_t k = 0; k < todo.size(); ++k) {
            const Individual& ind = pop[todo[k]];
            const Evaluation& e = fresh[k];
            ++result.evaluations;
            if (e.feasible && e.objective > result.value) {
                have_feasible = true;
                result.value = e.objective;
                result.best = bounds.decode(ind.genes);
                result.slacks = e.slacks;
            }
            if (!e.feasible && e.violation < least_violation) {
                least_violation = e.violation;
                least_violating_slacks = e.slacks;
            }
            memo.emplace(ind.genes, e);
        }
        for (std::size_t i = first; i < pop.size(); ++i) pop[i].eval = memo.at(pop[i].genes);
    };

    auto assign_fitness = [&](std::vector<Individual>& pop) {
        for (auto& ind : pop) {
            if (ind.eval.feasible)
                ind.fitness = ind.eval.objective;
            else
                ind.fitness = death ? kNegInf : ind.eval.objective - penalty * ind.eval.violation;
        }
    };

    std::vector<Individual> pop(static_cast<std::size_t>(spec.population));
    for (auto& ind : pop) ind.genes = {unif(rng), unif(rng)};
    evaluate(pop, 0);
    assign_fitness(pop);
    result.history.push_back(result.value);

    auto tournament = [&](const std::vector<Individual>& p) -> const Individual& {
        std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
        const Individual& a = p[pick(rng)];
        const Individual& b = p[pick(rng)];
        return b.fitness > a.fitness ? b : a;
    };

    for (int gen = 0; gen < spec.generations; ++gen) {
        std::stable_sort(pop.begin(), pop.end(),
                         [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; });
        if (!death) {
            // Hadj-Alouane and Bean style update driven by the current leader.
            penalty = pop.front().eval.feasible ? std::max(1e-3, penalty / 1.5) : std::min(1e12, penalty * 2.0);
        }
        const int quarter = spec.generations >= 4 ? 4 * gen / spec.generations : 0;
        const double sigma = spec.mutation_sigma * std::pow(0.5, quarter);

        std::vector<Individual> next(pop.begin(), pop.begin() + spec.elitism_count);
        while (next.size() < pop.size()) {
            Vec2 c1 = tournament(pop).genes;
            Vec2 c2 = tournament(pop).genes;
            if (unif(rng) < spec.crossover_rate) {
                for (int i = 0; i < 2; ++i) {
                    const double beta = sbx_beta(unif(rng), spec.sbx_eta);
                    const double a = c1[i], b = c2[i];
                    c1[i] = 0.5 * ((1 + beta) * a + (1 - beta) * b);
                    c2[i] = 0.5 * ((1 - beta) * a + (1 + beta) * b);
                }
            }
            for (Vec2* c : {&c1, &c2}) {
                for (int i = 0; i < 2; ++i) {
                    if (unif(rng) < spec.mutation_rate) (*c)[i] += sigma * normal(rng);
                    (*c)[i] = std::clamp((*c)[i], 0.0, 1.0);
                }
                if (next.size() < pop.size()) next.push_back(Individual{*c, {}, kNegInf});
            }
        }
        pop = std::move(next);
        evaluate(pop, static_cast<std::size_t>(spec.elitism_count));
        assign_fitness(pop);
        result.history.push_back(result.value);
    }

    if (!have_feasible)
        throw InfeasibleError("ga: no feasible point found in " + std::to_string(result.evaluations) + " evaluations",
                              least_violating_slacks);
    return result;
}

}  // namespace covert
