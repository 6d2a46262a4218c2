// Acceptance run: one PASS / FAIL line per criterion, nonzero exit if any fails.

#include "covert/analytics.hpp"
#include "covert/cli.hpp"
#include "covert/errors.hpp"
#include "covert/game.hpp"
#include "covert/montecarlo.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace covert;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string num(double x) { return cli::fmt(x); }

int sign_changes(const std::vector<double>& d) {
    int changes = 0, last = 0;
    for (std::size_t i = 1; i < d.size(); ++i) {
        const double diff = d[i] - d[i - 1];
        const int s = diff > 0 ? 1 : diff < 0 ? -1 : 0;
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

Outcome analytic_vs_monte_carlo() {
    Outcome o;
    cli::ValidateOptions v;
    v.trials = 100000;
    v.seed = 20250101;
    auto r = cli::run_validate(v);
    int fails = 0;
    double worst = 0.0;
    for (const auto& row : r.table.rows) {
        worst = std::max(worst, std::abs(std::stod(row[2]) - std::stod(row[3])));
        if (row[6] != "1") {
            ++fails;
            o.require(false, row[0] + " at " + row[1] + ": analytic " + row[2] + " vs " + row[3] + " +- " + row[4]);
        }
    }
    o.require(r.table.rows.size() == 4 * 10 + 2 * 20, "unexpected grid size");
    if (o.pass)
        o.detail = std::to_string(r.table.rows.size()) + " points within max(0.02, 3 CI), largest gap " + num(worst);
    return o;
}

Outcome lower_stage_optimality() {
    Outcome o;
    const auto c = NetworkConfig::defaults();
    const double ps = dbm_to_mw(10.0);
    const auto sol = best_response_tau_uncached(ps, c);
    const double lo = c.noise_adv * (1 + 1e-9);
    std::vector<double> d;
    double best = 2.0;
    for (int i = 0; i < 10000; ++i) {
        const double t = lo + (sol.bracket_hi - lo) * i / 9999.0;
        d.push_back(detection_error(ps, t, c));
        best = std::min(best, d.back());
    }
    o.require(std::abs(sol.error_star - best) <= 1e-4,
              "Rosenbrock " + num(sol.error_star) + " vs grid " + num(best));
    const int changes = sign_changes(d);
    o.require(changes == 1, std::to_string(changes) + " sign changes on the grid");
    if (o.pass)
        o.detail = "tau* = " + num(sol.tau_star) + " mW, error " + num(sol.error_star) + ", grid min " + num(best) +
                   ", one sign change";
    return o;
}

Outcome boundaries() {
    Outcome o;
    const auto c = NetworkConfig::defaults();
    o.require(detection_error(10.0, c.noise_adv, c) == 1.0, "detection_error(N_a) != 1");
    double prev_gap = 1.0;
    for (double t : {1e2, 1e4, 1e6, 1e8}) {
        const double gap = 1.0 - detection_error(10.0, t, c);
        o.require(gap <= prev_gap, "not approaching 1 at tau = " + num(t));
        prev_gap = gap;
    }
    o.require(prev_gap < 1e-3, "gap at 1e8 mW is " + num(prev_gap));
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double t = c.noise_adv * std::pow(1e15, i / 199.0) * (1 + 1e-9);
        worst = std::max(worst, std::abs(detection_error(1e-12, t, c) - 1.0));
    }
    o.require(worst <= 1e-3, "p_s = 1e-12 deviates by " + num(worst));
    if (o.pass) o.detail = "D(N_a) = 1, 1 - D(1e8 mW) = " + num(prev_gap) + ", max |D - 1| at 1e-12 mW = " + num(worst);
    return o;
}

Outcome derivative_machinery() {
    Outcome o;
    using cplx = std::complex<double>;
    const double alpha = 4.0;
    auto laplace_c = [&](cplx s, double nu) { return std::exp(-nu * std::pow(s, 2.0 / alpha)); };
    // n = 1 by the classic complex step; higher orders by the trapezoid rule on
    // Cauchy's integral, the same idea extended to n-th derivatives.
    auto reference = [&](double s, int n, double nu) {
        if (n == 1) {
            const double h = 1e-30;
            return std::imag(laplace_c(cplx(s, h), nu)) / h;
        }
        const int N = 160;
        const double r = 0.5 * s;
        cplx acc = 0;
        for (int k = 0; k < N; ++k) {
            const cplx e = std::polar(1.0, 2 * std::numbers::pi * (k + 0.5) / N);
            acc += laplace_c(s + r * e, nu) * std::pow(e, -n);
        }
        return std::real(acc) / N * std::tgamma(n + 1.0) / std::pow(r, n);
    };
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double s = 0.05 * std::pow(400.0, u(rng));
        const double nu = 0.2 + 4.8 * u(rng);
        for (int n = 1; n <= 9; ++n) {
            const double want = reference(s, n, nu);
            const double got = laplace_nth_derivative(s, n, {nu, alpha});
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    }
    o.require(worst <= 1e-6, "relative error " + num(worst));
    if (o.pass) o.detail = "90 derivatives, worst relative error " + num(worst);
    return o;
}

Outcome equilibrium_reproduction() {
    Outcome o;
    const auto c = NetworkConfig::defaults();
    std::ostringstream d;
    for (Scheme s : {Scheme::PS, Scheme::TS}) {
        const auto ga = solve_equilibrium(s, c);
        const auto grid = grid_equilibrium(s, c, 100, 100);
        const std::string name(to_string(s));
        if (s == Scheme::PS) {
            o.require(ga.strategy.rho == c.rho_min, "PS rho* = " + num(ga.strategy.rho));
            o.require(std::abs(mw_to_dbm(ga.strategy.p_s) - 10.0) <= 3.0,
                      "PS p_s* = " + num(mw_to_dbm(ga.strategy.p_s)) + " dBm");
        } else {
            o.require(ga.strategy.rho >= 0.7 && ga.strategy.rho <= 0.9, "TS rho* = " + num(ga.strategy.rho));
        }
        o.require(std::abs(ga.utility - grid.utility) <= 1e-2,
                  name + " GA " + num(ga.utility) + " vs grid " + num(grid.utility));
        d << name << " (" << num(mw_to_dbm(ga.strategy.p_s)) << " dBm, rho " << num(ga.strategy.rho) << ") utility "
          << num(ga.utility) << " vs grid " << num(grid.utility) << "  ";
    }
    if (o.pass) o.detail = d.str();
    return o;
}

double utility_or_floor(const std::vector<std::string>& row, std::size_t status, std::size_t util) {
    return row[status] == "ok" ? std::stod(row[util]) : -1e300;
}

Outcome sweep_orderings() {
    Outcome o;
    cli::SweepOptions opts;
    opts.seed = 7;
    std::ostringstream d;

    // Orderings over the adversary density, both at the default and at a longer link.
    for (const char* r_link : {"1", "1.5"}) {
        auto spec = cli::parse_sweep_spec(std::string("field = lambda_a\nvalues = 0.001, 0.0013, 0.0015, 0.0017, 0.002\n"
                                                      "schemes = PS, TS\nsolver = grid\ngrid = 40\noverride.r_link = ") +
                                          r_link + "\n");
        const auto r = cli::run_sweep(opts, spec);
        for (std::size_t i = 0; i + 1 < r.table.rows.size(); i += 2) {
            const double ps = utility_or_floor(r.table.rows[i], 4, 8);
            const double ts = utility_or_floor(r.table.rows[i + 1], 4, 8);
            o.require(ps >= ts, std::string("PS below TS at R = ") + r_link + ", lambda_a = " + r.table.rows[i][2]);
        }
    }

    // Link distance at lambda_a = 0.001, solved with the GA.
    auto spec = cli::parse_sweep_spec("field = r_link\nvalues = 1, 2\nschemes = PS, TS\noverride.lambda_a = 0.001\n");
    const auto r = cli::run_sweep(opts, spec);
    const double want[4] = {0.9, 0.84, 0.65, 0.41};
    for (std::size_t i = 0; i < 4; ++i) {
        const double u = utility_or_floor(r.table.rows[i], 4, 8);
        o.require(std::abs(u - want[i]) <= 0.05, r.table.rows[i][3] + " at R = " + r.table.rows[i][2] + ": " + num(u) +
                                                     " vs " + num(want[i]));
        d << r.table.rows[i][3] << "(R=" << r.table.rows[i][2] << ") " << num(u) << "  ";
    }

    auto inf = cli::parse_sweep_spec("field = lambda_a\nvalues = 0.002\nschemes = PS, TS\noverride.r_link = 2\n");
    const auto ri = cli::run_sweep(opts, inf);
    for (const auto& row : ri.table.rows) o.require(row[4] == "infeasible", row[3] + " feasible at R = 2, 0.002");
    if (o.pass) o.detail = d.str() + "; PS >= TS on the lambda_a sweeps; R = 2, lambda_a = 0.002 infeasible";
    return o;
}

Outcome determinism() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / ("covert_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    {
        std::ofstream(dir / "sweep.spec") << "field = p_s_dbm\nvalues = 0, 5, 10, 20\ntask = lower-stage\n";
    }
    const std::vector<std::vector<std::string>> commands{
        {"validate", "--trials", "5000", "--grid", "5", "--seed", "3"},
        {"lower-stage", "--grid", "40"},
        {"equilibrium", "--scheme", "both", "--population", "20", "--generations", "15", "--seed", "11"},
        {"sweep", (dir / "sweep.spec").string(), "--jobs", "3"},
    };
    int identical = 0;
    for (const auto& cmd : commands) {
        std::string first;
        for (int rep = 0; rep < 2; ++rep) {
            std::vector<std::string> args{"covert_cli"};
            args.insert(args.end(), cmd.begin(), cmd.end());
            const auto out = dir / ("run" + std::to_string(rep) + ".csv");
            args.insert(args.end(), {"--out", out.string()});
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream so, se;
            const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), so, se);
            o.require(code == cli::kOk, cmd[0] + " exited with " + std::to_string(code) + ": " + se.str());
            const auto text = slurp(out);
            if (rep == 0)
                first = text;
            else if (text == first && !text.empty())
                ++identical;
            else
                o.require(false, cmd[0] + " output differs between runs");
        }
    }
    fs::remove_all(dir);
    if (o.pass) o.detail = std::to_string(identical) + " commands rerun with byte-identical CSV";
    return o;
}

Outcome property_suites() {
    Outcome o;
    const auto c = NetworkConfig::defaults();
    const double ps = 10.0;
    double prev_fa = 1.0, prev_md = 0.0;
    for (int i = 0; i < 30; ++i) {
        const double tau = c.noise_adv + std::exp(-4.0 + 0.3 * i);
        const double fa = fa_prob(ps, tau, c), md = md_prob(ps, tau, c);
        o.require(fa <= prev_fa, "fa rises at tau = " + num(tau));
        o.require(md >= prev_md, "md falls at tau = " + num(tau));
        prev_fa = fa;
        prev_md = md;
    }
    double prev_sinr = 0.0, prev_ph_ps = 1.0, prev_ph_ts = 1.0;
    for (int i = 0; i <= 40; ++i) {
        const double rho = c.rho_min + (1.0 - c.rho_min) * i / 40.0;
        const double s = sinr_prob_ts({Scheme::TS, ps, rho}, c);
        const double hp = ph_prob_ps({Scheme::PS, ps, rho}, c);
        const double ht = ph_prob_ts({Scheme::TS, ps, rho}, c);
        o.require(s >= prev_sinr, "sinr_prob_ts falls at rho = " + num(rho));
        o.require(hp <= prev_ph_ps, "ph_prob_ps rises at rho = " + num(rho));
        o.require(ht <= prev_ph_ts, "ph_prob_ts rises at rho = " + num(rho));
        prev_sinr = s;
        prev_ph_ps = hp;
        prev_ph_ts = ht;
    }
    const QuadratureSpec q;
    const auto p = interference_params(ps, c);
    const double mass_i =
        integrate([&](double y) { const double t = std::exp(y); return t * interference_pdf(t, p); }, -12, 40, q,
                  {-5, 0, 5, 10})
            .value;
    const double cs = ps * std::pow(std::numbers::pi * c.lambda_a, c.alpha / 2);
    const double lc = std::log(cs);
    const double mass_s =
        integrate([&](double y) { const double t = std::exp(y); return t * nearest_adversary_signal_pdf(t, ps, c); },
                  lc - 30, lc + 60, q, {lc - 5, lc, lc + 10})
            .value;
    o.require(std::abs(mass_i - 1) <= 1e-3, "interference density mass " + num(mass_i));
    o.require(std::abs(mass_s - 1) <= 1e-3, "signal density mass " + num(mass_s));

    const double radius = 30.0;
    const int windows = 10000;
    mc::TrialDraw d;
    double n_d = 0, n_b = 0;
    for (int i = 0; i < windows; ++i) {
        mc::draw_trial(mc::stream_seed(31337, static_cast<std::uint64_t>(i)), c, radius, d);
        n_d += static_cast<double>(d.d2d_points.size());
        n_b += static_cast<double>(d.bs_points.size());
    }
    const double area = std::numbers::pi * radius * radius;
    const double rel_d = std::abs(n_d / windows / (c.lambda_d * area) - 1);
    const double rel_b = std::abs(n_b / windows / (c.lambda_b * area) - 1);
    o.require(rel_d <= 0.01 && rel_b <= 0.01, "Poisson means off by " + num(rel_d) + ", " + num(rel_b));
    if (o.pass)
        o.detail = "monotone fa/md/sinr_ts/ph, masses " + num(mass_i) + " and " + num(mass_s) +
                   ", Poisson mean errors " + num(rel_d) + " and " + num(rel_b);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"analytic and Monte Carlo agree", analytic_vs_monte_carlo},
        {"lower-stage optimality", lower_stage_optimality},
        {"boundary and degenerate properties", boundaries},
        {"Laplace derivative machinery", derivative_machinery},
        {"equilibrium reproduction", equilibrium_reproduction},
        {"sweep orderings", sweep_orderings},
        {"determinism", determinism},
        {"property suites", property_suites},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %zu %s: %s (%.1f s) %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
