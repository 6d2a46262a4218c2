#include "doctest.h"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"
#include "covert/montecarlo.hpp"

#include <cmath>
#include <numbers>

using namespace covert;
using namespace covert::mc;

namespace {

bool agrees(double analytic, const ProbabilityEstimate& e) {
    return std::abs(analytic - e.value) <= std::max(0.02, 3 * e.ci_halfwidth);
}

}  // namespace

TEST_CASE("window radius rule") {
    auto c = NetworkConfig::defaults();
    const double r = default_window_radius(10.0, c);
    // 2 pi * 5.5 / (2 r^2) = 1e-3 * nu^2
    const double nu = interference_nu(10.0, c);
    CHECK(2 * std::numbers::pi * 5.5 / (2 * r * r) == doctest::Approx(1e-3 * nu * nu));
    CHECK(r > 80.0);
    CHECK(r < 90.0);
    CHECK_THROWS_AS(check(SimWindow{r, 0, 1}), ConfigError);
}

TEST_CASE("trivial thresholds are exact") {
    auto c = NetworkConfig::defaults();
    auto w = default_window(10.0, c, 3000, 7);
    CHECK(estimate(MetricKind::FA, 10.0, c.noise_adv, c, w).value == 1.0);
    CHECK(estimate(MetricKind::MD, 10.0, c.noise_adv, c, w).value == 0.0);
    CHECK_THROWS_AS(estimate(MetricKind::SinrPS, 10.0, 0.0, c, w), DomainError);
}

TEST_CASE("seed determinism and independence from the worker count") {
    auto c = NetworkConfig::defaults();
    auto w = default_window(10.0, c, 4500, 42);
    auto a = simulate_receiver(10.0, c, w, 1);
    auto b = simulate_receiver(10.0, c, w, 3);
    auto d = simulate_receiver(10.0, c, w, 1);
    REQUIRE(a.size() == 4500);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        same = same && a[i].interference == b[i].interference && a[i].signal == b[i].signal &&
               a[i].interference == d[i].interference;
    CHECK(same);
    w.seed = 43;
    auto e = simulate_receiver(10.0, c, w, 1);
    CHECK(e[0].interference != a[0].interference);
    CHECK(stream_seed(1, 0) != stream_seed(1, 1));
    CHECK(stream_seed(1, 0) != stream_seed(2, 0));
}

TEST_CASE("Poisson count sanity") {
    auto c = NetworkConfig::defaults();
    const double radius = 30.0;
    TrialDraw d;
    double sum_d = 0, sum_b = 0, active = 0;
    const int windows = 10000;
    for (int i = 0; i < windows; ++i) {
        draw_trial(stream_seed(5, i), c, radius, d);
        sum_d += static_cast<double>(d.d2d_points.size());
        sum_b += static_cast<double>(d.bs_points.size());
        for (const auto& p : d.d2d_points) {
            active += p.active;
            CHECK(p.x * p.x + p.y * p.y <= radius * radius);
        }
    }
    const double area = std::numbers::pi * radius * radius;
    CHECK(sum_d / windows == doctest::Approx(c.lambda_d * area).epsilon(0.01));
    CHECK(sum_b / windows == doctest::Approx(c.lambda_b * area).epsilon(0.01));
    CHECK(active / sum_d == doctest::Approx(c.p_active_d).epsilon(0.01));
}

TEST_CASE("gain and distance samplers") {
    auto c = NetworkConfig::defaults();
    c.lambda_d = 1e-12;  // empty windows so the loop only exercises the scalar draws
    c.lambda_b = 1e-12;
    TrialDraw d;
    double sum = 0;
    std::vector<double> dist;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        draw_trial(stream_seed(9, i), c, 1.0, d);
        sum += d.direct_gain;
        if (i < 100000) dist.push_back(d.nearest_adv_dist);
    }
    CHECK(sum / n == doctest::Approx(c.m_antennas).epsilon(0.005));
    const double lam = c.lambda_a;
    double ks = ks_distance(dist, [&](double r) { return 1 - std::exp(-std::numbers::pi * lam * r * r); });
    CHECK(ks < 0.01);
}

TEST_CASE("nearest-adversary signal matches its analytic density") {
    auto c = NetworkConfig::defaults();
    auto w = default_window(10.0, c, 100000, 11);
    auto samples = simulate_adversary(10.0, c, w);
    std::vector<double> sig;
    for (const auto& s : samples) sig.push_back(s.signal);
    double ks = ks_distance(sig, [&](double t) { return 1 - nearest_adversary_signal_sf(t, 10.0, c); });
    CHECK(ks <= 0.02);
}

TEST_CASE("empirical CDF") {
    std::vector<double> s;
    for (int i = 1; i <= 2000; ++i) s.push_back(i * 0.5);
    auto F = empirical_cdf(s, {0.0, 0.5, 500.0, 1000.0, 2000.0});
    CHECK(F[0] == 0.0);
    CHECK(F[1] == doctest::Approx(1.0 / 2000));
    CHECK(F[2] == doctest::Approx(0.5));
    CHECK(F[3] == 1.0);
    CHECK(F[4] == 1.0);
    CHECK_THROWS_AS(empirical_cdf(std::vector<double>(10, 1.0), {1.0}), DomainError);
}

TEST_CASE("interference CDF matches the simulated field") {
    auto c = NetworkConfig::defaults();
    auto w = default_window(10.0, c, 100000, 3);
    auto samples = simulate_receiver(10.0, c, w);
    std::vector<double> I;
    for (const auto& s : samples) I.push_back(s.interference);
    auto p = interference_params(10.0, c);
    std::vector<double> grid;
    std::vector<double> sorted = I;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k <= 20; ++k) grid.push_back(sorted[static_cast<std::size_t>(k * 0.0476 * sorted.size())]);
    auto F = empirical_cdf(I, grid);
    double worst = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(F[i] - interference_cdf(grid[i], p)));
    CHECK(worst <= 0.02);
    CHECK(ks_distance(I, [&](double t) { return interference_cdf(t, p); }) <= 0.02);
}

TEST_CASE("reduced-size analytic agreement, every metric") {
    auto c = NetworkConfig::defaults();
    const double ps = 10.0;
    auto w = default_window(ps, c, 20000, 2024);
    auto rx = simulate_receiver(ps, c, w);
    auto adv = simulate_adversary(ps, c, w);
    std::vector<double> rhos{0.1, 0.5, 0.9};
    auto sp = estimate_from_receiver(MetricKind::SinrPS, rx, rhos, c);
    auto pp = estimate_from_receiver(MetricKind::PhPS, rx, rhos, c);
    auto st = estimate_from_receiver(MetricKind::SinrTS, rx, rhos, c);
    auto pt = estimate_from_receiver(MetricKind::PhTS, rx, rhos, c);
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        CAPTURE(rhos[i]);
        CHECK(agrees(sinr_prob_ps({Scheme::PS, ps, rhos[i]}, c), sp[i]));
        CHECK(agrees(ph_prob_ps({Scheme::PS, ps, rhos[i]}, c), pp[i]));
        CHECK(agrees(sinr_prob_ts({Scheme::TS, ps, rhos[i]}, c), st[i]));
        CHECK(agrees(ph_prob_ts({Scheme::TS, ps, rhos[i]}, c), pt[i]));
    }
    std::vector<double> taus{0.3, 1.3, 5.0};
    auto fa = estimate_from_adversary(MetricKind::FA, adv, taus, c);
    auto md = estimate_from_adversary(MetricKind::MD, adv, taus, c);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        CAPTURE(taus[i]);
        CHECK(agrees(fa_prob(ps, taus[i], c), fa[i]));
        CHECK(agrees(md_prob(ps, taus[i], c), md[i]));
    }
}

TEST_CASE("a larger window extends the same realization") {
    auto c = NetworkConfig::defaults();
    TrialDraw small, big;
    draw_trial(stream_seed(1, 17), c, 40.0, small);
    draw_trial(stream_seed(1, 17), c, 80.0, big);
    REQUIRE(big.d2d_points.size() > small.d2d_points.size());
    for (std::size_t i = 0; i < small.d2d_points.size(); ++i) {
        CHECK(small.d2d_points[i].x == big.d2d_points[i].x);
        CHECK(small.d2d_points[i].gain == big.d2d_points[i].gain);
    }
    CHECK(small.direct_gain == big.direct_gain);
    CHECK(small.nearest_adv_dist == big.nearest_adv_dist);
}

TEST_CASE("doubling the window radius moves estimates by less than their CI") {
    auto c = NetworkConfig::defaults();
    const double ps = 10.0;
    auto w = default_window(ps, c, 20000, 77);
    auto w2 = w;
    w2.radius *= 2;
    auto a = estimate_grid(MetricKind::SinrPS, ps, {0.5}, c, w)[0];
    auto b = estimate_grid(MetricKind::SinrPS, ps, {0.5}, c, w2)[0];
    CHECK(std::abs(a.value - b.value) < a.ci_halfwidth);
    auto fa = estimate_grid(MetricKind::FA, ps, {1.3}, c, w)[0];
    auto fb = estimate_grid(MetricKind::FA, ps, {1.3}, c, w2)[0];
    CHECK(std::abs(fa.value - fb.value) < fa.ci_halfwidth);
}

TEST_CASE("metric kind names") {
    CHECK(parse_metric_kind("sinrps") == MetricKind::SinrPS);
    CHECK(parse_metric_kind("FA") == MetricKind::FA);
    try {
        parse_metric_kind("bogus");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("SinrTS") != std::string::npos);
    }
}
