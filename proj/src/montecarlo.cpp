#include "covert/montecarlo.hpp"

#include "covert/analytics.hpp"
#include "covert/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace covert::mc {

namespace {

constexpr double kPi = std::numbers::pi;

inline double u01(SplitMix64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double exp1(SplitMix64& rng) { return -std::log1p(-u01(rng)); }

std::uint64_t splitmix64(std::uint64_t x) { return SplitMix64(x)(); }

// Homogeneous PPP on the disk, produced in order of increasing distance:
// pi lambda r_k^2 are the arrival times of a unit-rate Poisson process.
void fill_points(SplitMix64& rng, double lambda, double p_active, double radius, std::vector<Point>& out) {
    out.clear();
    const double limit = lambda * kPi * radius * radius;
    double arrival = exp1(rng);
    while (arrival <= limit) {
        const double r = std::sqrt(arrival / (lambda * kPi));
        double ux, uy, s;
        do {
            ux = 2 * u01(rng) - 1;
            uy = 2 * u01(rng) - 1;
            s = ux * ux + uy * uy;
        } while (s > 1.0 || s == 0.0);
        const double k = r / std::sqrt(s);
        Point pt;
        pt.x = ux * k;
        pt.y = uy * k;
        pt.active = u01(rng) < p_active;
        const double g = u01(rng);
        pt.gain = pt.active ? -std::log1p(-g) : 0.0;
        out.push_back(pt);
        arrival += exp1(rng);
    }
}

double field_sum(const std::vector<Point>& pts, double power, double half_alpha) {
    double s = 0.0;
    if (half_alpha == 2.0) {
        for (const auto& p : pts)
            if (p.active) {
                double d2 = p.x * p.x + p.y * p.y;
                s += p.gain / (d2 * d2);
            }
    } else {
        for (const auto& p : pts)
            if (p.active) s += p.gain * std::pow(p.x * p.x + p.y * p.y, -half_alpha);
    }
    return power * s;
}

// Runs `body(first, last)` over fixed-size blocks of trials spread across workers.
template <class Body>
void run_blocks(std::uint64_t trials, unsigned workers, Body&& body) {
    const std::uint64_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    auto work = [&](unsigned wid) {
        for (std::uint64_t b = wid; b < blocks; b += workers)
            body(b * kBlockTrials, std::min(trials, (b + 1) * kBlockTrials));
    };
    if (workers <= 1) {
        work(0);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work, i);
    for (auto& t : pool) t.join();
}

constexpr std::uint64_t kReceiverTag = 1, kAdversaryTag = 2;

bool is_link(MetricKind k) {
    return k == MetricKind::SinrPS || k == MetricKind::PhPS || k == MetricKind::SinrTS || k == MetricKind::PhTS;
}

}  // namespace

std::string_view to_string(MetricKind k) {
    switch (k) {
        case MetricKind::SinrPS: return "SinrPS";
        case MetricKind::PhPS: return "PhPS";
        case MetricKind::SinrTS: return "SinrTS";
        case MetricKind::PhTS: return "PhTS";
        case MetricKind::FA: return "FA";
        case MetricKind::MD: return "MD";
        case MetricKind::InterferenceCdfAt: return "InterferenceCdf";
    }
    return "?";
}

const std::vector<MetricKind>& all_metric_kinds() {
    static const std::vector<MetricKind> kinds{MetricKind::SinrPS, MetricKind::PhPS, MetricKind::SinrTS,
                                               MetricKind::PhTS,   MetricKind::FA,   MetricKind::MD,
                                               MetricKind::InterferenceCdfAt};
    return kinds;
}

MetricKind parse_metric_kind(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string o(s);
        for (auto& ch : o) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return o;
    };
    std::string valid;
    for (auto k : all_metric_kinds()) {
        if (lower(to_string(k)) == lower(name)) return k;
        valid += (valid.empty() ? "" : ", ") + std::string(to_string(k));
    }
    throw ConfigError("unknown metric kind '" + std::string(name) + "'; valid kinds: " + valid);
}

double default_window_radius(double p_s, const NetworkConfig& c, double fraction) {
    const double power_density = c.lambda_d * c.p_active_d * p_s + c.lambda_b * c.p_active_b * c.p_cell;
    const double scale = std::pow(interference_nu(p_s, c), c.alpha / 2.0);
    // 2 pi K r^(2 - alpha) / (alpha - 2) = fraction * scale
    const double r = std::pow(2 * kPi * power_density / ((c.alpha - 2) * fraction * scale), 1.0 / (c.alpha - 2));
    return std::max(r, 4.0 * c.r_link);
}

SimWindow default_window(double p_s, const NetworkConfig& c, std::uint64_t trials, std::uint64_t seed) {
    return {default_window_radius(p_s, c), trials, seed};
}

void check(const SimWindow& w) {
    if (w.trials == 0) throw ConfigError("trials must be at least 1");
    if (!(w.radius > 0.0) || !std::isfinite(w.radius)) throw ConfigError("window radius must be positive");
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

void draw_trial(std::uint64_t trial_seed, const NetworkConfig& c, double radius, TrialDraw& out) {
    SplitMix64 d2d(stream_seed(trial_seed, 1));
    SplitMix64 bs(stream_seed(trial_seed, 2));
    SplitMix64 scalar(stream_seed(trial_seed, 3));
    fill_points(d2d, c.lambda_d, c.p_active_d, radius, out.d2d_points);
    fill_points(bs, c.lambda_b, c.p_active_b, radius, out.bs_points);
    std::gamma_distribution<double> gamma(static_cast<double>(c.m_antennas), 1.0);
    out.direct_gain = gamma(scalar);
    out.tx_angle = 2 * kPi * u01(scalar);
    out.nearest_adv_dist = std::sqrt(exp1(scalar) / (kPi * c.lambda_a));
    out.adv_gain = exp1(scalar);
}

double aggregate_interference(const TrialDraw& d, double p_s, const NetworkConfig& c) {
    return field_sum(d.d2d_points, p_s, c.alpha / 2.0) + field_sum(d.bs_points, c.p_cell, c.alpha / 2.0);
}

std::vector<ReceiverSample> simulate_receiver(double p_s, const NetworkConfig& c, const SimWindow& w,
                                              unsigned workers) {
    require_valid(c);
    check(w);
    std::vector<ReceiverSample> out(w.trials);
    const double path = std::pow(c.r_link, -c.alpha);
    run_blocks(w.trials, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        TrialDraw d;
        for (std::uint64_t i = lo; i < hi; ++i) {
            draw_trial(stream_seed(w.seed, (kReceiverTag << 48) | i), c, w.radius, d);
            // The typical transmitter sits R away at angle tx_angle; only its distance matters.
            out[i] = {aggregate_interference(d, p_s, c), p_s * d.direct_gain * path};
        }
    });
    return out;
}

std::vector<AdversarySample> simulate_adversary(double p_s, const NetworkConfig& c, const SimWindow& w,
                                                unsigned workers) {
    require_valid(c);
    check(w);
    std::vector<AdversarySample> out(w.trials);
    run_blocks(w.trials, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        TrialDraw d;
        for (std::uint64_t i = lo; i < hi; ++i) {
            draw_trial(stream_seed(w.seed, (kAdversaryTag << 48) | i), c, w.radius, d);
            out[i] = {aggregate_interference(d, p_s, c), p_s * d.adv_gain * std::pow(d.nearest_adv_dist, -c.alpha)};
        }
    });
    return out;
}

bool link_success(MetricKind kind, const ReceiverSample& s, double rho, const NetworkConfig& c) {
    const double I = s.interference, S = s.signal;
    switch (kind) {
        case MetricKind::SinrPS: {
            const double theta = std::exp2(c.packet_bits / c.slot_s) - 1;
            return rho * S / (rho * (I + c.noise_rf) + c.noise_rx) >= theta;
        }
        case MetricKind::PhPS: return (1 - rho) * (S + I + c.noise_rf) + c.noise_rx >= c.ph_threshold;
        case MetricKind::SinrTS: {
            const double theta = std::exp2(c.packet_bits / (rho * c.slot_s)) - 1;
            return S / (I + c.noise_rf + c.noise_rx) >= theta;
        }
        case MetricKind::PhTS:
            // Harvesting over (1 - rho) of the slot must deliver PH0 averaged over the slot.
            return rho < 1 && S + I + c.noise_rf + c.noise_rx >= c.ph_threshold / (1 - rho);
        default: throw DomainError("link_success: not a link metric");
    }
}

std::vector<ProbabilityEstimate> estimate_from_receiver(MetricKind kind, const std::vector<ReceiverSample>& samples,
                                                        const std::vector<double>& xs, const NetworkConfig& c) {
    if (samples.empty()) throw DomainError("no samples");
    std::vector<ProbabilityEstimate> out;
    for (double x : xs) {
        std::uint64_t hits = 0;
        if (kind == MetricKind::InterferenceCdfAt) {
            for (const auto& s : samples) hits += s.interference <= x;
        } else {
            if (!is_link(kind)) throw DomainError("receiver samples only support link metrics and the interference CDF");
            if (!(x > 0.0 && x <= 1.0)) throw DomainError("rho must lie in (0, 1]");
            for (const auto& s : samples) hits += link_success(kind, s, x, c);
        }
        out.push_back(wilson_estimate(hits, samples.size()));
    }
    return out;
}

std::vector<ProbabilityEstimate> estimate_from_adversary(MetricKind kind, const std::vector<AdversarySample>& samples,
                                                         const std::vector<double>& xs, const NetworkConfig& c) {
    if (samples.empty()) throw DomainError("no samples");
    if (kind != MetricKind::FA && kind != MetricKind::MD) throw DomainError("adversary samples support FA and MD only");
    std::vector<ProbabilityEstimate> out;
    for (double tau : xs) {
        std::uint64_t hits = 0;
        if (kind == MetricKind::FA) {
            // H0: only interference and noise reach the adversary.
            for (const auto& s : samples) hits += s.interference + c.noise_adv >= tau;
        } else {
            for (const auto& s : samples) hits += s.signal + s.interference + c.noise_adv < tau;
        }
        out.push_back(wilson_estimate(hits, samples.size()));
    }
    return out;
}

std::vector<ProbabilityEstimate> estimate_grid(MetricKind kind, double p_s, const std::vector<double>& xs,
                                               const NetworkConfig& c, const SimWindow& w, unsigned workers) {
    if (!(p_s > 0.0)) throw DomainError("p_s must be positive");
    if (kind == MetricKind::FA || kind == MetricKind::MD)
        return estimate_from_adversary(kind, simulate_adversary(p_s, c, w, workers), xs, c);
    return estimate_from_receiver(kind, simulate_receiver(p_s, c, w, workers), xs, c);
}

ProbabilityEstimate estimate(MetricKind kind, double p_s, double x, const NetworkConfig& c, const SimWindow& w) {
    return estimate_grid(kind, p_s, {x}, c, w).front();
}

std::vector<double> empirical_cdf(std::vector<double> samples, const std::vector<double>& grid) {
    if (samples.size() < 1000) throw DomainError("empirical_cdf needs at least 1000 samples");
    std::sort(samples.begin(), samples.end());
    std::vector<double> out;
    out.reserve(grid.size());
    const double n = static_cast<double>(samples.size());
    for (double t : grid) {
        auto it = std::upper_bound(samples.begin(), samples.end(), t);
        out.push_back(static_cast<double>(it - samples.begin()) / n);
    }
    return out;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_distance: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

}  // namespace covert::mc
