#pragma once

#include "covert/core.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace covert::mc {

enum class MetricKind { SinrPS, PhPS, SinrTS, PhTS, FA, MD, InterferenceCdfAt };

std::string_view to_string(MetricKind k);
/// Accepts the enum names case-insensitively; throws ConfigError listing valid kinds otherwise.
MetricKind parse_metric_kind(std::string_view name);
const std::vector<MetricKind>& all_metric_kinds();

/// Disk window centered at the observation point.
struct SimWindow {
    double radius = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

/**
 * Smallest radius whose excluded mean interference, 2 pi sum(lambda P p) r^(2-alpha) / (alpha - 2),
 * is at most `fraction` times the scale nu^(alpha/2) of the interference law.
 * The scale is used because the in-window mean is infinite under the singular path loss.
 */
double default_window_radius(double p_s, const NetworkConfig& c, double fraction = 1e-3);
SimWindow default_window(double p_s, const NetworkConfig& c, std::uint64_t trials, std::uint64_t seed);

/// Throws ConfigError when the window cannot be simulated.
void check(const SimWindow& w);

struct Point {
    double x = 0.0, y = 0.0;
    bool active = false;
    double gain = 0.0;  // toward the observation point; meaningful only if active
};

/// One realization of everything the metrics depend on, observed from the origin.
struct TrialDraw {
    std::vector<Point> d2d_points;
    std::vector<Point> bs_points;
    double direct_gain = 0.0;       // Gamma(M, 1)
    double tx_angle = 0.0;          // orientation of the typical transmitter, receiver side
    double nearest_adv_dist = 0.0;  // adversary side
    double adv_gain = 0.0;          // Exp(1), transmitter toward the adversary
};

/// Trials handed to a worker at a time. Every trial has its own streams, so this only affects scheduling.
inline constexpr std::uint64_t kBlockTrials = 1000;

/// Seed for stream `stream` of a run seeded with `seed` (SplitMix64 mixing).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Counter-based SplitMix64 engine: cheap to construct, so every trial and
/// every point process can own an independent stream.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/**
 * Draws one trial into `out`, reusing its storage.
 *
 * Each point process is generated outward in order of distance from its own
 * stream, so a larger radius extends the same realization instead of
 * replacing it.
 */
void draw_trial(std::uint64_t trial_seed, const NetworkConfig& c, double radius, TrialDraw& out);

/// Aggregate interference at the origin from a draw.
double aggregate_interference(const TrialDraw& d, double p_s, const NetworkConfig& c);

struct ReceiverSample {
    double interference = 0.0;  // I^S + I^C
    double signal = 0.0;        // p_s g R^-alpha
};

struct AdversarySample {
    double interference = 0.0;
    double signal = 0.0;  // p_s g r^-alpha from the typical transmitter under H1
};

std::vector<ReceiverSample> simulate_receiver(double p_s, const NetworkConfig& c, const SimWindow& w,
                                              unsigned workers = 0);
std::vector<AdversarySample> simulate_adversary(double p_s, const NetworkConfig& c, const SimWindow& w,
                                                unsigned workers = 0);

/// Link-metric indicator for one receiver sample. Throws DomainError for FA, MD and the CDF kind.
bool link_success(MetricKind kind, const ReceiverSample& s, double rho, const NetworkConfig& c);

/**
 * Estimates on a grid, all from the same draws (common random numbers).
 *
 * `xs` holds rho for link metrics, tau for FA / MD, and t for InterferenceCdfAt.
 */
std::vector<ProbabilityEstimate> estimate_grid(MetricKind kind, double p_s, const std::vector<double>& xs,
                                               const NetworkConfig& c, const SimWindow& w, unsigned workers = 0);

/// Single-point form. For link metrics `x` is rho, otherwise as in estimate_grid.
ProbabilityEstimate estimate(MetricKind kind, double p_s, double x, const NetworkConfig& c, const SimWindow& w);

std::vector<ProbabilityEstimate> estimate_from_receiver(MetricKind kind, const std::vector<ReceiverSample>& samples,
                                                        const std::vector<double>& xs, const NetworkConfig& c);
std::vector<ProbabilityEstimate> estimate_from_adversary(MetricKind kind, const std::vector<AdversarySample>& samples,
                                                         const std::vector<double>& xs, const NetworkConfig& c);

/// Right-continuous empirical CDF on a grid. Needs at least 1000 samples.
std::vector<double> empirical_cdf(std::vector<double> samples, const std::vector<double>& grid);

/// Two-sided Kolmogorov-Smirnov distance between samples and a model CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace covert::mc
