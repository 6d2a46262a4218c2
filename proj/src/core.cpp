#include "covert/core.hpp"

#include "covert/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace covert {

double dbm_to_mw(double x_dbm) { return std::pow(10.0, x_dbm / 10.0); }

double mw_to_dbm(double x_mw) {
    if (!(x_mw > 0.0)) throw DomainError("mw_to_dbm: power must be positive");
    return 10.0 * std::log10(x_mw);
}

std::string_view to_string(Scheme s) { return s == Scheme::PS ? "PS" : "TS"; }

Scheme parse_scheme(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "PS") return Scheme::PS;
    if (up == "TS") return Scheme::TS;
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected PS or TS)");
}

namespace {

void need_positive(std::vector<Violation>& out, const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
        out.push_back({field, std::string(field) + " must be a finite positive number"});
}

void need_probability(std::vector<Violation>& out, const char* field, double v) {
    if (!(v >= 0.0 && v <= 1.0))
        out.push_back({field, std::string(field) + " must lie in [0, 1]"});
}

}  // namespace

std::vector<Violation> validate(const NetworkConfig& c) {
    std::vector<Violation> v;
    need_positive(v, "lambda_d", c.lambda_d);
    need_positive(v, "lambda_a", c.lambda_a);
    need_positive(v, "lambda_b", c.lambda_b);
    need_positive(v, "lambda_u", c.lambda_u);
    need_probability(v, "p_active_d", c.p_active_d);
    need_probability(v, "p_active_b", c.p_active_b);
    need_positive(v, "p_cell", c.p_cell);
    if (!(c.alpha > 2.0) || !std::isfinite(c.alpha))
        v.push_back({"alpha", "alpha must exceed 2"});
    if (c.m_antennas < 1) v.push_back({"m_antennas", "m_antennas must be at least 1"});
    need_positive(v, "r_link", c.r_link);
    need_positive(v, "noise_adv", c.noise_adv);
    need_positive(v, "noise_rf", c.noise_rf);
    need_positive(v, "noise_rx", c.noise_rx);
    need_positive(v, "packet_bits", c.packet_bits);
    need_positive(v, "slot_s", c.slot_s);
    need_positive(v, "ph_threshold", c.ph_threshold);
    need_probability(v, "eps_covert", c.eps_covert);
    need_probability(v, "eps_power", c.eps_power);
    if (!(c.u_reward >= 0.0) || !std::isfinite(c.u_reward))
        v.push_back({"u_reward", "u_reward must be nonnegative"});
    if (!(c.u_price >= 0.0) || !std::isfinite(c.u_price))
        v.push_back({"u_price", "u_price must be nonnegative"});
    need_positive(v, "ps_min", c.ps_min);
    if (!(c.ps_max > c.ps_min) || !std::isfinite(c.ps_max))
        v.push_back({"ps_max", "ps_max must exceed ps_min"});
    if (!(c.rho_min > 0.0)) v.push_back({"rho_min", "rho lower bound must be positive"});
    else if (!(c.rho_min < 1.0)) v.push_back({"rho_min", "rho lower bound must be below 1"});
    if (!(c.utility_power_scale >= 0.0) || !std::isfinite(c.utility_power_scale))
        v.push_back({"utility_power_scale", "utility_power_scale must be nonnegative"});
    return v;
}

void require_valid(const NetworkConfig& c) {
    auto v = validate(c);
    if (v.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : v) msg += " " + e.field + " (" + e.message + ");";
    throw ConfigError(msg);
}

std::vector<Violation> validate(const Strategy& s, const NetworkConfig& c) {
    std::vector<Violation> v;
    // A little relative slack so that bounds produced by dBm round-trips are accepted.
    const double eps = 1e-12;
    if (!(s.p_s >= c.ps_min * (1 - eps) && s.p_s <= c.ps_max * (1 + eps)))
        v.push_back({"p_s", "p_s outside [ps_min, ps_max]"});
    if (!(s.rho >= c.rho_min * (1 - eps) && s.rho <= 1.0))
        v.push_back({"rho", "rho outside [rho_min, 1]"});
    return v;
}

namespace {

struct FieldSlot {
    ConfigField info;
    double NetworkConfig::*member;
};

const std::vector<FieldSlot>& slots() {
    using C = NetworkConfig;
    static const std::vector<FieldSlot> table{
        {{"lambda_d", FieldKind::Real}, &C::lambda_d},
        {{"lambda_a", FieldKind::Real}, &C::lambda_a},
        {{"lambda_b", FieldKind::Real}, &C::lambda_b},
        {{"lambda_u", FieldKind::Real}, &C::lambda_u},
        {{"p_active_d", FieldKind::Real}, &C::p_active_d},
        {{"p_active_b", FieldKind::Real}, &C::p_active_b},
        {{"p_cell", FieldKind::Power}, &C::p_cell},
        {{"alpha", FieldKind::Real}, &C::alpha},
        {{"m_antennas", FieldKind::Integer}, nullptr},
        {{"r_link", FieldKind::Real}, &C::r_link},
        {{"noise_adv", FieldKind::Power}, &C::noise_adv},
        {{"noise_rf", FieldKind::Power}, &C::noise_rf},
        {{"noise_rx", FieldKind::Power}, &C::noise_rx},
        {{"packet_bits", FieldKind::Real}, &C::packet_bits},
        {{"slot_s", FieldKind::Real}, &C::slot_s},
        {{"ph_threshold", FieldKind::Power}, &C::ph_threshold},
        {{"eps_covert", FieldKind::Real}, &C::eps_covert},
        {{"eps_power", FieldKind::Real}, &C::eps_power},
        {{"u_reward", FieldKind::Real}, &C::u_reward},
        {{"u_price", FieldKind::Real}, &C::u_price},
        {{"ps_min", FieldKind::Power}, &C::ps_min},
        {{"ps_max", FieldKind::Power}, &C::ps_max},
        {{"rho_min", FieldKind::Real}, &C::rho_min},
        {{"utility_power_scale", FieldKind::Real}, &C::utility_power_scale},
    };
    return table;
}

const FieldSlot& slot(std::string_view name) {
    for (const auto& s : slots())
        if (s.info.name == name) return s;
    throw ConfigError("unknown config field '" + std::string(name) + "'");
}

}  // namespace

const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = [] {
        std::vector<ConfigField> f;
        for (const auto& s : slots()) f.push_back(s.info);
        return f;
    }();
    return fields;
}

double get_field(const NetworkConfig& c, std::string_view name) {
    const auto& s = slot(name);
    return s.member ? c.*s.member : static_cast<double>(c.m_antennas);
}

void set_field(NetworkConfig& c, std::string_view name, double value) {
    const auto& s = slot(name);
    if (s.member) {
        c.*s.member = value;
        return;
    }
    if (!(std::floor(value) == value) || std::abs(value) > 1e6)
        throw ConfigError("m_antennas must be an integer");
    c.m_antennas = static_cast<int>(value);
}

std::uint64_t config_hash(const NetworkConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& f : config_fields()) {
        mix(f.name.data(), f.name.size());
        // Canonical bit pattern: -0.0 and 0.0 hash alike.
        double v = get_field(c, f.name) + 0.0;
        mix(&v, sizeof v);
    }
    return h;
}

double ProbabilityEstimate::lower() const { return std::max(0.0, value - ci_halfwidth); }
double ProbabilityEstimate::upper() const { return std::min(1.0, value + ci_halfwidth); }

ProbabilityEstimate wilson_estimate(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw DomainError("wilson_estimate: zero trials");
    if (successes > trials) throw DomainError("wilson_estimate: successes exceed trials");
    const double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {p, trials, half};
}

}  // namespace covert
