#include "doctest.h"

#include "covert/core.hpp"
#include "covert/errors.hpp"

#include <cmath>
#include <functional>

using namespace covert;

TEST_CASE("dbm conversions") {
    CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0));
    CHECK(dbm_to_mw(30.0) == doctest::Approx(1000.0));
    CHECK(dbm_to_mw(-90.0) == doctest::Approx(1e-9).epsilon(1e-12));
    for (double x = -120.0; x <= 60.0; x += 0.37) {
        double back = mw_to_dbm(dbm_to_mw(x));
        CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        double mw = dbm_to_mw(x);
        CHECK(std::abs(dbm_to_mw(mw_to_dbm(mw)) - mw) <= 1e-12 * mw);
    }
    CHECK_THROWS_AS(mw_to_dbm(0.0), DomainError);
}

TEST_CASE("table defaults validate") {
    auto c = NetworkConfig::defaults();
    CHECK(validate(c).empty());
    CHECK(c.p_cell == doctest::Approx(dbm_to_mw(30)));
    CHECK(c.noise_adv == doctest::Approx(dbm_to_mw(-90)));
    CHECK(c.ph_threshold == doctest::Approx(dbm_to_mw(10)));
}

TEST_CASE("specific violations carry messages") {
    auto c = NetworkConfig::defaults();
    c.alpha = 2.0;
    auto v = validate(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "alpha");
    CHECK(v[0].message == "alpha must exceed 2");

    c = NetworkConfig::defaults();
    c.rho_min = 0.0;
    v = validate(c);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "rho_min");
    CHECK(v[0].message == "rho lower bound must be positive");
}

TEST_CASE("each single-field mutation yields exactly one violation naming it") {
    struct Mut {
        const char* field;
        std::function<void(NetworkConfig&)> apply;
    };
    const Mut muts[] = {
        {"lambda_d", [](NetworkConfig& c) { c.lambda_d = 0; }},
        {"lambda_a", [](NetworkConfig& c) { c.lambda_a = -1; }},
        {"lambda_b", [](NetworkConfig& c) { c.lambda_b = 0; }},
        {"lambda_u", [](NetworkConfig& c) { c.lambda_u = -0.1; }},
        {"p_active_d", [](NetworkConfig& c) { c.p_active_d = 1.5; }},
        {"p_active_b", [](NetworkConfig& c) { c.p_active_b = -0.1; }},
        {"p_cell", [](NetworkConfig& c) { c.p_cell = 0; }},
        {"alpha", [](NetworkConfig& c) { c.alpha = 1.5; }},
        {"m_antennas", [](NetworkConfig& c) { c.m_antennas = 0; }},
        {"r_link", [](NetworkConfig& c) { c.r_link = 0; }},
        {"noise_adv", [](NetworkConfig& c) { c.noise_adv = 0; }},
        {"noise_rf", [](NetworkConfig& c) { c.noise_rf = -1; }},
        {"noise_rx", [](NetworkConfig& c) { c.noise_rx = 0; }},
        {"packet_bits", [](NetworkConfig& c) { c.packet_bits = 0; }},
        {"slot_s", [](NetworkConfig& c) { c.slot_s = 0; }},
        {"ph_threshold", [](NetworkConfig& c) { c.ph_threshold = 0; }},
        {"eps_covert", [](NetworkConfig& c) { c.eps_covert = 2; }},
        {"eps_power", [](NetworkConfig& c) { c.eps_power = -0.5; }},
        {"u_reward", [](NetworkConfig& c) { c.u_reward = -1; }},
        {"u_price", [](NetworkConfig& c) { c.u_price = -1; }},
        {"ps_min", [](NetworkConfig& c) { c.ps_min = 0; }},
        {"ps_max", [](NetworkConfig& c) { c.ps_max = 0.5; }},
        {"rho_min", [](NetworkConfig& c) { c.rho_min = 1.0; }},
        {"utility_power_scale", [](NetworkConfig& c) { c.utility_power_scale = -1; }},
    };
    for (const auto& m : muts) {
        CAPTURE(m.field);
        auto c = NetworkConfig::defaults();
        m.apply(c);
        auto v = validate(c);
        REQUIRE(v.size() == 1);
        CHECK(v[0].field == m.field);
    }
}

TEST_CASE("strategy bounds") {
    auto c = NetworkConfig::defaults();
    CHECK(validate(Strategy{Scheme::PS, 10.0, 0.01}, c).empty());
    CHECK(validate(Strategy{Scheme::TS, c.ps_max, 1.0}, c).empty());
    CHECK(validate(Strategy{Scheme::PS, 0.5, 0.5}, c).size() == 1);
    CHECK(validate(Strategy{Scheme::PS, 10.0, 0.001}, c).size() == 1);
    CHECK(validate(Strategy{Scheme::PS, 2000.0, 1.5}, c).size() == 2);
}

TEST_CASE("scheme names") {
    CHECK(parse_scheme("ps") == Scheme::PS);
    CHECK(parse_scheme("TS") == Scheme::TS);
    CHECK(to_string(Scheme::TS) == "TS");
    CHECK_THROWS_AS(parse_scheme("XY"), ConfigError);
}

TEST_CASE("wilson interval") {
    auto e = wilson_estimate(50, 100);
    CHECK(e.value == doctest::Approx(0.5));
    CHECK(e.ci_halfwidth == doctest::Approx(0.0962).epsilon(0.01));
    auto all = wilson_estimate(100, 100);
    CHECK(all.value == 1.0);
    CHECK(all.upper() == 1.0);
    CHECK(all.lower() < 1.0);
    // halfwidth scales as n^-1/2 once the z^2 / n correction is negligible
    auto mid = wilson_estimate(5000, 10000);
    auto big = wilson_estimate(500000, 1000000);
    CHECK(mid.ci_halfwidth / big.ci_halfwidth == doctest::Approx(10.0).epsilon(0.001));
    CHECK(e.ci_halfwidth > 9.8 * mid.ci_halfwidth);
    CHECK_THROWS_AS(wilson_estimate(0, 0), DomainError);
}

TEST_CASE("field registry and config hash") {
    auto c = NetworkConfig::defaults();
    CHECK(config_fields().size() == 24);
    for (const auto& f : config_fields()) {
        auto d = c;
        set_field(d, f.name, get_field(c, f.name));
        CHECK(config_hash(d) == config_hash(c));
    }
    set_field(c, "r_link", 2.0);
    CHECK(c.r_link == 2.0);
    CHECK(config_hash(c) != config_hash(NetworkConfig::defaults()));
    set_field(c, "m_antennas", 4);
    CHECK(c.m_antennas == 4);
    CHECK_THROWS_AS(set_field(c, "m_antennas", 2.5), ConfigError);
    CHECK_THROWS_AS(get_field(c, "nope"), ConfigError);
}
