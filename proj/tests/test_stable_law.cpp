#include "doctest.h"

#include "covert/errors.hpp"
#include "covert/quadrature.hpp"
#include "covert/stable_law.hpp"

#include <cmath>
#include <numbers>

using namespace covert;
namespace st = covert::stable;

namespace {

// For delta = 1/2 the law is Levy: F(z) = erfc(1/(2 sqrt z)).
double levy_cdf(double z) { return std::erfc(0.5 / std::sqrt(z)); }
double levy_pdf(double z) { return 0.5 / std::sqrt(std::numbers::pi) * std::pow(z, -1.5) * std::exp(-0.25 / z); }
double levy_pdf_dz(double z) { return levy_pdf(z) * (-1.5 / z + 0.25 / (z * z)); }

}  // namespace

TEST_CASE("adaptive quadrature basics") {
    QuadratureSpec q;
    CHECK(integrate([](double x) { return x * x; }, 0, 3, q).value == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0, 50, q).value == doctest::Approx(1.0).epsilon(1e-10));
    // reversed limits flip sign
    CHECK(integrate([](double x) { return x; }, 1, 0, q).value == doctest::Approx(-0.5));
    // integrable endpoint singularity
    CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, q).value ==
          doctest::Approx(2.0).epsilon(1e-7));
    QuadratureSpec tight;
    tight.max_subdivisions = 2;
    tight.rel_tol = 1e-15;
    tight.abs_tol = 1e-300;
    CHECK_THROWS_AS(integrate([](double x) { return std::sin(200 * x); }, 0, 10, tight), QuadratureError);
    QuadratureSpec bad;
    bad.rel_tol = 0;
    CHECK_THROWS_AS(check(bad), DomainError);
}

TEST_CASE("Levy closed forms reproduced by every route") {
    QuadratureSpec q;
    for (double z : {0.002, 0.01, 0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 20.0}) {
        CAPTURE(z);
        CHECK(std::abs(st::cdf_bromwich(z, 0.5, q) - levy_cdf(z)) < 1e-9);
        CHECK(std::abs(st::cdf_kanter(z, 0.5, q) - levy_cdf(z)) < 1e-9);
        CHECK(std::abs(st::pdf_bromwich(z, 0.5, q) - levy_pdf(z)) < 1e-8);
        CHECK(std::abs(st::pdf_kanter(z, 0.5, q) - levy_pdf(z)) < 1e-8);
        CHECK(std::abs(st::pdf_derivative_bromwich(z, 0.5, q) - levy_pdf_dz(z)) < 1e-7 * std::max(1.0, std::abs(levy_pdf_dz(z))));
        CHECK(std::abs(st::pdf_derivative_kanter(z, 0.5, q) - levy_pdf_dz(z)) < 1e-7 * std::max(1.0, std::abs(levy_pdf_dz(z))));
    }
    for (double z : {30.0, 100.0, 1e4, 1e8}) {
        CAPTURE(z);
        CHECK(st::sf_series(z, 0.5) == doctest::Approx(std::erf(0.5 / std::sqrt(z))).epsilon(1e-13));
        CHECK(st::pdf_series(z, 0.5) == doctest::Approx(levy_pdf(z)).epsilon(1e-13));
        CHECK(st::pdf_derivative_series(z, 0.5) == doctest::Approx(levy_pdf_dz(z)).epsilon(1e-12));
    }
}

TEST_CASE("Kanter and Bromwich agree for alpha above 4") {
    QuadratureSpec q;
    for (double delta : {0.25, 0.4}) {
        for (double z : {0.05, 0.5, 2.0, 8.0}) {
            CAPTURE(delta);
            CAPTURE(z);
            CHECK(std::abs(st::cdf_bromwich(z, delta, q) - st::cdf_kanter(z, delta, q)) < 1e-9);
            CHECK(std::abs(st::pdf_bromwich(z, delta, q) - st::pdf_kanter(z, delta, q)) < 1e-8);
        }
    }
    CHECK_THROWS_AS(st::cdf_bromwich(1.0, 0.7, q), DomainError);
}

TEST_CASE("series joins quadrature at its cutoff") {
    QuadratureSpec q;
    for (double delta : {0.3, 0.5, 2.0 / 3.0, 0.8}) {
        CAPTURE(delta);
        double z = st::series_cutoff(delta) * 1.01;
        CHECK(std::abs(st::sf_series(z, delta) - st::sf_kanter(z, delta, q)) < 1e-10);
        CHECK(std::abs(st::pdf_series(z, delta) - st::pdf_kanter(z, delta, q)) < 1e-10);
        CHECK(st::cdf_kanter(st::lower_cutoff(delta), delta, q) < 1e-200);
    }
}

TEST_CASE("table interpolation matches direct evaluation") {
    QuadratureSpec q;
    for (double delta : {0.5, 2.0 / 3.0}) {
        const auto& t = st::Table::get(delta);
        CHECK(&t == &st::Table::get(delta));
        for (double z = 1e-3; z < 1e4; z *= 1.37) {
            CAPTURE(delta);
            CAPTURE(z);
            CHECK(std::abs(t.cdf(z) - st::cdf_kanter(z, delta, q)) < 1e-10);
            double f = st::pdf_kanter(z, delta, q);
            CHECK(std::abs(t.pdf(z) - f) < 1e-9 * std::max(1.0, f));
            CHECK(std::abs(t.sf(z) - st::sf_kanter(z, delta, q)) < 1e-10);
        }
        CHECK(t.cdf(0.0) == 0.0);
        CHECK(t.cdf(1e30) == doctest::Approx(1.0));
    }
}

TEST_CASE("direct dispatch reports its route") {
    QuadratureSpec q;
    CHECK(st::cdf(1.0, 0.5, q).method == st::Method::Bromwich);
    CHECK(st::cdf(1.0, 0.7, q).method == st::Method::Kanter);
    CHECK(st::cdf(1e6, 0.5, q).method == st::Method::Series);
    CHECK(st::cdf(1e-6, 0.5, q).method == st::Method::Tail);
    CHECK(st::cdf(1e-6, 0.5, q).value == 0.0);
}
