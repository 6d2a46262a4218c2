#include "covert/stable_law.hpp"

#include "covert/errors.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace covert::stable {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kLogCutoff = 700.0;
constexpr double kBromwichFloor = 1e-6;

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("stable law index must lie in (0, 1)");
}

// ---------------------------------------------------------------- Bromwich

// J_m = (1/delta) * int_0^inf exp(-c w - z w^(1/delta)) sin(s w) w^(m/delta - 1) dw
double bromwich_moment(double z, double delta, int m, const QuadratureSpec& q) {
    const double c = std::cos(kPi * delta);
    const double s = std::sin(kPi * delta);
    if (c < -1e-15)
        throw DomainError("Bromwich route needs alpha >= 4; the integrand grows before it decays");
    const double inv = 1.0 / delta;
    const double p = m * inv - 1.0;  // power of w multiplying the exponential
    auto phi = [&](double w) { return c * w + z * std::pow(w, inv); };
    auto integrand = [&](double w) {
        if (w <= 0.0) return m == 0 ? s : 0.0;
        double e = std::exp(-phi(w));
        if (e == 0.0) return 0.0;
        return e * std::sin(s * w) * std::pow(w, p);
    };

    const double half_period = kPi / s;
    double a = 0.0;
    double b = std::min(std::pow(z, -delta), half_period);
    double total = 0.0;
    QuadratureSpec panel_q = q;
    panel_q.abs_tol = q.abs_tol * 0.05;
    for (int panel = 0; panel < 100000; ++panel) {
        total += integrate(integrand, a, b, panel_q).value;
        // Tail bound: |int_b^inf| <= e^{-phi(b)} b^p / (phi'(b) - p/b) once the
        // denominator is positive; for m = 0 the 1/w factor is bounded by 1/b.
        double dphi = c + z * inv * std::pow(b, inv - 1.0);
        double pp = (m == 0) ? -1.0 : p;
        double denom = dphi - pp / b;
        if (denom > 0.0) {
            double bound = std::exp(-phi(b) + pp * std::log(b)) / denom;
            if (bound * inv < q.abs_tol * 0.1) break;
        }
        double len = std::min((b - a) * q.tail_growth_factor, 8.0 * half_period);
        len = std::max(len, half_period * 0.25);
        a = b;
        b = a + len;
    }
    return total * inv;
}

// ---------------------------------------------------------------- Kanter

double log_kanter_a(double phi, double delta) {
    const double k = delta / (1.0 - delta);
    if (phi < 1e-8) {
        // A(0+) = delta^kappa (1 - delta)
        return k * std::log(delta) + std::log1p(-delta);
    }
    return k * std::log(std::sin(delta * phi)) + std::log(std::sin((1.0 - delta) * phi)) -
           std::log(std::sin(phi)) / (1.0 - delta);
}

template <class F>
double kanter_integral(F&& body, const QuadratureSpec& q) {
    // The integrand concentrates near phi = 0 when z is small; a break at a
    // few small angles helps the first bisections.
    return integrate(body, 0.0, kPi, q, {1e-3, 1e-2, 0.1, 0.5}).value / kPi;
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::Bromwich: return "bromwich";
        case Method::Kanter: return "kanter";
        case Method::Series: return "series";
        case Method::Tail: return "tail-cutoff";
        case Method::Table: return "table";
        case Method::FiniteDifference: return "finite-difference";
    }
    return "?";
}

double lower_cutoff(double delta) {
    check_delta(delta);
    const double k = delta / (1.0 - delta);
    return delta * std::pow(kLogCutoff / (1.0 - delta), -1.0 / k);
}

double series_cutoff(double delta) {
    check_delta(delta);
    return std::pow(kSeriesThreshold, -1.0 / delta);
}

double cdf_bromwich(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    return 1.0 - bromwich_moment(z, delta, 0, q) / kPi;
}

double pdf_bromwich(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    return bromwich_moment(z, delta, 1, q) / kPi;
}

double pdf_derivative_bromwich(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    return -bromwich_moment(z, delta, 2, q) / kPi;
}

double cdf_kanter(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    const double lu = -delta / (1.0 - delta) * std::log(z);
    return kanter_integral([&](double phi) { return std::exp(-std::exp(log_kanter_a(phi, delta) + lu)); }, q);
}

double sf_kanter(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 1.0;
    const double lu = -delta / (1.0 - delta) * std::log(z);
    return kanter_integral([&](double phi) { return -std::expm1(-std::exp(log_kanter_a(phi, delta) + lu)); }, q);
}

double pdf_kanter(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    const double k = delta / (1.0 - delta);
    const double lu = -k * std::log(z);
    double g = kanter_integral(
        [&](double phi) {
            double au = std::exp(log_kanter_a(phi, delta) + lu);
            return k * au * std::exp(-au);
        },
        q);
    return g / z;
}

double pdf_derivative_kanter(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= 0.0) return 0.0;
    const double k = delta / (1.0 - delta);
    const double lu = -k * std::log(z);
    double v = kanter_integral(
        [&](double phi) {
            double au = std::exp(log_kanter_a(phi, delta) + lu);
            return k * au * std::exp(-au) * (k * au - (k + 1.0));
        },
        q);
    return v / (z * z);
}

namespace {

template <class Coef>
double series_sum(double z, double delta, Coef&& coef) {
    const double x = std::pow(z, -delta);
    const double lx = std::log(x);
    double sum = 0.0;
    for (int k = 1; k <= 400; ++k) {
        double mag = std::exp(coef(k) + k * lx);
        double term = ((k % 2) ? 1.0 : -1.0) * mag * std::sin(k * kPi * delta);
        sum += term;
        if (k > 3 && mag < 1e-18 * std::abs(sum)) break;
    }
    return sum / kPi;
}

}  // namespace

double sf_series(double z, double delta) {
    check_delta(delta);
    return series_sum(z, delta, [&](int k) { return std::lgamma(k * delta) - std::lgamma(k + 1.0); });
}

double pdf_series(double z, double delta) {
    check_delta(delta);
    return series_sum(z, delta, [&](int k) { return std::lgamma(k * delta + 1.0) - std::lgamma(k + 1.0); }) / z;
}

double pdf_derivative_series(double z, double delta) {
    check_delta(delta);
    return -series_sum(z, delta,
                       [&](int k) {
                           return std::lgamma(k * delta + 1.0) + std::log(k * delta + 1.0) -
                                  std::lgamma(k + 1.0);
                       }) /
           (z * z);
}

Value cdf(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= lower_cutoff(delta)) return {0.0, Method::Tail};
    if (z >= series_cutoff(delta)) return {1.0 - sf_series(z, delta), Method::Series};
    if (delta <= 0.5) {
        // 1 - J0/pi cancels in the far lower tail; Kanter keeps relative accuracy there.
        double v = cdf_bromwich(z, delta, q);
        if (v > kBromwichFloor) return {v, Method::Bromwich};
    }
    return {cdf_kanter(z, delta, q), Method::Kanter};
}

Value pdf(double z, double delta, const QuadratureSpec& q) {
    check_delta(delta);
    if (z <= lower_cutoff(delta)) return {0.0, Method::Tail};
    if (z >= series_cutoff(delta)) return {pdf_series(z, delta), Method::Series};
    if (delta <= 0.5) {
        double v = pdf_bromwich(z, delta, q);
        if (v * z > kBromwichFloor) return {v, Method::Bromwich};
    }
    return {pdf_kanter(z, delta, q), Method::Kanter};
}

// ---------------------------------------------------------------- Table

const Table& Table::get(double delta) {
    static std::mutex mu;
    static std::map<double, std::unique_ptr<Table>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[delta];
    if (!slot) slot = std::make_unique<Table>(delta);
    return *slot;
}

Table::Table(double delta) : delta_(delta) {
    check_delta(delta);
    const double k = delta / (1.0 - delta);
    QuadratureSpec q;
    q.rel_tol = 1e-12;
    q.abs_tol = 1e-13;
    q.max_subdivisions = 4000;

    y0_ = std::log(lower_cutoff(delta));
    const double y1 = std::log(series_cutoff(delta));
    // Spacing so that cubic Hermite error h^4/384 * (scale of 4th derivative) sits near 1e-12.
    const int n = static_cast<int>(std::ceil((y1 - y0_) / 0.004)) + 1;
    h_ = (y1 - y0_) / (n - 1);
    F_.resize(n);
    G_.resize(n);
    dG_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double lu = -k * (y0_ + h_ * i);
        // One pass over phi per node would be cheaper, but three separate
        // adaptive integrals keep each at its own tolerance.
        F_[i] = kanter_integral([&](double phi) { return std::exp(-std::exp(log_kanter_a(phi, delta) + lu)); }, q);
        G_[i] = kanter_integral(
            [&](double phi) {
                double au = std::exp(log_kanter_a(phi, delta) + lu);
                return k * au * std::exp(-au);
            },
            q);
        dG_[i] = kanter_integral(
            [&](double phi) {
                double au = std::exp(log_kanter_a(phi, delta) + lu);
                return k * k * au * std::exp(-au) * (au - 1.0);
            },
            q);
    }
}

namespace {

// Cubic Hermite on a unit cell, t in [0, 1], derivatives already scaled by h.
inline double hermite(double p0, double m0, double p1, double m1, double t) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1;
}

}  // namespace

double Table::cdf(double z) const {
    if (!(z > 0.0)) return 0.0;
    const double y = std::log(z);
    if (y <= y0_) return 0.0;
    if (y >= y_max()) return 1.0 - sf_series(z, delta_);
    const double u = (y - y0_) / h_;
    const auto i = std::min(static_cast<std::size_t>(u), F_.size() - 2);
    const double t = u - static_cast<double>(i);
    double v = hermite(F_[i], h_ * G_[i], F_[i + 1], h_ * G_[i + 1], t);
    return std::clamp(v, 0.0, 1.0);
}

double Table::sf(double z) const {
    if (!(z > 0.0)) return 1.0;
    if (std::log(z) >= y_max()) return sf_series(z, delta_);
    return 1.0 - cdf(z);
}

double Table::log_density(double y) const {
    if (y <= y0_) return 0.0;
    if (y >= y_max()) {
        const double z = std::exp(y);
        return z * pdf_series(z, delta_);
    }
    const double u = (y - y0_) / h_;
    const auto i = std::min(static_cast<std::size_t>(u), G_.size() - 2);
    const double t = u - static_cast<double>(i);
    return std::max(0.0, hermite(G_[i], h_ * dG_[i], G_[i + 1], h_ * dG_[i + 1], t));
}

double Table::pdf(double z) const {
    if (!(z > 0.0)) return 0.0;
    return log_density(std::log(z)) / z;
}

}  // namespace covert::stable
