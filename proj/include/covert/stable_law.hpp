#pragma once

// Positive stable variable Z with E[exp(-s Z)] = exp(-s^delta), 0 < delta < 1.
// The aggregate interference of the network is nu^(1/delta) * Z with delta = 2/alpha.

#include "covert/quadrature.hpp"

#include <vector>

namespace covert::stable {

enum class Method { Bromwich, Kanter, Series, Tail, Table, FiniteDifference };

const char* to_string(Method m);

struct Value {
    double value = 0.0;
    Method method = Method::Kanter;
};

/// Large-argument expansion is used at and above this z^-delta.
inline constexpr double kSeriesThreshold = 0.2;

/// Below this z the CDF is smaller than exp(-700) (Chernoff bound) and reported as 0.
double lower_cutoff(double delta);

/// Smallest z for which the convergent large-z series is used.
double series_cutoff(double delta);

// Bromwich inversion along the imaginary axis, regularized by w = theta^delta.
// Valid for delta <= 1/2 where the integrand never grows. Throws DomainError otherwise.
double cdf_bromwich(double z, double delta, const QuadratureSpec& q);
double pdf_bromwich(double z, double delta, const QuadratureSpec& q);
double pdf_derivative_bromwich(double z, double delta, const QuadratureSpec& q);

// Kanter's non-oscillatory integral over (0, pi). Valid for every delta in (0, 1).
double cdf_kanter(double z, double delta, const QuadratureSpec& q);
double sf_kanter(double z, double delta, const QuadratureSpec& q);
double pdf_kanter(double z, double delta, const QuadratureSpec& q);
double pdf_derivative_kanter(double z, double delta, const QuadratureSpec& q);

// Convergent large-z series. Accurate to ~1e-16 relative when z^-delta <= kSeriesThreshold.
double sf_series(double z, double delta);
double pdf_series(double z, double delta);
double pdf_derivative_series(double z, double delta);

/// Best direct evaluation: series for large z, 0 below the cutoff,
/// Bromwich when delta <= 1/2, Kanter otherwise.
Value cdf(double z, double delta, const QuadratureSpec& q);
Value pdf(double z, double delta, const QuadratureSpec& q);

/**
 * Interpolation table on y = ln z for fast repeated evaluation.
 *
 * Stores F(z) and g(y) = z f(z) with their y-derivatives for cubic Hermite
 * interpolation (absolute error below 1e-11). Built once per delta and shared.
 */
class Table {
public:
    static const Table& get(double delta);

    explicit Table(double delta);

    double delta() const { return delta_; }
    double y_min() const { return y0_; }
    double y_max() const { return y0_ + h_ * static_cast<double>(F_.size() - 1); }

    double cdf(double z) const;
    double sf(double z) const;
    double pdf(double z) const;
    /// z * f(z) as a function of y = ln z (the density of ln Z).
    double log_density(double y) const;

private:
    double delta_;
    double y0_ = 0.0;
    double h_ = 0.0;
    std::vector<double> F_, G_, dG_;
};

}  // namespace covert::stable
