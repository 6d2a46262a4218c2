#pragma once

#include <functional>
#include <vector>

namespace covert {

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    int max_subdivisions = 2000;
    /// Ratio between consecutive panel lengths when marching out a semi-infinite range.
    double tail_growth_factor = 2.0;
};

/// Throws DomainError when a field is out of range.
void check(const QuadratureSpec& q);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/**
 * Globally adaptive 21-point Gauss-Kronrod integration over [a, b].
 *
 * The interval is first split at `breaks` (points outside (a, b) are ignored),
 * then the panel with the largest error estimate is bisected until the total
 * error drops below max(abs_tol, rel_tol * |I|). Throws QuadratureError when
 * max_subdivisions is exhausted first.
 */
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureSpec& q, const std::vector<double>& breaks = {});

/// As `integrate` but never throws; the caller inspects `error`.
QuadResult integrate_nothrow(const std::function<double(double)>& f, double a, double b,
                             const QuadratureSpec& q, const std::vector<double>& breaks = {});

}  // namespace covert
