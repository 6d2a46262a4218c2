#pragma once

#include "covert/core.hpp"
#include "covert/quadrature.hpp"
#include "covert/stable_law.hpp"

namespace covert {

/// Law of the aggregate interference: Laplace transform exp(-nu s^(2/alpha)).
struct InterferenceFieldParams {
    double nu = 0.0;
    double alpha = 4.0;
};

/// Normalized sinc, sin(pi x) / (pi x).
double sinc(double x);

/// nu for the field seen by the typical receiver (and, with the same value, by the adversary).
double interference_nu(double p_s, const NetworkConfig& c);
InterferenceFieldParams interference_params(double p_s, const NetworkConfig& c);

double interference_laplace(double s, const InterferenceFieldParams& p);

/**
 * n-th derivative of the Laplace transform via the Faa di Bruno recursion.
 *
 * Computed in log space, so very large s or n does not overflow before the
 * final exponentiation.
 */
double laplace_nth_derivative(double s, int n, const InterferenceFieldParams& p);

/// log of (-1)^n s^n L^(n)(s) / n!, the n-th term of the moment expansion. Needs s > 0.
double log_scaled_laplace_derivative(double s, int n, const InterferenceFieldParams& p);

struct InterferenceValue {
    double value = 0.0;
    stable::Method method = stable::Method::Bromwich;
};

/// CDF of the aggregate interference by direct inversion. Bromwich for alpha >= 4.
InterferenceValue interference_cdf_ex(double t, const InterferenceFieldParams& p, const QuadratureSpec& q = {});
InterferenceValue interference_pdf_ex(double t, const InterferenceFieldParams& p, const QuadratureSpec& q = {});
double interference_cdf(double t, const InterferenceFieldParams& p, const QuadratureSpec& q = {});
double interference_pdf(double t, const InterferenceFieldParams& p, const QuadratureSpec& q = {});

// Link metrics, conditioned on the typical transmitter being active.
double sinr_prob_ps(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});
double sinr_prob_ts(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});
double ph_prob_ps(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});
double ph_prob_ts(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});
/// Dispatches on s.scheme.
double sinr_prob(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});
double ph_prob(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q = {});

/// Density of p_s g r^-alpha with r the distance to the nearest adversary and g ~ Exp(1).
double nearest_adversary_signal_pdf(double t, double p_s, const NetworkConfig& c, const QuadratureSpec& q = {});
/// Matching survival function.
double nearest_adversary_signal_sf(double t, double p_s, const NetworkConfig& c, const QuadratureSpec& q = {});

double fa_prob(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q = {});
double md_prob(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q = {});
/// FA + MD through the single-integral form.
double detection_error(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q = {});

}  // namespace covert
