#include "covert/analytics.hpp"

#include "covert/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace covert {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

double delta_of(double alpha) { return 2.0 / alpha; }

// sigma = nu^(alpha/2): the aggregate interference is sigma * Z.
double scale_of(const InterferenceFieldParams& p) { return std::pow(p.nu, p.alpha / 2.0); }

void check_params(const InterferenceFieldParams& p) {
    if (!(p.nu > 0.0) || !(p.alpha > 2.0)) throw DomainError("interference field needs nu > 0 and alpha > 2");
}

void need_scheme(const Strategy& s, Scheme want, const char* who) {
    if (s.scheme != want) throw DomainError(std::string(who) + ": wrong scheme tag on strategy");
    if (!(s.p_s > 0.0)) throw DomainError(std::string(who) + ": p_s must be positive");
    if (!(s.rho > 0.0 && s.rho <= 1.0)) throw DomainError(std::string(who) + ": rho must lie in (0, 1]");
}

// ---------------------------------------------------------------- signal at the adversary

// W = g u^(-beta) with g, u ~ Exp(1) and beta = alpha / 2. The received signal at the
// nearest adversary is c_S W with c_S = p_s (pi lambda_A)^beta.
double signal_scale(double p_s, const NetworkConfig& c) {
    return p_s * std::pow(kPi * c.lambda_a, c.alpha / 2.0);
}

// Upper integration limit in u: e^-U U^beta below tol.
double u_cutoff(double beta, double tol) {
    double u = -std::log(tol);
    for (int i = 0; i < 50; ++i) {
        double next = -std::log(tol) + beta * std::log(std::max(u, 1.0)) + 1.0;
        if (std::abs(next - u) < 1e-6) break;
        u = next;
    }
    return u;
}

double w_sf_direct(double y, double beta, const QuadratureSpec& q) {
    if (y <= 0.0) return 1.0;
    const double U = u_cutoff(0.0, q.abs_tol * 1e-2);
    const double knee = std::pow(y, -1.0 / beta);
    return integrate([&](double u) { return std::exp(-u - y * std::pow(u, beta)); }, 0.0, U, q,
                     {0.1 * knee, knee, 10 * knee})
        .value;
}

double w_pdf_direct(double y, double beta, const QuadratureSpec& q) {
    if (y < 0.0) return 0.0;
    const double U = u_cutoff(beta, q.abs_tol * 1e-2);
    const double knee = y > 0.0 ? std::pow(y, -1.0 / beta) : U;
    return integrate([&](double u) { return std::exp(-u - y * std::pow(u, beta)) * std::pow(u, beta); }, 0.0, U,
                     q, {0.1 * knee, knee, 10 * knee})
        .value;
}

// Survival of W tabulated on ln y; cubic Hermite with the exact log-derivative -y f_W(y).
class SignalTable {
public:
    static const SignalTable& get(double alpha) {
        static std::mutex mu;
        static std::map<double, std::unique_ptr<SignalTable>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[alpha];
        if (!slot) slot = std::make_unique<SignalTable>(alpha);
        return *slot;
    }

    explicit SignalTable(double alpha) : beta_(alpha / 2.0) {
        QuadratureSpec q;
        q.rel_tol = 1e-12;
        q.abs_tol = 1e-13;
        const int n = static_cast<int>((kYMax - kYMin) / kStep) + 1;
        S_.resize(n);
        D_.resize(n);
        for (int i = 0; i < n; ++i) {
            double y = std::exp(kYMin + kStep * i);
            S_[i] = w_sf_direct(y, beta_, q);
            D_[i] = -y * w_pdf_direct(y, beta_, q);
        }
        gamma1_ = std::tgamma(1.0 + beta_);
    }

    double sf(double y) const {
        if (y <= 0.0) return 1.0;
        const double ly = std::log(y);
        if (ly < kYMin) return 1.0 - y * gamma1_;
        if (ly >= kYMin + kStep * static_cast<double>(S_.size() - 1)) return large(y);
        const double u = (ly - kYMin) / kStep;
        const auto i = std::min(static_cast<std::size_t>(u), S_.size() - 2);
        const double t = u - static_cast<double>(i);
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * S_[i] + (t3 - 2 * t2 + t) * kStep * D_[i] + (-2 * t3 + 3 * t2) * S_[i + 1] +
               (t3 - t2) * kStep * D_[i + 1];
    }

private:
    static constexpr double kYMin = -30.0, kYMax = 30.0, kStep = 0.01;

    // (1/beta) sum_k (-1)^k / k! Gamma((k+1)/beta) y^(-(k+1)/beta)
    double large(double y) const {
        const double lx = -std::log(y) / beta_;
        double sum = 0.0;
        for (int k = 0; k < 200; ++k) {
            double mag = std::exp(std::lgamma((k + 1) / beta_) - std::lgamma(k + 1.0) + (k + 1) * lx);
            sum += (k % 2 ? -mag : mag);
            if (k > 2 && mag < 1e-18 * std::abs(sum)) break;
        }
        return sum / beta_;
    }

    double beta_;
    double gamma1_ = 1.0;
    std::vector<double> S_, D_;
};

// Integral of the stable log-density g(y) times a weight over y in [y_min, y_end],
// where the weight varies on a scale `knee` just below y_end.
template <class W>
double stable_convolution(const stable::Table& tab, double y_end, double knee, W&& weight, const QuadratureSpec& q) {
    const double y_lo = tab.y_min();
    if (y_end <= y_lo) return 0.0;
    std::vector<double> br;
    for (double k = 1e-4; k < 1e6; k *= 10.0) br.push_back(y_end - knee * k);
    br.push_back(0.0);
    br.push_back(tab.y_max());
    return integrate([&](double y) { return tab.log_density(y) * weight(y); }, y_lo, y_end, q, br).value;
}

}  // namespace

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

double interference_nu(double p_s, const NetworkConfig& c) {
    const double d = delta_of(c.alpha);
    return kPi / sinc(d) *
           (c.lambda_d * c.p_active_d * std::pow(p_s, d) + c.lambda_b * c.p_active_b * std::pow(c.p_cell, d));
}

InterferenceFieldParams interference_params(double p_s, const NetworkConfig& c) {
    return {interference_nu(p_s, c), c.alpha};
}

double interference_laplace(double s, const InterferenceFieldParams& p) {
    if (s < 0.0) throw DomainError("interference_laplace: s must be nonnegative");
    return std::exp(-p.nu * std::pow(s, delta_of(p.alpha)));
}

namespace {

// log of (-1)^n s^n L^(n)(s) / n! for n = 0..n_max.
std::vector<double> log_scaled_terms(double s, int n_max, const InterferenceFieldParams& p) {
    const double d = delta_of(p.alpha);
    const double V = p.nu * std::pow(s, d);
    std::vector<double> out(n_max + 1);
    out[0] = -V;
    if (n_max == 0) return out;
    // c_k = delta (1 - delta)_k / k!, all positive, so no cancellation anywhere.
    std::vector<double> coef(n_max);
    coef[0] = d;
    for (int k = 1; k < n_max; ++k) coef[k] = coef[k - 1] * (k - d) / k;
    // With V >= 1 carry beta_n / V^n to keep magnitudes O(1).
    const bool scaled = V >= 1.0;
    std::vector<double> b(n_max + 1);
    b[0] = 1.0;
    double vpow = 1.0;
    for (int k = 0; k < n_max; ++k) {
        coef[k] *= scaled ? 1.0 / vpow : V;
        vpow *= V;
    }
    for (int n = 0; n < n_max; ++n) {
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) acc += coef[k] * b[n - k];
        b[n + 1] = acc / (n + 1);
    }
    const double lv = std::log(V);
    for (int n = 1; n <= n_max; ++n) out[n] = -V + std::log(b[n]) + (scaled ? n * lv : 0.0);
    return out;
}

}  // namespace

double log_scaled_laplace_derivative(double s, int n, const InterferenceFieldParams& p) {
    check_params(p);
    if (n < 0) throw DomainError("derivative order must be nonnegative");
    if (n > 0 && !(s > 0.0)) throw DomainError("laplace derivative needs s > 0");
    if (n == 0) return -p.nu * std::pow(s, delta_of(p.alpha));
    return log_scaled_terms(s, n, p)[n];
}

double laplace_nth_derivative(double s, int n, const InterferenceFieldParams& p) {
    if (n == 0) return interference_laplace(s, p);
    const double l = log_scaled_laplace_derivative(s, n, p) + std::lgamma(n + 1.0) - n * std::log(s);
    return (n % 2 ? -1.0 : 1.0) * std::exp(l);
}

InterferenceValue interference_cdf_ex(double t, const InterferenceFieldParams& p, const QuadratureSpec& q) {
    check_params(p);
    check(q);
    if (t < 0.0) throw DomainError("interference_cdf: t must be nonnegative");
    if (t == 0.0) return {0.0, stable::Method::Tail};
    auto v = stable::cdf(t / scale_of(p), delta_of(p.alpha), q);
    return {std::clamp(v.value, 0.0, 1.0), v.method};
}

double interference_cdf(double t, const InterferenceFieldParams& p, const QuadratureSpec& q) {
    return interference_cdf_ex(t, p, q).value;
}

InterferenceValue interference_pdf_ex(double t, const InterferenceFieldParams& p, const QuadratureSpec& q) {
    check_params(p);
    check(q);
    if (!(t > 0.0)) throw DomainError("interference_pdf: t must be positive");
    const double sigma = scale_of(p);
    const double d = delta_of(p.alpha);
    try {
        auto v = stable::pdf(t / sigma, d, q);
        return {std::max(0.0, v.value / sigma), v.method};
    } catch (const QuadratureError&) {
        // Fall back to a central difference of the CDF with a step that shrinks
        // until two successive estimates agree.
        double h = 1e-3 * t, prev = NAN;
        for (int i = 0; i < 12; ++i) {
            double est = (interference_cdf(t + h, p, q) - interference_cdf(t - h, p, q)) / (2 * h);
            if (std::abs(est - prev) < 1e-6 * std::abs(est)) return {std::max(0.0, est), stable::Method::FiniteDifference};
            prev = est;
            h *= 0.5;
        }
        return {std::max(0.0, prev), stable::Method::FiniteDifference};
    }
}

double interference_pdf(double t, const InterferenceFieldParams& p, const QuadratureSpec& q) {
    return interference_pdf_ex(t, p, q).value;
}

// ---------------------------------------------------------------- link metrics

namespace {

// P(g >= a + s I) with g ~ Gamma(M, 1): sum_n exp(log-term_n) Q(M - n, a).
double coverage(double a, double s, int M, const InterferenceFieldParams& p) {
    if (!std::isfinite(a) || !std::isfinite(s)) return 0.0;
    auto lb = log_scaled_terms(s, M - 1, p);
    double total = 0.0;
    for (int n = 0; n < M; ++n) {
        if (lb[n] < -745.0) continue;
        total += std::exp(lb[n]) * boost::math::gamma_q(static_cast<double>(M - n), a);
    }
    return std::clamp(total, 0.0, 1.0);
}

// P(direct + I < T0) with direct ~ Gamma(M, scale theta_g).
double below_threshold(double T0, double theta_g, int M, const InterferenceFieldParams& p, const QuadratureSpec& q) {
    const auto& tab = stable::Table::get(delta_of(p.alpha));
    const double sigma = scale_of(p);
    const double y_end = std::log(T0 / sigma);
    const double knee = std::min(1.0, theta_g / T0);
    return stable_convolution(
        tab, y_end, knee,
        [&](double y) {
            double rest = T0 - sigma * std::exp(y);
            return rest > 0.0 ? boost::math::gamma_p(static_cast<double>(M), rest / theta_g) : 0.0;
        },
        q);
}

double rate_threshold(double bits, double seconds) { return std::expm1(std::log(2.0) * bits / seconds); }

}  // namespace

double sinr_prob_ps(const Strategy& s, const NetworkConfig& c, const QuadratureSpec&) {
    need_scheme(s, Scheme::PS, "sinr_prob_ps");
    require_valid(c);
    const double theta = rate_threshold(c.packet_bits, c.slot_s);
    const double ra = std::pow(c.r_link, c.alpha);
    const double a = theta * ra * (s.rho * c.noise_rf + c.noise_rx) / (s.rho * s.p_s);
    return coverage(a, theta * ra / s.p_s, c.m_antennas, interference_params(s.p_s, c));
}

double sinr_prob_ts(const Strategy& s, const NetworkConfig& c, const QuadratureSpec&) {
    need_scheme(s, Scheme::TS, "sinr_prob_ts");
    require_valid(c);
    const double theta = rate_threshold(c.packet_bits, s.rho * c.slot_s);
    const double ra = std::pow(c.r_link, c.alpha);
    const double a = theta * ra * (c.noise_rf + c.noise_rx) / s.p_s;
    return coverage(a, theta * ra / s.p_s, c.m_antennas, interference_params(s.p_s, c));
}

double ph_prob_ps(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q) {
    need_scheme(s, Scheme::PS, "ph_prob_ps");
    require_valid(c);
    if (s.rho >= 1.0) return c.noise_rx >= c.ph_threshold ? 1.0 : 0.0;
    const double T0 = (c.ph_threshold - c.noise_rx) / (1.0 - s.rho) - c.noise_rf;
    if (T0 <= 0.0) return 1.0;
    const double theta_g = s.p_s / std::pow(c.r_link, c.alpha);
    return std::clamp(1.0 - below_threshold(T0, theta_g, c.m_antennas, interference_params(s.p_s, c), q), 0.0, 1.0);
}

double ph_prob_ts(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q) {
    need_scheme(s, Scheme::TS, "ph_prob_ts");
    require_valid(c);
    if (s.rho >= 1.0) return 0.0;
    const double T0 = c.ph_threshold / (1.0 - s.rho) - c.noise_rx - c.noise_rf;
    if (T0 <= 0.0) return 1.0;
    const double theta_g = s.p_s / std::pow(c.r_link, c.alpha);
    return std::clamp(1.0 - below_threshold(T0, theta_g, c.m_antennas, interference_params(s.p_s, c), q), 0.0, 1.0);
}

double sinr_prob(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q) {
    return s.scheme == Scheme::PS ? sinr_prob_ps(s, c, q) : sinr_prob_ts(s, c, q);
}

double ph_prob(const Strategy& s, const NetworkConfig& c, const QuadratureSpec& q) {
    return s.scheme == Scheme::PS ? ph_prob_ps(s, c, q) : ph_prob_ts(s, c, q);
}

// ---------------------------------------------------------------- detection

double nearest_adversary_signal_pdf(double t, double p_s, const NetworkConfig& c, const QuadratureSpec& q) {
    if (!(t > 0.0)) throw DomainError("signal pdf: t must be positive");
    if (!(p_s > 0.0)) throw DomainError("signal pdf: p_s must be positive");
    const double cs = signal_scale(p_s, c);
    return w_pdf_direct(t / cs, c.alpha / 2.0, q) / cs;
}

double nearest_adversary_signal_sf(double t, double p_s, const NetworkConfig& c, const QuadratureSpec& q) {
    if (!(p_s > 0.0)) throw DomainError("signal sf: p_s must be positive");
    if (t <= 0.0) return 1.0;
    return w_sf_direct(t / signal_scale(p_s, c), c.alpha / 2.0, q);
}

double fa_prob(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q) {
    require_valid(c);
    if (!(p_s > 0.0)) throw DomainError("fa_prob: p_s must be positive");
    const double x = tau - c.noise_adv;
    if (x <= 0.0) return 1.0;
    auto p = interference_params(p_s, c);
    const double z = x / scale_of(p);
    const double d = delta_of(c.alpha);
    if (z >= stable::series_cutoff(d)) return std::clamp(stable::sf_series(z, d), 0.0, 1.0);
    return std::clamp(1.0 - interference_cdf(x, p, q), 0.0, 1.0);
}

double md_prob(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q) {
    require_valid(c);
    if (!(p_s > 0.0)) throw DomainError("md_prob: p_s must be positive");
    const double x = tau - c.noise_adv;
    if (x <= 0.0) return 0.0;
    const auto p = interference_params(p_s, c);
    const auto& tab = stable::Table::get(delta_of(c.alpha));
    const double sigma = scale_of(p);
    const double cs = signal_scale(p_s, c);
    const double beta = c.alpha / 2.0;
    // v = ln(t / c_S); the weight w f_W(w) vanishes like w as w -> 0.
    const double v_end = std::log(x / cs);
    const double v_lo = std::min(v_end, std::log(q.abs_tol) - 5.0);
    std::vector<double> br;
    for (double v = std::ceil(v_lo); v < v_end; v += 2.0) br.push_back(v);
    // F_I(x - t) is exactly 0 once x - t falls below the table's lower edge.
    const double t_hi = x - sigma * std::exp(tab.y_min());
    if (t_hi > 0.0) br.push_back(std::log(t_hi / cs));
    for (double k = 1e-3; k < 1e3; k *= 10.0) br.push_back(v_end - k);
    QuadratureSpec inner = q;
    inner.abs_tol = q.abs_tol * 1e-2;
    double v = integrate(
                   [&](double v) {
                       const double w = std::exp(v);
                       const double rest = x - cs * w;
                       if (rest <= 0.0) return 0.0;
                       const double F = tab.cdf(rest / sigma);
                       if (F == 0.0) return 0.0;
                       return w * w_pdf_direct(w, beta, inner) * F;
                   },
                   v_lo, v_end, q, br)
                   .value;
    return std::clamp(v, 0.0, 1.0);
}

double detection_error(double p_s, double tau, const NetworkConfig& c, const QuadratureSpec& q) {
    require_valid(c);
    if (!(p_s > 0.0)) throw DomainError("detection_error: p_s must be positive");
    const double x = tau - c.noise_adv;
    if (x <= 0.0) return 1.0;
    const auto p = interference_params(p_s, c);
    const auto& tab = stable::Table::get(delta_of(c.alpha));
    const auto& sig = SignalTable::get(c.alpha);
    const double sigma = scale_of(p);
    const double cs = signal_scale(p_s, c);
    const double y_end = std::log(x / sigma);
    // 1 - int f_I(t) P(S > x - t) dt
    const double hit = stable_convolution(
        tab, y_end, std::min(1.0, cs / x),
        [&](double y) {
            double rest = x - sigma * std::exp(y);
            return rest > 0.0 ? sig.sf(rest / cs) : 1.0;
        },
        q);
    return std::clamp(1.0 - hit, 0.0, 1.0);
}

}  // namespace covert
