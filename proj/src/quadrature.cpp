#include "covert/quadrature.hpp"

#include "covert/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <queue>
#include <sstream>

namespace covert {

void check(const QuadratureSpec& q) {
    if (!(q.rel_tol > 0) || !(q.abs_tol > 0)) throw DomainError("quadrature tolerances must be positive");
    if (q.max_subdivisions < 1) throw DomainError("max_subdivisions must be at least 1");
    if (!(q.tail_growth_factor > 1)) throw DomainError("tail_growth_factor must exceed 1");
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// One 21-point Kronrod panel with the QUADPACK error heuristic. Boost supplies
// the nodes and weights; its own single-panel error estimate is not scaled by
// the panel width in the version we build against, so it is not used.
Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    static const auto& x = Kronrod::abscissa();
    static const auto& wk = Kronrod::weights();
    static const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 21> fv{};
    fv[0] = f(c);
    for (std::size_t i = 1; i < x.size(); ++i) {
        fv[2 * i - 1] = f(c - h * x[i]);
        fv[2 * i] = f(c + h * x[i]);
    }
    double k = wk[0] * fv[0], g = 0.0, kabs = std::abs(k);
    // Odd abscissa indices are the 10-point Gauss nodes.
    for (std::size_t i = 1; i < x.size(); ++i) {
        double pair = fv[2 * i - 1] + fv[2 * i];
        k += wk[i] * pair;
        kabs += wk[i] * (std::abs(fv[2 * i - 1]) + std::abs(fv[2 * i]));
        if (i % 2 == 1) g += wg[(i - 1) / 2] * pair;
    }
    const double mean = 0.5 * k;
    double asc = wk[0] * std::abs(fv[0] - mean);
    for (std::size_t i = 1; i < x.size(); ++i)
        asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
    double err = std::abs((k - g) * h);
    asc *= std::abs(h);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double resabs = kabs * std::abs(h);
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(err, 50 * eps * resabs);
    return {a, b, k * h, err};
}

}  // namespace

QuadResult integrate_nothrow(const std::function<double(double)>& f, double a, double b,
                             const QuadratureSpec& q, const std::vector<double>& breaks) {
    if (a == b) return {};
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    std::priority_queue<Panel> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Panel p = eval_panel(f, pts[i], pts[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    while (total_err > std::max(q.abs_tol, q.rel_tol * std::abs(total)) && count < q.max_subdivisions) {
        Panel worst = heap.top();
        double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // floating-point resolution reached
        heap.pop();
        Panel l = eval_panel(f, worst.a, mid);
        Panel r = eval_panel(f, mid, worst.b);
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // Re-sum to shed the rounding drift of the running totals.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    return {sign * total, total_err, count};
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureSpec& q, const std::vector<double>& breaks) {
    QuadResult r = integrate_nothrow(f, a, b, q, breaks);
    if (!std::isfinite(r.value) || r.error > std::max(q.abs_tol, q.rel_tol * std::abs(r.value))) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] stopped at error " << r.error << " after "
            << r.intervals << " panels";
        throw QuadratureError(msg.str(), r.error);
    }
    return r;
}

}  // namespace covert
