#include "gmt/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "gmt/error.hpp"

namespace gmt::quad {

namespace {

struct Simpson {
    const std::function<double(double)>& f;
    int max_depth;

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (depth >= max_depth || std::abs(delta) <= 15.0 * tol || !(m > a && b > m)) {
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, const Options& opts) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("adaptive_simpson: bounds must be finite");
    if (a == b) return 0.0;
    if (a > b) return -adaptive_simpson(f, b, a, opts);
    // A fixed five-panel start keeps narrow features from being skipped at depth 0.
    constexpr int panels = 5;
    const double width = (b - a) / panels;
    Simpson s{f, opts.max_depth};
    double total = 0.0;
    double lo = a;
    double flo = f(lo);
    for (int i = 0; i < panels; ++i) {
        const double hi = (i + 1 == panels) ? b : a + (i + 1) * width;
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        const double fhi = f(hi);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += s.recurse(lo, hi, flo, fmid, fhi, whole, opts.abs_tol / panels, 0);
        lo = hi;
        flo = fhi;
    }
    return total;
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, const Options& opts,
                             double tail_threshold) {
    if (!std::isfinite(a)) throw InvalidInput("integrate_to_infinity: lower bound must be finite");
    auto tail_small = [&](double from, double span) {
        constexpr int probes = 32;
        for (int i = 0; i <= probes; ++i) {
            if (std::abs(f(from + span * i / probes)) >= tail_threshold) return false;
        }
        return true;
    };
    // Segments [a, a+1], [a+1, a+2], [a+2, a+4], ... until the next one is negligible.
    double total = 0.0;
    double lo = a;
    double width = 1.0;
    constexpr int max_segments = 200;
    Options seg = opts;
    seg.abs_tol = opts.abs_tol / 8.0;
    for (int i = 0; i < max_segments; ++i) {
        const double hi = lo + width;
        total += adaptive_simpson(f, lo, hi, seg);
        seg.abs_tol = std::max(seg.abs_tol * 0.5, opts.abs_tol * 1e-6);
        lo = hi;
        if (i > 0) width *= 2.0;
        const double offset = std::max(std::abs(lo), 1.0);
        if (tail_small(lo, std::max(width * 4.0, offset))) return total;
    }
    throw InvalidInput("integrate_to_infinity: integrand tail does not decay");
}

double integrate(const std::function<double(double)>& f, double a, double b, const Options& opts) {
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, opts);
    if (std::isfinite(a) && std::isfinite(b)) return adaptive_simpson(f, a, b, opts);
    if (std::isfinite(a)) return integrate_to_infinity(f, a, opts);
    auto reflected = [&f](double u) { return f(-u); };
    if (std::isfinite(b)) return integrate_to_infinity(reflected, -b, opts);
    return integrate_to_infinity(f, 0.0, opts) + integrate_to_infinity(reflected, 0.0, opts);
}

}  // namespace gmt::quad
