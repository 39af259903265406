#include "gmt/rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmt/error.hpp"
#include "gmt/interval.hpp"
#include "gmt/quadrature.hpp"

namespace gmt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_nonnegative(double value, double t) {
    if (!(value >= 0.0)) {
        throw InvalidRate("negative or undefined rate " + fmt(value) + " at t = " + fmt(t));
    }
}

}  // namespace

RateFunction RateFunction::constant(double value) {
    require_nonnegative(value, 0.0);
    if (!std::isfinite(value)) return infinite();
    RateFunction r;
    r.fn_ = [value](double) { return value; };
    r.closed_integral_ = [value](double lo, double hi) { return value * (hi - lo); };
    r.constant_ = value;
    r.description_ = "constant(" + fmt(value) + ")";
    return r;
}

RateFunction RateFunction::linear(double intercept, double slope) {
    if (slope == 0.0) return constant(intercept);
    RateFunction r;
    r.fn_ = [intercept, slope](double t) {
        const double v = intercept + slope * t;
        require_nonnegative(v, t);
        return v;
    };
    r.closed_integral_ = [intercept, slope](double lo, double hi) {
        // A linear function attains its minimum at an endpoint.
        require_nonnegative(intercept + slope * lo, lo);
        require_nonnegative(intercept + slope * hi, hi);
        return (hi - lo) * (intercept + 0.5 * slope * (lo + hi));
    };
    r.description_ = "linear(" + fmt(intercept) + ", " + fmt(slope) + ")";
    return r;
}

RateFunction RateFunction::infinite() {
    RateFunction r;
    r.infinite_ = true;
    r.description_ = "infinite";
    return r;
}

RateFunction RateFunction::custom(std::function<double(double)> fn, std::string description) {
    RateFunction r;
    r.fn_ = std::move(fn);
    r.description_ = std::move(description);
    return r;
}

RateFunction RateFunction::with_integral(std::function<double(double)> fn,
                                         std::function<double(double, double)> integral, std::string description) {
    RateFunction r = custom(std::move(fn), std::move(description));
    r.closed_integral_ = std::move(integral);
    return r;
}

double RateFunction::operator()(double t) const {
    if (infinite_) throw InvalidRate("pointwise value of the infinite rate requested");
    const double v = fn_(t);
    require_nonnegative(v, t);
    return v;
}

double RateFunction::integral(double s, double t, double abs_tol) const {
    const double lo = std::min(s, t);
    const double hi = std::max(s, t);
    if (lo == hi) return 0.0;
    if (infinite_) return kInf;
    if (closed_integral_) {
        const double v = closed_integral_(lo, hi);
        require_nonnegative(v, lo);
        return v;
    }
    auto integrand = [this](double u) { return (*this)(u); };
    return quad::adaptive_simpson(integrand, lo, hi, {abs_tol, 48});
}

}  // namespace gmt
