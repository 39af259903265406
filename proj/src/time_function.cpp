#include "gmt/time_function.hpp"

#include <cmath>
#include <sstream>

namespace gmt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

TimeFunction TimeFunction::constant(double value) {
    TimeFunction f;
    f.fn_ = [value](double) { return value; };
    f.constant_ = value;
    f.affine_ = std::make_pair(0.0, value);
    f.description_ = "constant(" + fmt(value) + ")";
    return f;
}

TimeFunction TimeFunction::identity() {
    TimeFunction f = affine(1.0, 0.0);
    f.fn_ = [](double t) { return t; };
    f.description_ = "identity";
    return f;
}

TimeFunction TimeFunction::affine(double slope, double intercept) {
    TimeFunction f;
    f.fn_ = [slope, intercept](double t) { return slope * t + intercept; };
    f.affine_ = std::make_pair(slope, intercept);
    if (slope == 0.0) f.constant_ = intercept;
    f.description_ = "affine(" + fmt(slope) + ", " + fmt(intercept) + ")";
    return f;
}

TimeFunction TimeFunction::power(double coefficient, double exponent) {
    if (exponent == 0.0) return constant(coefficient);
    if (exponent == 1.0) return affine(coefficient, 0.0);
    TimeFunction f;
    f.fn_ = [coefficient, exponent](double t) { return coefficient * std::pow(t, exponent); };
    f.description_ = "power(" + fmt(coefficient) + ", " + fmt(exponent) + ")";
    return f;
}

TimeFunction TimeFunction::exponential(double coefficient, double rate) {
    if (rate == 0.0) return constant(coefficient);
    TimeFunction f;
    f.fn_ = [coefficient, rate](double t) { return coefficient * std::exp(rate * t); };
    f.description_ = "exponential(" + fmt(coefficient) + ", " + fmt(rate) + ")";
    return f;
}

TimeFunction TimeFunction::logarithm(double coefficient) {
    TimeFunction f;
    f.fn_ = [coefficient](double t) { return coefficient * std::log(t); };
    f.description_ = "logarithm(" + fmt(coefficient) + ")";
    return f;
}

TimeFunction TimeFunction::custom(std::function<double(double)> fn, std::string description) {
    TimeFunction f;
    f.fn_ = std::move(fn);
    f.description_ = std::move(description);
    return f;
}

}  // namespace gmt
