#pragma once

#include <functional>
#include <optional>
#include <string>

namespace gmt {

/// A real function of time carrying enough structure for kernel transforms to
/// decide whether stationarity survives (constant scales, affine time changes).
class TimeFunction {
public:
    static TimeFunction constant(double value);
    static TimeFunction identity();
    static TimeFunction affine(double slope, double intercept);
    /// coefficient * t^exponent, defined for t > 0.
    static TimeFunction power(double coefficient, double exponent);
    /// coefficient * exp(rate * t).
    static TimeFunction exponential(double coefficient, double rate);
    /// coefficient * ln(t), defined for t > 0.
    static TimeFunction logarithm(double coefficient);
    static TimeFunction custom(std::function<double(double)> fn, std::string description = "custom");

    double operator()(double t) const { return fn_(t); }

    const std::optional<double>& constant_value() const { return constant_; }
    /// (slope, intercept) when the function is affine.
    const std::optional<std::pair<double, double>>& affine_coefficients() const { return affine_; }
    const std::string& description() const { return description_; }

private:
    std::function<double(double)> fn_;
    std::optional<double> constant_;
    std::optional<std::pair<double, double>> affine_;
    std::string description_;
};

}  // namespace gmt
