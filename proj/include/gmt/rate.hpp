#pragma once

#include <functional>
#include <optional>
#include <string>

namespace gmt {

/// Instantaneous decorrelation rate t -> alpha(t) in [0, +inf].
///
/// The identically infinite rate is a distinct state rather than a float
/// infinity, so it never leaks into matrices: kernels built from it are the
/// white-noise kernel.
class RateFunction {
public:
    static RateFunction constant(double value);
    /// intercept + slope * t
    static RateFunction linear(double intercept, double slope);
    static RateFunction infinite();
    static RateFunction custom(std::function<double(double)> fn, std::string description = "custom");
    /// Custom rate with a known integral over [lo, hi].
    static RateFunction with_integral(std::function<double(double)> fn,
                                      std::function<double(double, double)> integral,
                                      std::string description = "custom");

    bool is_infinite() const { return infinite_; }

    /// Rate at t. Throws InvalidRate on the infinite marker.
    double operator()(double t) const;

    /// Integral over [min(s,t), max(s,t)]: closed form when known, adaptive Simpson otherwise.
    /// Throws InvalidRate if a negative rate is sampled.
    double integral(double s, double t, double abs_tol = 1e-10) const;

    const std::optional<double>& constant_value() const { return constant_; }
    const std::string& description() const { return description_; }

private:
    RateFunction() = default;

    bool infinite_ = false;
    std::function<double(double)> fn_;
    std::function<double(double, double)> closed_integral_;  // (lo, hi) with lo <= hi
    std::optional<double> constant_;
    std::string description_;
};

}  // namespace gmt
