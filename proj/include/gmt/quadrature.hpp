#pragma once

#include <functional>

namespace gmt::quad {

struct Options {
    double abs_tol = 1e-10;
    int max_depth = 48;
};

/// Adaptive Simpson rule with Richardson correction on a finite interval.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, const Options& opts = {});

/// Integral over [a, +inf). The interval is truncated at the first doubling point U
/// past which |f| stays below `tail_threshold` on a geometric probe of the tail.
double integrate_to_infinity(const std::function<double(double)>& f, double a, const Options& opts = {},
                             double tail_threshold = 1e-14);

/// Dispatches on infinite bounds; a > b returns minus the reversed integral.
double integrate(const std::function<double(double)>& f, double a, double b, const Options& opts = {});

}  // namespace gmt::quad
