#pragma once

#include <limits>
#include <string>

namespace gmt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval of admissible times. Infinite bounds are always open.
struct Interval {
    double lo = -kInf;
    double hi = kInf;
    bool lo_open = true;
    bool hi_open = true;

    static Interval real_line() { return {}; }
    static Interval closed(double a, double b) { return {a, b, false, false}; }
    static Interval open(double a, double b) { return {a, b, true, true}; }
    static Interval positive() { return {0.0, kInf, true, true}; }

    bool contains(double t) const {
        if (t < lo || t > hi) return false;
        if (t == lo && (lo_open || lo == -kInf)) return false;
        if (t == hi && (hi_open || hi == kInf)) return false;
        return true;
    }

    bool is_bounded() const { return lo > -kInf && hi < kInf; }

    std::string to_string() const;
};

}  // namespace gmt
