#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmt/interval.hpp"
#include "gmt/quadrature.hpp"
#include "gmt/rate.hpp"
#include "gmt/time_function.hpp"

namespace gmt {

using Grid = std::vector<double>;

/// Covariance function K(s,t) with its mean function and domain.
///
/// Evaluation always passes the arguments to the underlying function in
/// increasing order, so symmetry holds bit-for-bit. A stationary kernel stores
/// its profile K~ and evaluates K(s,t) = K~(|t-s|).
class Kernel {
public:
    using Eval = std::function<double(double, double)>;
    using Profile = std::function<double(double)>;
    using Mean = std::function<double(double)>;

    Kernel(Eval eval, Interval domain, std::string name);

    static Kernel stationary(Profile profile, Interval domain, std::string name);

    double operator()(double s, double t) const;
    double variance(double t) const { return (*this)(t, t); }
    double std_dev(double t) const;
    double mean(double t) const { return mean_ ? mean_(t) : 0.0; }

    bool is_stationary() const { return static_cast<bool>(profile_); }
    /// K~(h); throws InvalidInput on a non-stationary kernel.
    double profile(double h) const;

    const Interval& domain() const { return domain_; }
    const std::string& name() const { return name_; }
    bool has_mean() const { return static_cast<bool>(mean_); }
    bool is_white_noise() const { return white_noise_; }
    bool has_decorrelation() const { return static_cast<bool>(decorrelation_); }

    /// 1 - c(s,t) when an accurate closed form is attached; see with_decorrelation.
    std::optional<double> decorrelation(double s, double t) const;

    Kernel with_mean(Mean mean) const;
    /// Attaches a cancellation-free evaluation of 1 - c(s,t), used by decay_rate.
    Kernel with_decorrelation(Eval one_minus_corr) const;
    Kernel with_name(std::string name) const;
    Kernel as_white_noise() const;

    /// Throws InvalidInput if t lies outside the domain.
    void require_in_domain(double t) const;

    Eigen::MatrixXd gram(const Grid& grid) const;
    Eigen::MatrixXd cross_gram(const Grid& rows, const Grid& cols) const;
    Eigen::VectorXd mean_vector(const Grid& grid) const;

private:
    Eval eval_;
    Profile profile_;
    Mean mean_;
    Eval decorrelation_;
    Interval domain_;
    std::string name_;
    bool white_noise_ = false;
};

struct PsdReport {
    double min_eigenvalue = 0.0;
    double max_diagonal = 0.0;
    bool pass = false;
};

inline constexpr double kPsdTolerance = 1e-10;

/// Gram matrix eigenvalue test. Grid must be strictly increasing and inside the domain.
PsdReport psd_check(const Kernel& kernel, const Grid& grid);

double correlation(const Kernel& kernel, double s, double t);

/// h^{-1} (1 - c(t, t+h)).
double decay_rate(const Kernel& kernel, double t, double h);

struct AlphaOptions {
    double h_min = 1e-8;
    double rel_tol = 1e-3;
    double divergence_threshold = 1e6;
    /// Three increasing values whose log-log slopes against h are all at or
    /// below this bound are read as a power-law divergence.
    double divergence_slope = -0.25;
};

struct AlphaEstimate {
    double estimate = 0.0;
    bool infinite = false;
    bool converged = false;
    std::vector<double> rates;
};

/// Geometric sequence h_max, h_max/ratio, ... down to h_min (inclusive when hit).
std::vector<double> geometric_h_sequence(double h_max = 1e-2, double h_min = 1e-8, double ratio = 10.0);

AlphaEstimate estimate_alpha(const Kernel& kernel, double t, const std::vector<double>& h_sequence,
                             const AlphaOptions& opts = {});

/// Maximum of |L_v(h) - alpha(v)| over a grid_density x grid_density lattice on
/// v in [s,t], h in (0, h_star]. Pairs with v+h outside the kernel domain are skipped.
double uniform_convergence_diagnostic(const Kernel& kernel, const RateFunction& alpha, double s, double t,
                                      double h_star, int grid_density);

/// (s,t) -> scale(s) scale(t) K(phi(s), phi(t)) on new_domain.
Kernel transform_kernel(const Kernel& kernel, const TimeFunction& scale, const TimeFunction& time_change,
                        const Interval& new_domain);

namespace kernels {

/// Fractional Brownian motion covariance on (0, inf).
Kernel fbm(double hurst);
/// Stationary profile cosh(2Hx) - |2 sinh x|^{2H} / 2 on the real line; fbm is
/// its image under u(t) = t^H, phi(t) = ln(t)/2.
Kernel fbm_log(double hurst);
/// Decay-rate limit of fbm_log: +inf, 1 or 0 for H below, at or above 1/2.
RateFunction fbm_log_rate(double hurst);
/// Decay rate of fbm itself: fbm_log_rate(H) / (2t).
RateFunction fbm_rate(double hurst);

Kernel exponential_rate(const RateFunction& alpha, const Interval& domain = Interval::real_line());
Kernel constant(double value = 1.0, const Interval& domain = Interval::real_line());
Kernel white_noise(const Interval& domain = Interval::real_line());

/// K(s,t) = integral over J of k(s,u) k(t,u) du.
Kernel noise_integral(std::function<double(double, double)> k, const Interval& J, const Interval& domain,
                      const quad::Options& opts = {});

/// Sum of weight_i * K_i on the intersection of domains (weights may be negative).
Kernel combination(const std::vector<std::pair<double, Kernel>>& terms);

}  // namespace kernels

}  // namespace gmt
