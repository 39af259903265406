#pragma once

#include <functional>
#include <vector>

#include "gmt/gauss.hpp"
#include "gmt/kernel.hpp"
#include "gmt/rate.hpp"

namespace gmt {

/// Strictly increasing times s = t_0 < ... < t_m = t.
class Partition {
public:
    explicit Partition(std::vector<double> points);

    static Partition uniform(double s, double t, long long intervals);
    /// Uniform partition whose gaps are at most `mesh`.
    static Partition with_mesh(double s, double t, double mesh);

    const std::vector<double>& points() const { return points_; }
    double front() const { return points_.front(); }
    double back() const { return points_.back(); }
    double mesh() const;

private:
    std::vector<double> points_;
};

/// Sequence of finite time sets R_n; the lattice form is R_n = step(n) Z cap [-n, n].
class AdmissibleSequence {
public:
    using Generator = std::function<std::vector<double>(int)>;

    static AdmissibleSequence lattice(std::function<double(int)> step);
    static AdmissibleSequence custom(Generator generator);

    std::vector<double> points(int n) const;
    /// Points of R_n inside [lo, hi]; enumerated directly for lattices.
    std::vector<double> points_within(int n, double lo, double hi) const;
    double lower(int n) const;
    double upper(int n) const;
    double mesh(int n) const;

    /// inf R_n non-increasing, sup R_n non-decreasing and mesh non-increasing over
    /// n = 1..count, each strictly better at n = count than at n = 1.
    bool check_trend(int count) const;

private:
    std::function<double(int)> step_;
    Generator generator_;
};

namespace transform {

/// K_alpha(s,t) = exp(-int_s^t alpha); the white-noise kernel for the infinite rate.
Kernel k_alpha(const RateFunction& alpha, const Interval& domain = Interval::real_line());

/// Two-time law at (partition.front(), partition.back()) composed through every partition point.
TransportPlan partition_law(const Kernel& kernel, const Partition& partition);

/// Law on S of the kernel's measure made Markov at the times R.
GaussianVector made_markov_cov(const Kernel& kernel, std::vector<double> R, const std::vector<double>& S);

/// Same law assembled by concatenating block plans split at the points of R;
/// kept as an independent route for cross-checks. Needs invertible block covariances.
GaussianVector made_markov_cov_blocks(const Kernel& kernel, std::vector<double> R, const std::vector<double>& S);

/// K'(s,t) = sqrt(K(s,s) K(t,t)) exp(-int_s^t alpha), keeping the kernel's mean.
Kernel mimic_kernel(const Kernel& kernel, const RateFunction& alpha);

struct ConvergenceRow {
    double key = 0.0;  // mesh or n
    double distance = 0.0;
    double correlation = 0.0;
    double target_correlation = 0.0;
};

/// Rows ordered from coarsest to finest mesh.
std::vector<ConvergenceRow> convergence_experiment(const Kernel& kernel, const Kernel& target, double s, double t,
                                                   const std::vector<Partition>& partitions);

/// One row per n = 1..n_max; correlations are between the first and last query times.
std::vector<ConvergenceRow> global_experiment(const Kernel& kernel, const Kernel& target,
                                              const AdmissibleSequence& adm, const std::vector<double>& S,
                                              int n_max);

/// Last value below tol and no increase over the final three entries.
bool converges_to_zero(const std::vector<ConvergenceRow>& rows, double tol);

struct TightnessReport {
    double M_empirical = 0.0;
    std::vector<double> per_partition;  // in the order given
    double alpha_sup = 0.0;             // sup of alpha on the sample lattice, for reference
    bool pass = false;
};

struct TightnessOptions {
    int sample_points = 9;     // evenly spaced pair lattice on [a,b]
    int adjacent_pairs = 64;   // consecutive partition gaps sampled per partition
    double growth_factor = 1.1;
};

/// sup over sampled pairs of (1 - K_n(s,t)) / |s - t|, K_n the correlation of the
/// kernel made Markov at the partition points.
TightnessReport tightness_bound_check(const Kernel& kernel, const RateFunction& alpha, double a, double b,
                                      const std::vector<Partition>& partitions, const TightnessOptions& opts = {});

}  // namespace transform

}  // namespace gmt
