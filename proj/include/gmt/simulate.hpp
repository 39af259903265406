#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmt/gauss.hpp"
#include "gmt/kernel.hpp"
#include "gmt/rate.hpp"

namespace gmt {

enum class BatchSource { Sampler, Sde };

std::string to_string(BatchSource source);

/// Paths stored row-wise: paths(p, j) is path p at times[j].
struct TrajectoryBatch {
    Grid times;
    Eigen::MatrixXd paths;
    std::uint64_t seed = 0;
    BatchSource source = BatchSource::Sampler;
};

struct SdeSpec {
    std::function<double(double, double)> drift;
    std::function<double(double, double)> diffusion;
    double initial_mean = 0.0;
    double initial_variance = 1.0;
    double step = 1e-3;
};

/// Stream identifiers keep samplers that share a seed independent.
enum class Stream : std::uint64_t { Cholesky = 1, EulerMaruyama = 2, OuExact = 3 };

/// mean + L g with L a Cholesky factor; the diagonal jitter ladder
/// 1e-12, 1e-10, 1e-8 (times the largest variance) handles rank-deficient laws.
TrajectoryBatch cholesky_sample(const GaussianVector& law, long n_paths, std::uint64_t seed);

/// Fixed-step scheme; each gap is split into ceil(gap / step) equal substeps.
TrajectoryBatch euler_maruyama(const SdeSpec& spec, const Grid& grid, long n_paths, std::uint64_t seed);

/// Exact transitions of the unit-variance Markov law with kernel K_alpha.
TrajectoryBatch ou_exact(const RateFunction& alpha, const Grid& grid, long n_paths, std::uint64_t seed);

struct EmpiricalCovariance {
    GaussianVector estimate;
    Eigen::VectorXd mean_se;
    /// sd of the centred products over sqrt(n).
    Eigen::MatrixXd cov_se;
    long n_paths = 0;
};

EmpiricalCovariance empirical_covariance(const TrajectoryBatch& batch);

/// dZ = [m' + (sigma'/sigma - alpha)(Z - m)] dt + sigma sqrt(2 alpha) dB with
/// Z_{t0} ~ N(m(t0), sigma(t0)^2); m' and sigma' by central differences.
SdeSpec mimicking_sde(const Kernel& kernel, const RateFunction& alpha, double t0, double step,
                      double fd_step = 1e-6);

/// dZ = (offset(t) + slope(t) Z) dt + noise(t) dB.
struct AffineSde {
    std::function<double(double)> offset;
    std::function<double(double)> slope;
    std::function<double(double)> noise;
    double initial_mean = 0.0;
    double initial_variance = 1.0;
    double step = 1e-3;
};

/// Exact law on the grid of the Euler-Maruyama chain for an affine SDE, with the same substeps.
GaussianVector euler_maruyama_law(const AffineSde& sde, const Grid& grid);

enum class GaussianRoute { OuExact, Cholesky };

struct FigureOptions {
    double step = 1e-3;
    double fd_step = 1e-6;
    GaussianRoute route = GaussianRoute::OuExact;
    double se_multiplier = 3.0;
    double step_multiplier = 2.0;
};

struct FigureReport {
    EmpiricalCovariance sde;
    EmpiricalCovariance gaussian;
    Eigen::MatrixXd analytic;
    double max_cov_discrepancy = 0.0;
    double max_sde_vs_analytic = 0.0;
    double max_gaussian_vs_analytic = 0.0;
    /// Entrywise excess over the allowed band; positive means a breach.
    double worst_pair_excess = 0.0;
    double worst_sde_excess = 0.0;
    double worst_gaussian_excess = 0.0;
    bool pass = false;
    TrajectoryBatch sde_batch;
    TrajectoryBatch gaussian_batch;
};

/// Simulates the mimicking SDE and the Gaussian law with kernel mimic_kernel(kernel, alpha),
/// and compares both empirical covariances with each other and with the analytic one.
FigureReport figure_comparison(const Kernel& kernel, const RateFunction& alpha, const Grid& grid, long n_paths,
                               std::uint64_t seed, const FigureOptions& opts = {});

}  // namespace gmt
