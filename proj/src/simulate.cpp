#include "gmt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmt/error.hpp"
#include "gmt/rng.hpp"
#include "gmt/transform.hpp"

namespace gmt {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_grid(const Grid& grid) {
    if (grid.empty()) throw InvalidInput("empty time grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw InvalidInput("time grid must be strictly increasing");
    }
}

void require_paths(long n_paths) {
    if (n_paths < 1) throw InvalidInput("need at least one path");
}

Philox path_stream(std::uint64_t seed, Stream stream, long path) {
    return Philox(seed, (static_cast<std::uint64_t>(stream) << 48) | static_cast<std::uint64_t>(path));
}

long substeps(double gap, double step) { return std::max(1L, static_cast<long>(std::ceil(gap / step - 1e-9))); }

double derivative(const std::function<double(double)>& f, const Interval& dom, double t, double h) {
    const bool left = dom.contains(t - h);
    const bool right = dom.contains(t + h);
    if (left && right) return (f(t + h) - f(t - h)) / (2.0 * h);
    if (right) return (f(t + h) - f(t)) / h;
    if (left) return (f(t) - f(t - h)) / h;
    throw InvalidInput("finite-difference step leaves the kernel domain at t = " + fmt(t));
}

}  // namespace

std::string to_string(BatchSource source) { return source == BatchSource::Sampler ? "sampler" : "sde"; }

TrajectoryBatch cholesky_sample(const GaussianVector& law, long n_paths, std::uint64_t seed) {
    // Shape and time checks only; definiteness is left to the jitter ladder.
    GaussianVector shape{law.times, law.mean, MatrixXd::Identity(law.dim(), law.dim())};
    if (law.cov.rows() != law.dim() || law.cov.cols() != law.dim()) {
        throw InvalidInput("covariance shape does not match the mean");
    }
    shape.validate();
    require_paths(n_paths);
    const Index n = law.dim();
    const double scale = n > 0 ? std::max(law.cov.diagonal().maxCoeff(), 0.0) : 0.0;
    Eigen::LLT<MatrixXd> llt;
    bool ok = false;
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        MatrixXd c = law.cov;
        c.diagonal().array() += jitter * scale;
        llt.compute(c);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok) throw NotPsd("Cholesky factorization failed after the largest jitter");
    const MatrixXd L = llt.matrixL();

    TrajectoryBatch out{law.times, MatrixXd(n_paths, n), seed, BatchSource::Sampler};
    VectorXd g(n);
    for (long p = 0; p < n_paths; ++p) {
        Philox rng = path_stream(seed, Stream::Cholesky, p);
        for (Index j = 0; j < n; ++j) g(j) = rng.normal();
        out.paths.row(p) = (law.mean + L * g).transpose();
    }
    return out;
}

TrajectoryBatch euler_maruyama(const SdeSpec& spec, const Grid& grid, long n_paths, std::uint64_t seed) {
    require_grid(grid);
    require_paths(n_paths);
    if (!(spec.step > 0.0)) throw InvalidSde("step must be positive");
    if (!(spec.initial_variance >= 0.0)) throw InvalidSde("initial variance must be non-negative");
    const auto n = static_cast<Index>(grid.size());
    std::vector<long> subs(grid.size(), 0);
    std::vector<double> dts(grid.size(), 0.0);
    for (std::size_t j = 1; j < grid.size(); ++j) {
        subs[j] = substeps(grid[j] - grid[j - 1], spec.step);
        dts[j] = (grid[j] - grid[j - 1]) / static_cast<double>(subs[j]);
    }
    const double sd0 = std::sqrt(spec.initial_variance);

    TrajectoryBatch out{grid, MatrixXd(n_paths, n), seed, BatchSource::Sde};
    for (long p = 0; p < n_paths; ++p) {
        Philox rng = path_stream(seed, Stream::EulerMaruyama, p);
        double x = spec.initial_mean + sd0 * rng.normal();
        out.paths(p, 0) = x;
        for (Index j = 1; j < n; ++j) {
            const double dt = dts[j];
            const double sq = std::sqrt(dt);
            for (long k = 0; k < subs[j]; ++k) {
                const double t = grid[j - 1] + static_cast<double>(k) * dt;
                const double sigma = spec.diffusion(t, x);
                if (!(sigma >= 0.0)) {
                    throw InvalidSde("negative diffusion " + fmt(sigma) + " at (t, x) = (" + fmt(t) + ", " + fmt(x) + ")");
                }
                x += spec.drift(t, x) * dt + sigma * sq * rng.normal();
            }
            out.paths(p, j) = x;
        }
    }
    return out;
}

TrajectoryBatch ou_exact(const RateFunction& alpha, const Grid& grid, long n_paths, std::uint64_t seed) {
    require_grid(grid);
    require_paths(n_paths);
    const auto n = static_cast<Index>(grid.size());
    std::vector<double> rho(grid.size(), 0.0);
    std::vector<double> innov(grid.size(), 1.0);
    if (!alpha.is_infinite()) {
        for (std::size_t j = 1; j < grid.size(); ++j) {
            const double I = alpha.integral(grid[j - 1], grid[j]);
            rho[j] = std::exp(-I);
            innov[j] = std::sqrt(-std::expm1(-2.0 * I));
        }
    }
    TrajectoryBatch out{grid, MatrixXd(n_paths, n), seed, BatchSource::Sampler};
    for (long p = 0; p < n_paths; ++p) {
        Philox rng = path_stream(seed, Stream::OuExact, p);
        double x = rng.normal();
        out.paths(p, 0) = x;
        for (Index j = 1; j < n; ++j) {
            x = rho[j] * x + innov[j] * rng.normal();
            out.paths(p, j) = x;
        }
    }
    return out;
}

EmpiricalCovariance empirical_covariance(const TrajectoryBatch& batch) {
    const long n = batch.paths.rows();
    const Index d = batch.paths.cols();
    if (n < 2) throw InvalidInput("empirical covariance needs at least two paths");
    EmpiricalCovariance out;
    out.n_paths = n;
    out.estimate.times = batch.times;
    out.estimate.mean = batch.paths.colwise().mean().transpose();
    const MatrixXd centred = batch.paths.rowwise() - out.estimate.mean.transpose();
    out.estimate.cov = centred.transpose() * centred / static_cast<double>(n - 1);
    out.mean_se = (out.estimate.cov.diagonal() / static_cast<double>(n)).cwiseSqrt();
    out.cov_se.resize(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = i; j < d; ++j) {
            const VectorXd prod = centred.col(i).cwiseProduct(centred.col(j));
            const double m = prod.mean();
            const double var = (prod.array() - m).square().sum() / static_cast<double>(n - 1);
            out.cov_se(i, j) = std::sqrt(var / static_cast<double>(n));
            out.cov_se(j, i) = out.cov_se(i, j);
        }
    }
    return out;
}

SdeSpec mimicking_sde(const Kernel& kernel, const RateFunction& alpha, double t0, double step, double fd_step) {
    if (alpha.is_infinite()) throw InvalidRate("the mimicking SDE needs a finite rate");
    SdeSpec spec;
    spec.step = step;
    spec.initial_mean = kernel.mean(t0);
    spec.initial_variance = kernel.variance(t0);
    if (!(spec.initial_variance > 0.0)) throw SingularMarginal("zero variance at the initial time");

    if (!kernel.has_mean() && kernel.is_stationary()) {
        // Constant marginals: m' = sigma' = 0.
        const double sigma = std::sqrt(kernel.profile(0.0));
        if (const auto& c = alpha.constant_value()) {
            const double a = *c;
            const double diff = sigma * std::sqrt(2.0 * a);
            spec.drift = [a](double, double x) { return -a * x; };
            spec.diffusion = [diff](double, double) { return diff; };
        } else {
            spec.drift = [alpha](double t, double x) { return -alpha(t) * x; };
            spec.diffusion = [alpha, sigma](double t, double) { return sigma * std::sqrt(2.0 * alpha(t)); };
        }
        return spec;
    }
    const Interval dom = kernel.domain();
    std::function<double(double)> m = [kernel](double t) { return kernel.mean(t); };
    std::function<double(double)> sd = [kernel](double t) { return kernel.std_dev(t); };
    spec.drift = [=](double t, double x) {
        const double s = sd(t);
        const double dm = derivative(m, dom, t, fd_step);
        const double ds = derivative(sd, dom, t, fd_step);
        return dm + (ds / s - alpha(t)) * (x - m(t));
    };
    spec.diffusion = [=](double t, double) { return sd(t) * std::sqrt(2.0 * alpha(t)); };
    return spec;
}

GaussianVector euler_maruyama_law(const AffineSde& sde, const Grid& grid) {
    require_grid(grid);
    if (!(sde.step > 0.0)) throw InvalidSde("step must be positive");
    const auto n = static_cast<Index>(grid.size());
    GaussianVector out{grid, VectorXd(n), MatrixXd(n, n)};
    double mu = sde.initial_mean;
    double var = sde.initial_variance;
    VectorXd cross = VectorXd::Zero(n);  // Cov(X_{grid_j}, current state) for recorded j
    out.mean(0) = mu;
    out.cov(0, 0) = var;
    cross(0) = var;
    for (Index j = 1; j < n; ++j) {
        const long subs = substeps(grid[j] - grid[j - 1], sde.step);
        const double dt = (grid[j] - grid[j - 1]) / static_cast<double>(subs);
        for (long k = 0; k < subs; ++k) {
            const double t = grid[j - 1] + static_cast<double>(k) * dt;
            const double a = 1.0 + sde.slope(t) * dt;
            const double q = sde.noise(t);
            mu = a * mu + sde.offset(t) * dt;
            var = a * a * var + q * q * dt;
            cross.head(j) *= a;
        }
        out.mean(j) = mu;
        cross(j) = var;
        for (Index i = 0; i <= j; ++i) {
            out.cov(i, j) = cross(i);
            out.cov(j, i) = cross(i);
        }
    }
    return out;
}

FigureReport figure_comparison(const Kernel& kernel, const RateFunction& alpha, const Grid& grid, long n_paths,
                               std::uint64_t seed, const FigureOptions& opts) {
    require_grid(grid);
    const Kernel mimic = transform::mimic_kernel(kernel, alpha);
    FigureReport r;
    r.analytic = mimic.gram(grid);

    r.sde_batch = euler_maruyama(mimicking_sde(kernel, alpha, grid.front(), opts.step, opts.fd_step), grid, n_paths, seed);
    if (opts.route == GaussianRoute::OuExact) {
        r.gaussian_batch = ou_exact(alpha, grid, n_paths, seed);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double m = kernel.mean(grid[j]);
            const double s = kernel.std_dev(grid[j]);
            r.gaussian_batch.paths.col(static_cast<Index>(j)) =
                (r.gaussian_batch.paths.col(static_cast<Index>(j)).array() * s + m).matrix();
        }
    } else {
        r.gaussian_batch = cholesky_sample(GaussianVector::from_kernel(mimic, grid), n_paths, seed);
    }
    r.sde = empirical_covariance(r.sde_batch);
    r.gaussian = empirical_covariance(r.gaussian_batch);

    const double slack = opts.step_multiplier * opts.step;
    r.worst_pair_excess = -kInf;
    r.worst_sde_excess = -kInf;
    r.worst_gaussian_excess = -kInf;
    const Index n = r.analytic.rows();
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            const double se_sde = r.sde.cov_se(i, j);
            const double se_g = r.gaussian.cov_se(i, j);
            const double pair = std::abs(r.sde.estimate.cov(i, j) - r.gaussian.estimate.cov(i, j));
            const double sde_err = std::abs(r.sde.estimate.cov(i, j) - r.analytic(i, j));
            const double g_err = std::abs(r.gaussian.estimate.cov(i, j) - r.analytic(i, j));
            r.max_cov_discrepancy = std::max(r.max_cov_discrepancy, pair);
            r.max_sde_vs_analytic = std::max(r.max_sde_vs_analytic, sde_err);
            r.max_gaussian_vs_analytic = std::max(r.max_gaussian_vs_analytic, g_err);
            r.worst_pair_excess = std::max(
                r.worst_pair_excess, pair - (opts.se_multiplier * std::hypot(se_sde, se_g) + slack));
            r.worst_sde_excess = std::max(r.worst_sde_excess, sde_err - (opts.se_multiplier * se_sde + slack));
            r.worst_gaussian_excess = std::max(r.worst_gaussian_excess, g_err - (opts.se_multiplier * se_g + slack));
        }
    }
    r.pass = r.worst_pair_excess <= 0.0 && r.worst_sde_excess <= 0.0 && r.worst_gaussian_excess <= 0.0;
    return r;
}

}  // namespace gmt
