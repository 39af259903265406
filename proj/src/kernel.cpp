#include "gmt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmt/error.hpp"
#include "gmt/transform.hpp"

namespace gmt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_increasing(const Grid& grid, const char* what) {
    if (grid.empty()) throw InvalidInput(std::string(what) + ": empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw InvalidInput(std::string(what) + ": grid must be strictly increasing");
    }
}

double positive_variance(const Kernel& kernel, double t) {
    const double v = kernel.variance(t);
    if (!(v > 0.0)) throw SingularMarginal("variance " + fmt(v) + " at t = " + fmt(t) + " for " + kernel.name());
    return v;
}

}  // namespace

Kernel::Kernel(Eval eval, Interval domain, std::string name)
    : eval_(std::move(eval)), domain_(domain), name_(std::move(name)) {}

Kernel Kernel::stationary(Profile profile, Interval domain, std::string name) {
    auto p = profile;
    Kernel k([p](double s, double t) { return p(t - s); }, domain, std::move(name));
    k.profile_ = [p](double h) { return p(std::abs(h)); };
    return k;
}

double Kernel::operator()(double s, double t) const {
    require_in_domain(s);
    require_in_domain(t);
    return s <= t ? eval_(s, t) : eval_(t, s);
}

double Kernel::std_dev(double t) const {
    const double v = variance(t);
    if (v < 0.0) throw SingularMarginal("negative variance at t = " + fmt(t));
    return std::sqrt(v);
}

double Kernel::profile(double h) const {
    if (!profile_) throw InvalidInput("kernel " + name_ + " is not stationary");
    return profile_(h);
}

std::optional<double> Kernel::decorrelation(double s, double t) const {
    if (!decorrelation_) return std::nullopt;
    require_in_domain(s);
    require_in_domain(t);
    return s <= t ? decorrelation_(s, t) : decorrelation_(t, s);
}

Kernel Kernel::with_mean(Mean mean) const {
    Kernel k = *this;
    k.mean_ = std::move(mean);
    return k;
}

Kernel Kernel::with_decorrelation(Eval one_minus_corr) const {
    Kernel k = *this;
    k.decorrelation_ = std::move(one_minus_corr);
    return k;
}

Kernel Kernel::with_name(std::string name) const {
    Kernel k = *this;
    k.name_ = std::move(name);
    return k;
}

Kernel Kernel::as_white_noise() const {
    Kernel k = *this;
    k.white_noise_ = true;
    return k;
}

void Kernel::require_in_domain(double t) const {
    if (!domain_.contains(t)) {
        throw InvalidInput("time " + fmt(t) + " outside domain " + domain_.to_string() + " of " + name_);
    }
}

Eigen::MatrixXd Kernel::gram(const Grid& grid) const {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            g(i, j) = (*this)(grid[i], grid[j]);
            g(j, i) = g(i, j);
        }
    }
    return g;
}

Eigen::MatrixXd Kernel::cross_gram(const Grid& rows, const Grid& cols) const {
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) g(i, j) = (*this)(rows[i], cols[j]);
    }
    return g;
}

Eigen::VectorXd Kernel::mean_vector(const Grid& grid) const {
    Eigen::VectorXd m(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require_in_domain(grid[i]);
        m(i) = mean(grid[i]);
    }
    return m;
}

PsdReport psd_check(const Kernel& kernel, const Grid& grid) {
    require_increasing(grid, "psd_check");
    const Eigen::MatrixXd g = kernel.gram(grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw InvalidInput("psd_check: eigensolver failed");
    PsdReport r;
    r.min_eigenvalue = solver.eigenvalues().minCoeff();
    r.max_diagonal = g.diagonal().maxCoeff();
    r.pass = r.min_eigenvalue >= -kPsdTolerance * r.max_diagonal;
    return r;
}

double correlation(const Kernel& kernel, double s, double t) {
    const double vs = positive_variance(kernel, s);
    const double vt = positive_variance(kernel, t);
    if (s == t) return 1.0;
    return kernel(s, t) / std::sqrt(vs * vt);
}

double decay_rate(const Kernel& kernel, double t, double h) {
    if (!(h > 0.0)) throw InvalidInput("decay_rate: h must be positive");
    positive_variance(kernel, t);
    positive_variance(kernel, t + h);
    if (auto d = kernel.decorrelation(t, t + h)) return *d / h;
    return (1.0 - correlation(kernel, t, t + h)) / h;
}

std::vector<double> geometric_h_sequence(double h_max, double h_min, double ratio) {
    if (!(h_max > 0.0) || !(h_min > 0.0) || h_min > h_max || !(ratio > 1.0)) {
        throw InvalidInput("geometric_h_sequence: need 0 < h_min <= h_max and ratio > 1");
    }
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double h = h_max / std::pow(ratio, k);
        if (h < h_min * (1.0 - 1e-12)) break;
        out.push_back(h);
    }
    return out;
}

AlphaEstimate estimate_alpha(const Kernel& kernel, double t, const std::vector<double>& h_sequence,
                             const AlphaOptions& opts) {
    if (h_sequence.empty()) throw InvalidInput("estimate_alpha: empty h sequence");
    for (std::size_t i = 0; i < h_sequence.size(); ++i) {
        if (!(h_sequence[i] >= opts.h_min)) throw InvalidInput("estimate_alpha: h below the configured floor");
        if (i > 0 && !(h_sequence[i] < h_sequence[i - 1])) {
            throw InvalidInput("estimate_alpha: h sequence must be strictly decreasing");
        }
    }
    AlphaEstimate out;
    for (double h : h_sequence) out.rates.push_back(decay_rate(kernel, t, h));

    const auto& r = out.rates;
    const std::size_t n = r.size();
    const std::size_t tail = std::min<std::size_t>(3, n);
    bool increasing = tail >= 2;
    for (std::size_t i = n - tail + 1; i < n; ++i) increasing = increasing && r[i] > r[i - 1];

    bool diverging = increasing && r.back() > opts.divergence_threshold;
    if (!diverging && increasing && tail == 3 && r[n - 3] > 0.0) {
        bool power_law = true;
        for (std::size_t i = n - 2; i < n; ++i) {
            const double slope = std::log(r[i] / r[i - 1]) / std::log(h_sequence[i] / h_sequence[i - 1]);
            power_law = power_law && slope <= opts.divergence_slope;
        }
        diverging = power_law;
    }
    if (diverging) {
        out.infinite = true;
        out.estimate = kInf;
        out.converged = true;
        return out;
    }
    out.estimate = r.back();
    if (n >= 3) {
        const double scale = opts.rel_tol * std::max(std::abs(r.back()), 1e-12);
        out.converged = std::abs(r[n - 2] - r.back()) <= scale && std::abs(r[n - 3] - r.back()) <= scale;
    }
    return out;
}

double uniform_convergence_diagnostic(const Kernel& kernel, const RateFunction& alpha, double s, double t,
                                      double h_star, int grid_density) {
    if (!(s < t)) throw InvalidInput("uniform_convergence_diagnostic: need s < t");
    if (grid_density < 2) throw InvalidInput("uniform_convergence_diagnostic: grid_density must be at least 2");
    if (!(h_star > 0.0)) throw InvalidInput("uniform_convergence_diagnostic: h_star must be positive");
    if (alpha.is_infinite()) throw UnsupportedDiagnostic("uniform convergence is defined for finite rates only");
    double worst = 0.0;
    for (int i = 0; i < grid_density; ++i) {
        const double v = (i + 1 == grid_density) ? t : s + (t - s) * i / (grid_density - 1);
        const double a = alpha(v);
        for (int j = 1; j <= grid_density; ++j) {
            const double h = h_star * j / grid_density;
            if (!kernel.domain().contains(v + h)) continue;
            worst = std::max(worst, std::abs(decay_rate(kernel, v, h) - a));
        }
    }
    return worst;
}

Kernel transform_kernel(const Kernel& kernel, const TimeFunction& scale, const TimeFunction& time_change,
                        const Interval& new_domain) {
    // Probe the new domain: finite endpoints (nudged inward when open) and interior points.
    std::vector<double> probes;
    const double lo = new_domain.lo;
    const double hi = new_domain.hi;
    if (new_domain.is_bounded()) {
        const double eps = 1e-9 * (hi - lo);
        probes.push_back(new_domain.lo_open ? lo + eps : lo);
        probes.push_back(new_domain.hi_open ? hi - eps : hi);
        for (int i = 1; i < 16; ++i) probes.push_back(lo + (hi - lo) * i / 16.0);
    } else {
        const double anchor = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
        const double dir = std::isfinite(lo) ? 1.0 : (std::isfinite(hi) ? -1.0 : 0.0);
        for (double step : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
            if (dir != 0.0) {
                probes.push_back(anchor + dir * step);
            } else {
                probes.push_back(-step);
                probes.push_back(step);
            }
        }
        if (dir == 0.0) probes.push_back(0.0);
    }
    std::sort(probes.begin(), probes.end());
    double prev = -kInf;
    for (double p : probes) {
        if (!new_domain.contains(p)) continue;
        const double phi = time_change(p);
        if (!kernel.domain().contains(phi)) {
            throw InvalidInput("transform_kernel: time change maps " + fmt(p) + " to " + fmt(phi) +
                               ", outside the kernel domain " + kernel.domain().to_string());
        }
        if (!(phi > prev)) throw InvalidInput("transform_kernel: time change is not strictly increasing");
        prev = phi;
        if (scale(p) == 0.0) throw InvalidInput("transform_kernel: scale vanishes at " + fmt(p));
    }

    const std::string name = "transformed(" + kernel.name() + ", " + scale.description() + ", " +
                             time_change.description() + ")";
    const auto& c = scale.constant_value();
    const auto& aff = time_change.affine_coefficients();
    Kernel out = [&] {
        if (kernel.is_stationary() && c && aff && aff->first > 0.0) {
            const double c2 = (*c) * (*c);
            const double slope = aff->first;
            return Kernel::stationary([kernel, c2, slope](double h) { return c2 * kernel.profile(slope * h); },
                                      new_domain, name);
        }
        return Kernel(
            [kernel, scale, time_change](double s, double t) {
                return scale(s) * scale(t) * kernel(time_change(s), time_change(t));
            },
            new_domain, name);
    }();
    if (kernel.has_mean()) {
        out = out.with_mean([kernel, scale, time_change](double t) { return scale(t) * kernel.mean(time_change(t)); });
    }
    if (kernel.has_decorrelation()) {
        out = out.with_decorrelation([kernel, scale, time_change](double s, double t) {
            const double base = *kernel.decorrelation(time_change(s), time_change(t));
            return scale(s) * scale(t) > 0.0 ? base : 2.0 - base;
        });
    }
    if (kernel.is_white_noise()) out = out.as_white_noise();
    return out;
}

namespace kernels {

namespace {

void require_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidInput("Hurst parameter must lie in (0, 1), got " + fmt(hurst));
}

}  // namespace

Kernel fbm(double hurst) {
    require_hurst(hurst);
    const double e = 2.0 * hurst;
    return Kernel(
        [e](double s, double t) {
            return 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
        },
        Interval::positive(), "fbm(" + fmt(hurst) + ")");
}

Kernel fbm_log(double hurst) {
    require_hurst(hurst);
    const double e = 2.0 * hurst;
    Kernel k = Kernel::stationary(
        [hurst, e](double x) { return std::cosh(2.0 * hurst * x) - 0.5 * std::pow(std::abs(2.0 * std::sinh(x)), e); },
        Interval::real_line(), "fbm_log(" + fmt(hurst) + ")");
    return k.with_decorrelation([hurst, e](double s, double t) {
        const double h = t - s;
        const double sh = std::sinh(hurst * h);
        return 0.5 * std::pow(std::abs(2.0 * std::sinh(h)), e) - 2.0 * sh * sh;
    });
}

RateFunction fbm_log_rate(double hurst) {
    require_hurst(hurst);
    if (hurst < 0.5) return RateFunction::infinite();
    return RateFunction::constant(hurst == 0.5 ? 1.0 : 0.0);
}

RateFunction fbm_rate(double hurst) {
    require_hurst(hurst);
    if (hurst < 0.5) return RateFunction::infinite();
    if (hurst > 0.5) return RateFunction::constant(0.0);
    return RateFunction::with_integral([](double t) { return 0.5 / t; },
                                       [](double lo, double hi) {
                                           if (!(lo > 0.0)) throw InvalidRate("fbm rate integrated through t <= 0");
                                           return 0.5 * std::log1p((hi - lo) / lo);
                                       },
                                       "1/(2t)");
}

Kernel exponential_rate(const RateFunction& alpha, const Interval& domain) {
    return transform::k_alpha(alpha, domain);
}

Kernel constant(double value, const Interval& domain) {
    Kernel k = Kernel::stationary([value](double) { return value; }, domain, "constant(" + fmt(value) + ")");
    return k.with_decorrelation([](double, double) { return 0.0; });
}

Kernel white_noise(const Interval& domain) {
    Kernel k = Kernel::stationary([](double h) { return h == 0.0 ? 1.0 : 0.0; }, domain, "white_noise");
    return k.with_decorrelation([](double s, double t) { return s == t ? 0.0 : 1.0; }).as_white_noise();
}

Kernel noise_integral(std::function<double(double, double)> k, const Interval& J, const Interval& domain,
                      const quad::Options& opts) {
    if (!(J.lo < J.hi)) throw InvalidInput("noise_integral: empty integration interval");
    return Kernel(
        [k, J, opts](double s, double t) {
            return quad::integrate([&](double u) { return k(s, u) * k(t, u); }, J.lo, J.hi, opts);
        },
        domain, "noise_integral");
}

Kernel combination(const std::vector<std::pair<double, Kernel>>& terms) {
    if (terms.empty()) throw InvalidInput("combination: no terms");
    Interval dom = terms.front().second.domain();
    bool stationary = true;
    std::string name = "combination(";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const Interval& d = terms[i].second.domain();
        if (d.lo > dom.lo || (d.lo == dom.lo && d.lo_open)) {
            dom.lo = d.lo;
            dom.lo_open = d.lo_open;
        }
        if (d.hi < dom.hi || (d.hi == dom.hi && d.hi_open)) {
            dom.hi = d.hi;
            dom.hi_open = d.hi_open;
        }
        stationary = stationary && terms[i].second.is_stationary();
        name += (i ? ", " : "") + fmt(terms[i].first) + "*" + terms[i].second.name();
    }
    name += ")";
    if (!(dom.lo < dom.hi)) throw InvalidInput("combination: kernel domains do not overlap");
    if (stationary) {
        return Kernel::stationary(
            [terms](double h) {
                double sum = 0.0;
                for (const auto& [w, k] : terms) sum += w * k.profile(h);
                return sum;
            },
            dom, name);
    }
    return Kernel(
        [terms](double s, double t) {
            double sum = 0.0;
            for (const auto& [w, k] : terms) sum += w * k(s, t);
            return sum;
        },
        dom, name);
}

}  // namespace kernels

}  // namespace gmt
