#include "gmt/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmt/error.hpp"

namespace gmt {

using Eigen::Index;

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_increasing(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) throw InvalidInput(std::string(what) + " must be strictly increasing");
    }
}

std::vector<double> sorted_unique(std::vector<double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidInput("time sets must be finite");
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Points of R strictly between lo and hi.
std::vector<double> strictly_inside(const std::vector<double>& R, double lo, double hi) {
    auto first = std::upper_bound(R.begin(), R.end(), lo);
    auto last = std::lower_bound(R.begin(), R.end(), hi);
    return first < last ? std::vector<double>(first, last) : std::vector<double>{};
}

constexpr long long kMaxLatticePoints = 50'000'000;

}  // namespace

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidInput("a partition needs at least two points");
    require_increasing(points_, "partition points");
}

Partition Partition::uniform(double s, double t, long long intervals) {
    if (!(s < t) || intervals < 1) throw InvalidInput("uniform partition needs s < t and at least one interval");
    std::vector<double> p(static_cast<std::size_t>(intervals) + 1);
    for (long long i = 0; i < intervals; ++i) p[i] = s + (t - s) * static_cast<double>(i) / static_cast<double>(intervals);
    p.back() = t;
    return Partition(std::move(p));
}

Partition Partition::with_mesh(double s, double t, double mesh) {
    if (!(mesh > 0.0)) throw InvalidInput("mesh must be positive");
    return uniform(s, t, static_cast<long long>(std::ceil((t - s) / mesh - 1e-9)));
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
    return m;
}

AdmissibleSequence AdmissibleSequence::lattice(std::function<double(int)> step) {
    AdmissibleSequence a;
    a.step_ = std::move(step);
    return a;
}

AdmissibleSequence AdmissibleSequence::custom(Generator generator) {
    AdmissibleSequence a;
    a.generator_ = std::move(generator);
    return a;
}

std::vector<double> AdmissibleSequence::points(int n) const {
    return points_within(n, -static_cast<double>(n), static_cast<double>(n));
}

std::vector<double> AdmissibleSequence::points_within(int n, double lo, double hi) const {
    if (n < 1) throw InvalidInput("admissible sequences are indexed from n = 1");
    if (!step_) {
        std::vector<double> all = sorted_unique(generator_(n));
        std::vector<double> out;
        for (double x : all) {
            if (x >= lo && x <= hi) out.push_back(x);
        }
        return out;
    }
    const double s = step_(n);
    if (!(s > 0.0)) throw InvalidInput("lattice step must be positive");
    const double a = std::max(lo, -static_cast<double>(n));
    const double b = std::min(hi, static_cast<double>(n));
    if (a > b) return {};
    const auto k_lo = static_cast<long long>(std::ceil(a / s - 1e-12));
    const auto k_hi = static_cast<long long>(std::floor(b / s + 1e-12));
    if (k_hi - k_lo + 1 > kMaxLatticePoints) throw BudgetExceeded("lattice has too many points in the window");
    std::vector<double> out;
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double x = static_cast<double>(k) * s;
        if (x >= a && x <= b) out.push_back(x);
    }
    return out;
}

double AdmissibleSequence::lower(int n) const {
    if (step_) return std::ceil(-n / step_(n) - 1e-12) * step_(n);
    const auto p = sorted_unique(generator_(n));
    if (p.empty()) throw InvalidInput("empty time set");
    return p.front();
}

double AdmissibleSequence::upper(int n) const {
    if (step_) return std::floor(n / step_(n) + 1e-12) * step_(n);
    const auto p = sorted_unique(generator_(n));
    if (p.empty()) throw InvalidInput("empty time set");
    return p.back();
}

double AdmissibleSequence::mesh(int n) const {
    if (step_) return step_(n);
    const auto p = sorted_unique(generator_(n));
    double m = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) m = std::max(m, p[i] - p[i - 1]);
    return m;
}

bool AdmissibleSequence::check_trend(int count) const {
    for (int n = 2; n <= count; ++n) {
        if (lower(n) > lower(n - 1) || upper(n) < upper(n - 1) || mesh(n) > mesh(n - 1)) return false;
    }
    // Stalled sequences fail: some progress is required over the window.
    return count < 2 || (lower(count) < lower(1) && upper(count) > upper(1) && mesh(count) < mesh(1));
}

namespace transform {

Kernel k_alpha(const RateFunction& alpha, const Interval& domain) {
    if (alpha.is_infinite()) return kernels::white_noise(domain).with_name("k_alpha(infinite)");
    const std::string name = "k_alpha(" + alpha.description() + ")";
    if (const auto& c = alpha.constant_value()) {
        const double a = *c;
        Kernel k = Kernel::stationary([a](double h) { return std::exp(-a * std::abs(h)); }, domain, name);
        return k.with_decorrelation([a](double s, double t) { return -std::expm1(-a * (t - s)); });
    }
    Kernel k([alpha](double s, double t) { return std::exp(-alpha.integral(s, t)); }, domain, name);
    return k.with_decorrelation([alpha](double s, double t) { return -std::expm1(-alpha.integral(s, t)); });
}

TransportPlan partition_law(const Kernel& kernel, const Partition& partition) {
    const auto& p = partition.points();
    std::vector<TransportPlan> plans;
    plans.reserve(p.size() - 1);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) plans.push_back(TransportPlan::from_kernel(kernel, p[i], p[i + 1]));
    return compose(plans);
}

GaussianVector made_markov_cov(const Kernel& kernel, std::vector<double> R, const std::vector<double>& S) {
    if (S.empty()) throw InvalidInput("made_markov_cov: empty query set");
    require_increasing(S, "query times");
    R = strictly_inside(sorted_unique(std::move(R)), S.front(), S.back());

    const auto n = static_cast<Index>(S.size());
    GaussianVector out{S, kernel.mean_vector(S), Eigen::MatrixXd(n, n)};
    std::vector<double> r_var(R.size());
    for (std::size_t k = 0; k < R.size(); ++k) {
        r_var[k] = kernel.variance(R[k]);
        if (!(r_var[k] > 0.0)) throw SingularMarginal("made_markov_cov: zero variance at r = " + fmt(R[k]));
    }
    for (Index a = 0; a < n; ++a) {
        out.cov(a, a) = kernel.variance(S[a]);
        // Walk forward merging S and R; acc = Cov(X_{S[a]}, X_r) / K(r, r) at the last r passed.
        auto rk = std::upper_bound(R.begin(), R.end(), S[a]) - R.begin();
        const auto r_end = static_cast<std::ptrdiff_t>(R.size());
        std::ptrdiff_t last = -1;
        double acc = 0.0;
        auto cov_to = [&](double p) { return last < 0 ? kernel(S[a], p) : acc * kernel(R[last], p); };
        for (Index b = a + 1; b < n; ++b) {
            while (rk < r_end && R[rk] < S[b]) {
                acc = cov_to(R[rk]) / r_var[rk];
                last = rk;
                ++rk;
            }
            out.cov(a, b) = cov_to(S[b]);
            out.cov(b, a) = out.cov(a, b);
        }
    }
    return out;
}

GaussianVector made_markov_cov_blocks(const Kernel& kernel, std::vector<double> R, const std::vector<double>& S) {
    if (S.empty()) throw InvalidInput("made_markov_cov_blocks: empty query set");
    require_increasing(S, "query times");
    R = strictly_inside(sorted_unique(std::move(R)), S.front(), S.back());
    if (R.empty()) return GaussianVector::from_kernel(kernel, S);

    // G_0 = S before r_1; G_j = {r_j} and the S points strictly between r_j and r_{j+1}.
    std::vector<std::vector<double>> groups(R.size() + 1);
    std::size_t s_at = 0;
    while (s_at < S.size() && S[s_at] < R.front()) groups[0].push_back(S[s_at++]);
    for (std::size_t j = 0; j < R.size(); ++j) {
        groups[j + 1].push_back(R[j]);
        if (s_at < S.size() && S[s_at] == R[j]) ++s_at;
        const double stop = j + 1 < R.size() ? R[j + 1] : kInf;
        while (s_at < S.size() && S[s_at] < stop) groups[j + 1].push_back(S[s_at++]);
    }

    std::vector<TransportPlan> plans;
    for (std::size_t j = 0; j + 1 < groups.size(); ++j) {
        const auto& g0 = groups[j];
        const auto& g1 = groups[j + 1];
        const double sep = g1.front();
        const double sep_var = kernel.variance(sep);
        if (!(sep_var > 0.0)) throw SingularMarginal("made_markov_cov_blocks: zero variance at r = " + fmt(sep));
        const auto l = static_cast<Index>(g0.size());
        const auto r = static_cast<Index>(g1.size());
        std::vector<double> both = g0;
        both.insert(both.end(), g1.begin(), g1.end());
        GaussianVector joint{both, kernel.mean_vector(both), Eigen::MatrixXd::Zero(l + r, r + l)};
        joint.cov.topLeftCorner(l, l) = kernel.gram(g0);
        joint.cov.bottomRightCorner(r, r) = kernel.gram(g1);
        const Eigen::MatrixXd cross = kernel.cross_gram(g0, {sep}) * kernel.cross_gram({sep}, g1) / sep_var;
        joint.cov.topRightCorner(l, r) = cross;
        joint.cov.bottomLeftCorner(r, l) = cross.transpose();
        plans.emplace_back(l, r, std::move(joint));
    }
    const GaussianVector all = concatenate(plans);
    std::vector<Index> keep;
    for (double s : S) {
        keep.push_back(std::lower_bound(all.times.begin(), all.times.end(), s) - all.times.begin());
    }
    return all.project(keep);
}

Kernel mimic_kernel(const Kernel& kernel, const RateFunction& alpha) {
    auto sd = [kernel](double t) {
        const double v = kernel.variance(t);
        if (!(v > 0.0)) throw SingularMarginal("mimic_kernel: variance " + fmt(v) + " at t = " + fmt(t));
        return std::sqrt(v);
    };
    const std::string name = "mimic(" + kernel.name() + ", " + alpha.description() + ")";
    Kernel out = [&] {
        if (alpha.is_infinite()) {
            Kernel k([kernel](double s, double t) { return s == t ? kernel.variance(t) : 0.0; }, kernel.domain(), name);
            return k.with_decorrelation([](double s, double t) { return s == t ? 0.0 : 1.0; });
        }
        if (kernel.is_stationary() && alpha.constant_value()) {
            const double v = kernel.profile(0.0);
            const double a = *alpha.constant_value();
            if (!(v > 0.0)) throw SingularMarginal("mimic_kernel: non-positive stationary variance");
            Kernel k = Kernel::stationary([v, a](double h) { return h == 0.0 ? v : v * std::exp(-a * std::abs(h)); },
                                          kernel.domain(), name);
            return k.with_decorrelation([a](double s, double t) { return -std::expm1(-a * (t - s)); });
        }
        Kernel k(
            [kernel, alpha, sd](double s, double t) {
                if (s == t) return kernel.variance(t);
                return sd(s) * sd(t) * std::exp(-alpha.integral(s, t));
            },
            kernel.domain(), name);
        return k.with_decorrelation([alpha](double s, double t) { return -std::expm1(-alpha.integral(s, t)); });
    }();
    if (kernel.has_mean()) out = out.with_mean([kernel](double t) { return kernel.mean(t); });
    return out;
}

namespace {

double correlation_of(const Eigen::MatrixXd& cov, Index i, Index j) {
    return cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
}

}  // namespace

std::vector<ConvergenceRow> convergence_experiment(const Kernel& kernel, const Kernel& target, double s, double t,
                                                   const std::vector<Partition>& partitions) {
    if (!(s < t)) throw InvalidInput("convergence_experiment: need s < t");
    const GaussianVector goal = GaussianVector::from_kernel(target, {s, t});
    const double goal_corr = correlation_of(goal.cov, 0, 1);
    std::vector<std::pair<double, ConvergenceRow>> rows;
    for (const auto& p : partitions) {
        if (p.front() != s || p.back() != t) throw InvalidInput("partition does not span [s, t]");
        const TransportPlan plan = partition_law(kernel, p);
        ConvergenceRow row;
        row.key = p.mesh();
        row.distance = gaussian_distance(plan.joint, goal);
        row.correlation = correlation_of(plan.joint.cov, 0, 1);
        row.target_correlation = goal_corr;
        rows.emplace_back(row.key, row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ConvergenceRow> out;
    for (auto& r : rows) out.push_back(r.second);
    return out;
}

std::vector<ConvergenceRow> global_experiment(const Kernel& kernel, const Kernel& target,
                                              const AdmissibleSequence& adm, const std::vector<double>& S,
                                              int n_max) {
    if (S.size() < 2) throw InvalidInput("global_experiment: need at least two query times");
    require_increasing(S, "query times");
    const GaussianVector goal = GaussianVector::from_kernel(target, S);
    const auto last = static_cast<Index>(S.size()) - 1;
    const double goal_corr = correlation_of(goal.cov, 0, last);
    std::vector<ConvergenceRow> out;
    for (int n = 1; n <= n_max; ++n) {
        const GaussianVector law = made_markov_cov(kernel, adm.points_within(n, S.front(), S.back()), S);
        out.push_back({static_cast<double>(n), gaussian_distance(law, goal), correlation_of(law.cov, 0, last),
                       goal_corr});
    }
    return out;
}

bool converges_to_zero(const std::vector<ConvergenceRow>& rows, double tol) {
    if (rows.empty()) return false;
    const std::size_t n = rows.size();
    if (!(rows.back().distance < tol)) return false;
    for (std::size_t i = (n >= 3 ? n - 2 : 1); i < n; ++i) {
        if (rows[i].distance > rows[i - 1].distance) return false;
    }
    return true;
}

TightnessReport tightness_bound_check(const Kernel& kernel, const RateFunction& alpha, double a, double b,
                                      const std::vector<Partition>& partitions, const TightnessOptions& opts) {
    if (!(a < b)) throw InvalidInput("tightness_bound_check: need a < b");
    if (opts.sample_points < 2) throw InvalidInput("tightness_bound_check: need at least two sample points");
    TightnessReport out;
    std::vector<double> lattice;
    for (int i = 0; i < opts.sample_points; ++i) {
        lattice.push_back(i + 1 == opts.sample_points ? b : a + (b - a) * i / (opts.sample_points - 1));
    }
    for (double x : lattice) out.alpha_sup = std::max(out.alpha_sup, alpha.is_infinite() ? kInf : alpha(x));

    auto ratio = [&](const std::vector<double>& R, double s, double t) {
        const GaussianVector law = made_markov_cov(kernel, R, {s, t});
        return (1.0 - correlation_of(law.cov, 0, 1)) / (t - s);
    };
    for (const auto& part : partitions) {
        const auto& R = part.points();
        double m = 0.0;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            for (std::size_t j = i + 1; j < lattice.size(); ++j) m = std::max(m, ratio(R, lattice[i], lattice[j]));
        }
        // Pairs at the partition scale, spread evenly along the partition.
        std::vector<double> inside;
        for (double r : R) {
            if (r >= a && r <= b) inside.push_back(r);
        }
        if (inside.size() >= 2 && opts.adjacent_pairs > 0) {
            const std::size_t gaps = inside.size() - 1;
            const std::size_t count = std::min<std::size_t>(gaps, static_cast<std::size_t>(opts.adjacent_pairs));
            for (std::size_t c = 0; c < count; ++c) {
                const std::size_t k = count == 1 ? 0 : c * (gaps - 1) / (count - 1);
                m = std::max(m, ratio(R, inside[k], inside[k + 1]));
                if (k + 2 < inside.size()) m = std::max(m, ratio(R, inside[k], inside[k + 2]));
            }
        }
        out.per_partition.push_back(m);
        out.M_empirical = std::max(out.M_empirical, m);
    }

    std::vector<std::pair<double, double>> by_mesh;
    for (std::size_t i = 0; i < partitions.size(); ++i) by_mesh.emplace_back(partitions[i].mesh(), out.per_partition[i]);
    std::stable_sort(by_mesh.begin(), by_mesh.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    out.pass = std::isfinite(out.M_empirical);
    if (by_mesh.size() >= 2) {
        const std::size_t half = by_mesh.size() / 2;
        double coarse = 0.0;
        double fine = 0.0;
        for (std::size_t i = 0; i < by_mesh.size(); ++i) {
            double& side = i < half ? coarse : fine;
            side = std::max(side, by_mesh[i].second);
        }
        out.pass = out.pass && fine <= opts.growth_factor * coarse;
    }
    return out;
}

}  // namespace transform

}  // namespace gmt
