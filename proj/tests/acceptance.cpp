// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gmt/error.hpp"
#include "gmt/gauss.hpp"
#include "gmt/kernel.hpp"
#include "gmt/simulate.hpp"
#include "gmt/spectral.hpp"
#include "gmt/transform.hpp"

using namespace gmt;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1. K_alpha Gram matrices satisfy the Markov criterion.
Outcome markov_fixed_point() {
    constexpr double kTol = 1e-10;
    constexpr int kGrids = 100;
    constexpr int kMaxSize = 6;
    const std::vector<std::pair<std::string, Kernel>> ks{
        {"0.5", transform::k_alpha(RateFunction::constant(0.5))},
        {"1", transform::k_alpha(RateFunction::constant(1.0))},
        {"2", transform::k_alpha(RateFunction::constant(2.0))},
        {"t", transform::k_alpha(RateFunction::linear(0.0, 1.0), Interval{0.0, kInf, false, true})},
    };
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    std::uniform_int_distribution<int> size(1, kMaxSize);
    double worst = 0.0;
    for (const auto& [name, k] : ks) {
        for (int g = 0; g < kGrids; ++g) {
            std::vector<double> grid;
            const int n = size(rng);
            while (static_cast<int>(grid.size()) < n) {
                const double t = u(rng);
                if (std::find(grid.begin(), grid.end(), t) == grid.end()) grid.push_back(t);
            }
            std::sort(grid.begin(), grid.end());
            worst = std::max(worst, markov_check(GaussianVector::from_kernel(k, grid)).max_residual);
        }
    }
    return {worst < kTol, "max residual " + num(worst) + " (tol " + num(kTol) + ") over " +
                              std::to_string(kGrids * ks.size()) + " grids"};
}

// 2. Concatenation against chain sampling X1, X2 | X1, ...
Outcome concatenation_vs_monte_carlo() {
    constexpr int kChains = 20;
    constexpr long kSamples = 1'000'000;
    constexpr double kSe = 3.0;
    std::mt19937_64 rng(kSeed + 2);
    std::uniform_int_distribution<int> length(3, 5);
    std::uniform_real_distribution<double> var(0.5, 2.0);
    std::uniform_real_distribution<double> rho(-0.95, 0.95);
    std::normal_distribution<double> z;
    int entries = 0;
    int breaches = 0;
    double worst = 0.0;
    for (int c = 0; c < kChains; ++c) {
        const int m = length(rng);
        std::vector<double> v(m), cross(m - 1);
        for (double& x : v) x = var(rng);
        for (int i = 0; i + 1 < m; ++i) cross[i] = rho(rng) * std::sqrt(v[i] * v[i + 1]);
        std::vector<TransportPlan> plans;
        for (int i = 0; i + 1 < m; ++i) {
            Eigen::Matrix2d s;
            s << v[i], cross[i], cross[i], v[i + 1];
            plans.emplace_back(1, 1, GaussianVector{{}, Eigen::Vector2d::Zero(), s});
        }
        const GaussianVector law = concatenate(plans);

        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m), sum_sq = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd x(m);
        for (long p = 0; p < kSamples; ++p) {
            x(0) = std::sqrt(v[0]) * z(rng);
            for (int i = 0; i + 1 < m; ++i) {
                const double b = cross[i] / v[i];
                x(i + 1) = b * x(i) + std::sqrt(v[i + 1] - b * cross[i]) * z(rng);
            }
            for (int i = 0; i < m; ++i) {
                for (int j = i; j < m; ++j) {
                    const double q = x(i) * x(j);
                    sum(i, j) += q;
                    sum_sq(i, j) += q * q;
                }
            }
        }
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                const double est = sum(i, j) / kSamples;
                const double se = std::sqrt((sum_sq(i, j) / kSamples - est * est) / kSamples);
                const double zscore = std::abs(est - law.cov(i, j)) / se;
                worst = std::max(worst, zscore);
                ++entries;
                if (zscore >= kSe) ++breaches;
            }
        }
    }
    return {breaches == 0, std::to_string(entries) + " entries, " + std::to_string(breaches) +
                               " outside 3 SE, worst |z| " + num(worst)};
}

// 3. Partition-composed correlations of the fBm-log kernel at mesh 2^-12.
Outcome strong_transform_convergence() {
    constexpr double kTol = 5e-3;
    constexpr long long kIntervals = 1LL << 12;
    const std::vector<std::pair<double, double>> cases{{0.25, 0.0}, {0.5, std::exp(-1.0)}, {0.75, 1.0}};
    bool pass = true;
    std::string detail;
    for (const auto& [H, target] : cases) {
        const TransportPlan p = transform::partition_law(kernels::fbm_log(H), Partition::uniform(0, 1, kIntervals));
        const double c = p.joint.cov(0, 1) / std::sqrt(p.joint.cov(0, 0) * p.joint.cov(1, 1));
        const bool ok = std::abs(c - target) < kTol;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + std::string("H=") + num(H) + " corr " + num(c) + " target " +
                  num(target) + (ok ? "" : " (off by " + num(std::abs(c - target)) + ")");
    }
    return {pass, detail + " (tol " + num(kTol) + ")"};
}

// 4. Mimic of fBm through its stationary representation at (1, 2).
Outcome fbm_transform_table() {
    constexpr double kTol = 1e-9;
    const std::vector<std::pair<double, double>> cases{{0.25, 0.0}, {0.5, 1.0}, {0.75, std::pow(2.0, 0.75)}};
    bool pass = true;
    std::string detail;
    for (const auto& [H, expected] : cases) {
        const Kernel k = transform_kernel(kernels::fbm_log(H), TimeFunction::power(1.0, H),
                                          TimeFunction::logarithm(0.5), Interval::positive());
        const double v = transform::mimic_kernel(k, kernels::fbm_rate(H))(1.0, 2.0);
        const bool ok = std::abs(v - expected) < kTol;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + std::string("H=") + num(H) + " K'(1,2) " + num(v);
    }
    return {pass, detail + " (tol " + num(kTol) + ")"};
}

// 5. Diagonal, Markov property and recovered rate of three mimic kernels.
Outcome mimicking_invariants() {
    constexpr int kTimes = 20;
    constexpr double kMarkovTol = 1e-8;
    constexpr double kRateTol = 1e-2;
    struct Case {
        std::string name;
        Kernel k;
        RateFunction a;
        double lo, hi;
    };
    const std::vector<Case> cases{
        {"exponential", kernels::exponential_rate(RateFunction::constant(1.0)), RateFunction::constant(1.0), 0.0, 5.0},
        {"noise_integral",
         kernels::noise_integral([](double t, double u) { return std::sqrt(t) * std::exp(-0.5 * t * u); },
                                 Interval{0.0, kInf, true, true}, Interval::positive()),
         RateFunction::constant(0.0), 0.5, 5.0},
        {"fbm_log H=0.75", kernels::fbm_log(0.75), kernels::fbm_log_rate(0.75), 0.0, 5.0},
    };
    bool pass = true;
    std::string detail;
    for (const Case& c : cases) {
        const Kernel m = transform::mimic_kernel(c.k, c.a);
        std::vector<double> times;
        for (int i = 0; i < kTimes; ++i) times.push_back(c.lo + (c.hi - c.lo) * i / (kTimes - 1));
        bool diag = true;
        double rate_err = 0.0;
        for (double t : times) {
            diag = diag && m(t, t) == c.k(t, t);
            rate_err = std::max(rate_err, std::abs(estimate_alpha(m, t, geometric_h_sequence()).estimate - c.a(t)));
        }
        const double residual = markov_check(GaussianVector::from_kernel(m, times)).max_residual;
        const bool ok = diag && residual < kMarkovTol && rate_err < kRateTol;
        pass = pass && ok;
        detail += (detail.empty() ? "" : "; ") + c.name + ": diag " + (diag ? "exact" : "DIFFERS") + ", residual " +
                  num(residual) + ", rate err " + num(rate_err);
    }
    return {pass, detail};
}

// 6. Euler-Maruyama on the mimicking SDE against exact OU sampling.
Outcome sde_vs_gaussian() {
    constexpr long kPaths = 100'000;
    FigureOptions opts;
    opts.step = 1e-3;
    opts.se_multiplier = 3.0;
    opts.step_multiplier = 2.0;
    opts.route = GaussianRoute::OuExact;
    const Grid grid{0, 1, 2, 3, 4, 5};
    const FigureReport r = figure_comparison(kernels::exponential_rate(RateFunction::constant(1.0)),
                                             RateFunction::constant(1.0), grid, kPaths, kSeed, opts);
    return {r.pass, "max discrepancy " + num(r.max_cov_discrepancy) + ", worst band excess: pair " +
                        num(r.worst_pair_excess) + ", sde " + num(r.worst_sde_excess) + ", gaussian " +
                        num(r.worst_gaussian_excess) + " (band 3 SE + 2 step)"};
}

// 7. Counterexample indices to depth 4 and decay-rate witnesses.
Outcome counterexample_witnesses() {
    WeierstrassConfig cfg;
    cfg.k_cut = 60;
    cfg.i_max = 4;
    WeierstrassIndices idx;
    std::string note;
    try {
        idx = weierstrass_indices(cfg);
    } catch (const IndexBudgetExceeded& e) {
        idx = e.partial();
        note = e.what();
    }
    const auto& n = idx.n;
    int verified = -1;
    bool inequalities = true;
    for (int i = 0; i <= cfg.i_max; ++i) {
        if (static_cast<std::size_t>(2 * i + 2) >= n.size()) {
            inequalities = false;
            break;
        }
        const double x = static_cast<double>(n[2 * i + 1] - 1);
        bool ok = weierstrass::f(n[2 * i], x, cfg) > i;
        if (i > 0) {
            const double y = static_cast<double>(n[2 * i + 2] - 1);
            const std::vector<long long> prefix(n.begin(), n.begin() + 2 * i + 2);
            ok = ok && weierstrass::g(weierstrass::active_blocks(prefix), y, cfg) < 1.0 / i + cfg.tail_tol(y);
        }
        if (!ok) {
            inequalities = false;
            break;
        }
        verified = i;
    }

    bool witnesses = false;
    std::string wdetail = "measure undetermined";
    if (idx.decided_through >= cfg.k_cut) {
        const SpectralMeasure mu = counterexample_measure(idx, cfg);
        witnesses = true;
        wdetail.clear();
        for (const WitnessResult& w : cluster_witnesses(mu, {0.25, 1.0, 4.0})) {
            const bool ok = w.found && std::abs(w.rate - w.target) < 1e-2 * (1 + w.target);
            witnesses = witnesses && ok;
            wdetail += (wdetail.empty() ? "" : ", ") + num(w.target) + (ok ? " at t=" + num(w.t) : " not found");
        }
    }
    std::string detail = "indices";
    for (long long v : n) detail += " " + std::to_string(v);
    detail += "; inequalities verified for i <= " + std::to_string(verified) + " of " + std::to_string(cfg.i_max);
    if (!note.empty()) detail += " (" + note + ")";
    detail += "; witnesses " + wdetail;
    return {inequalities && witnesses, detail};
}

// 8. Bounded (1 - K_n(s,t)) / |s - t| across dyadic partitions.
Outcome tightness_bound() {
    std::vector<Partition> parts;
    for (int k = 1; k <= 12; ++k) parts.push_back(Partition::uniform(0, 1, 1LL << k));
    const transform::TightnessReport r =
        transform::tightness_bound_check(kernels::fbm_log(0.75), kernels::fbm_log_rate(0.75), 0, 1, parts);
    std::string per;
    for (double m : r.per_partition) per += (per.empty() ? "" : " ") + num(m);
    return {r.pass, "M " + num(r.M_empirical) + "; per mesh 2^-1..2^-12: " + per};
}

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Markov criterion fixed point", 5, markov_fixed_point},
        {2, "concatenation vs Monte Carlo", 60, concatenation_vs_monte_carlo},
        {3, "strong-transform convergence (stationary)", 10, strong_transform_convergence},
        {4, "fBm Markov transform table", 1, fbm_transform_table},
        {5, "mimicking invariants", 30, mimicking_invariants},
        {6, "SDE route equals Gaussian route", 300, sde_vs_gaussian},
        {7, "counterexample witnesses", 120, counterexample_witnesses},
        {8, "tightness bound", 10, tightness_bound},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("criterion %d [%s]: %s | %s | %.2f s (limit %.0f s)%s\n", c.id, c.name.c_str(),
                    pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.limit_s, in_time ? "" : " OVER TIME");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
