#include "gmt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gmt {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// 1 - cos(z) without cancellation.
double one_minus_cos(double z) {
    const double s = std::sin(0.5 * z);
    return 2.0 * s * s;
}

}  // namespace

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

double SpectralMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += effective_mass(a);
    return m;
}

double SpectralMeasure::transform(double h) const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += effective_mass(a) * (a.location > 0.0 ? std::cos(h * a.location) : 1.0);
    return sum;
}

double SpectralMeasure::one_minus_transform(double h) const {
    double sum = 0.0;
    for (const auto& a : atoms_) {
        if (a.location > 0.0) sum += effective_mass(a) * one_minus_cos(h * a.location);
    }
    return sum;
}

void SpectralMeasure::validate() const {
    if (atoms_.empty()) throw InvalidMeasure("spectral measure has no atoms");
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw InvalidMeasure("atom weight must be positive");
        if (!(a.location >= 0.0) || !std::isfinite(a.location)) {
            throw InvalidMeasure("atom location must be finite and non-negative");
        }
    }
    const double m = total_mass();
    if (std::abs(m - 1.0) > 1e-12) throw InvalidMeasure("spectral measure has total mass " + fmt(m) + ", expected 1");
}

Kernel kernel_from_spectral(const SpectralMeasure& mu) {
    mu.validate();
    Kernel k = Kernel::stationary([mu](double h) { return mu.transform(h); }, Interval::real_line(), "spectral");
    return k.with_decorrelation([mu](double s, double t) { return mu.one_minus_transform(t - s); });
}

double fourier_decay_rate(const SpectralMeasure& mu, double t) {
    if (!(t > 0.0)) throw InvalidInput("fourier_decay_rate: t must be positive");
    return mu.one_minus_transform(t) / t;
}

void WeierstrassConfig::validate() const {
    if (!(a > 0.0 && a < 1.0)) throw InvalidInput("Weierstrass a must lie in (0, 1)");
    if (!(a * b > 1.0)) throw InvalidInput("Weierstrass parameters need a b > 1");
    if (k_cut < 2) throw InvalidInput("k_cut must be at least 2");
    if (i_max < 1) throw InvalidInput("i_max must be at least 1");
    if (budget < 4) throw InvalidInput("index budget too small");
}

double WeierstrassConfig::tail_tol(double x) const {
    // x sum_{k > k_cut} a^k * 2
    return x * 2.0 * std::pow(a, k_cut + 1) / (1.0 - a);
}

namespace weierstrass {

namespace {

double block_sum(long long lo, long long hi, double x, const WeierstrassConfig& cfg) {
    double sum = 0.0;
    hi = std::min<long long>(hi, cfg.k_cut);
    for (long long k = std::max<long long>(lo, 0); k <= hi; ++k) {
        const double kd = static_cast<double>(k);
        sum += std::pow(cfg.a, kd) * one_minus_cos(std::pow(cfg.b, kd) / x);
    }
    return sum;
}

}  // namespace

double f(long long n, double x, const WeierstrassConfig& cfg) {
    if (!(x > 0.0)) throw InvalidInput("weierstrass::f needs x > 0");
    return x * block_sum(n, static_cast<long long>(std::floor(x)), x, cfg);
}

double g(const std::vector<std::pair<long long, long long>>& blocks, double x, const WeierstrassConfig& cfg) {
    if (!(x > 0.0)) throw InvalidInput("weierstrass::g needs x > 0");
    double sum = 0.0;
    for (const auto& [lo, hi] : blocks) sum += block_sum(lo, hi, x, cfg);
    return x * sum;
}

std::vector<std::pair<long long, long long>> active_blocks(const std::vector<long long>& n) {
    std::vector<std::pair<long long, long long>> out;
    for (std::size_t l = 0; 2 * l + 1 < n.size(); ++l) out.emplace_back(n[2 * l], n[2 * l + 1] - 1);
    return out;
}

}  // namespace weierstrass

namespace {

void fill_locations(WeierstrassIndices& out, const WeierstrassConfig& cfg) {
    out.y.clear();
    const long long upto = std::min<long long>(out.decided_through, cfg.k_cut);
    for (long long k = 2; k <= upto; ++k) {
        // Index of the last n_j <= k decides the state: even j opens a block, odd j closes it.
        const auto j = std::upper_bound(out.n.begin(), out.n.end(), k) - out.n.begin() - 1;
        out.y[static_cast<int>(k)] = (j % 2 == 0) ? std::pow(cfg.b, static_cast<double>(k)) : 0.0;
    }
}

[[noreturn]] void budget_exceeded(WeierstrassIndices partial, const WeierstrassConfig& cfg, const std::string& why) {
    partial.decided_through = cfg.budget;
    fill_locations(partial, cfg);
    const std::string what =
        "index n_" + std::to_string(partial.n.size()) + " exceeds the budget " + std::to_string(cfg.budget) + ": " + why;
    throw IndexBudgetExceeded(what, std::move(partial));
}

}  // namespace

WeierstrassIndices weierstrass_indices(const WeierstrassConfig& cfg) {
    cfg.validate();
    WeierstrassIndices out;
    out.n.push_back(2);
    for (int i = 0; i <= cfg.i_max; ++i) {
        // n_{2i+1} = inf{m > n_{2i} : f_{n_{2i}}(m - 1) > i}
        const long long start = out.n.back();
        // f_n(x) <= 2 x a^n / (1 - a), so f_n(x) > i forces x above this bound (kept in log10).
        if (i > 0) {
            const double log10_x =
                std::log10(i * (1.0 - cfg.a) / 2.0) - static_cast<double>(start) * std::log10(cfg.a);
            if (log10_x > std::log10(static_cast<double>(cfg.budget - 1))) {
                budget_exceeded(out, cfg, "f_" + std::to_string(start) + "(x) > " + std::to_string(i) +
                                              " needs x > 10^" + fmt(std::floor(log10_x)));
            }
        }
        long long found = 0;
        for (long long m = start + 1; m <= cfg.budget; ++m) {
            if (weierstrass::f(start, static_cast<double>(m - 1), cfg) > i) {
                found = m;
                break;
            }
        }
        if (found == 0) budget_exceeded(out, cfg, "no m with f above " + std::to_string(i));
        out.n.push_back(found);

        // n_{2i+2} = inf{m > n_{2i+1} : g(m - 1) < 1/i}, with 1/0 read as +inf.
        const auto blocks = weierstrass::active_blocks(out.n);
        const double bound = i == 0 ? kInf : 1.0 / i;
        found = 0;
        for (long long m = out.n.back() + 1; m <= cfg.budget; ++m) {
            if (weierstrass::g(blocks, static_cast<double>(m - 1), cfg) < bound) {
                found = m;
                break;
            }
        }
        if (found == 0) budget_exceeded(out, cfg, "no m with g below 1/" + std::to_string(i));
        out.n.push_back(found);
    }
    out.decided_through = out.n.back() - 1;
    fill_locations(out, cfg);
    return out;
}

SpectralMeasure weierstrass_measure(const WeierstrassConfig& cfg) {
    cfg.validate();
    WeierstrassIndices all;
    all.n = {2};
    all.decided_through = cfg.k_cut;
    fill_locations(all, cfg);
    return counterexample_measure(all, cfg);
}

SpectralMeasure counterexample_measure(const WeierstrassConfig& cfg) {
    return counterexample_measure(weierstrass_indices(cfg), cfg);
}

SpectralMeasure counterexample_measure(const WeierstrassIndices& indices, const WeierstrassConfig& cfg) {
    cfg.validate();
    if (indices.decided_through < cfg.k_cut) {
        throw InvalidInput("indices decide y_k only up to k = " + std::to_string(indices.decided_through) +
                           ", below k_cut = " + std::to_string(cfg.k_cut));
    }
    // Dropped tail 2 sum_{k > k_cut} a^k joins the mass at 0.
    double zero_mass = 2.0 * std::pow(cfg.a, cfg.k_cut + 1) / (1.0 - cfg.a);
    std::vector<Atom> atoms;
    for (int k = 2; k <= cfg.k_cut; ++k) {
        const double w = std::pow(cfg.a, k);
        const auto it = indices.y.find(k);
        if (it == indices.y.end()) throw InvalidInput("missing y_" + std::to_string(k));
        if (it->second > 0.0) {
            atoms.push_back({w, it->second});
        } else {
            zero_mass += 2.0 * w;
        }
    }
    atoms.insert(atoms.begin(), Atom{zero_mass, 0.0});
    SpectralMeasure mu(std::move(atoms));
    mu.validate();
    return mu;
}

std::vector<WitnessResult> cluster_witnesses(const SpectralMeasure& mu, const std::vector<double>& targets,
                                             const WitnessSearch& search) {
    if (!(search.t_min > 0.0) || !(search.t_max > search.t_min) || search.grid_points < 2) {
        throw InvalidInput("cluster_witnesses: invalid search grid");
    }
    std::vector<double> ts(static_cast<std::size_t>(search.grid_points));
    std::vector<double> rates(ts.size());
    const double log_lo = std::log(search.t_min);
    const double log_hi = std::log(search.t_max);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ts[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / static_cast<double>(ts.size() - 1));
        rates[i] = fourier_decay_rate(mu, ts[i]);
    }

    std::vector<WitnessResult> out;
    for (double target : targets) {
        if (!(target >= 0.0) || !std::isfinite(target)) throw InvalidInput("witness targets must be finite and >= 0");
        const double tol = search.rel_tol * (1.0 + target);
        WitnessResult res;
        res.target = target;
        auto accept = [&](double t, double r) {
            res.found = true;
            res.t = t;
            res.rate = r;
            res.error = std::abs(r - target);
        };
        if (target == 0.0) {
            // The rate is positive, so no sign change exists; take the deepest grid point within tolerance.
            for (std::size_t i = 0; i < ts.size() && !res.found; ++i) {
                if (rates[i] < tol) accept(ts[i], rates[i]);
            }
            if (!res.found) {
                const auto best = std::min_element(rates.begin(), rates.end()) - rates.begin();
                res.t = ts[best];
                res.rate = rates[best];
                res.error = rates[best];
                res.message = "no grid point with rate below " + fmt(tol) + "; smallest rate " + fmt(rates[best]);
            }
            out.push_back(res);
            continue;
        }
        for (std::size_t i = 0; i + 1 < ts.size() && !res.found; ++i) {
            const double d0 = rates[i] - target;
            const double d1 = rates[i + 1] - target;
            if (std::abs(d0) < tol) {
                accept(ts[i], rates[i]);
                break;
            }
            if ((d0 < 0.0) == (d1 < 0.0)) continue;
            // Bisection in log t on the deepest bracket.
            double lo = std::log(ts[i]);
            double hi = std::log(ts[i + 1]);
            const bool lo_below = d0 < 0.0;
            for (int it = 1; it <= search.max_iterations; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double t = std::exp(mid);
                const double r = fourier_decay_rate(mu, t);
                res.iterations = it;
                if (std::abs(r - target) < tol) {
                    accept(t, r);
                    break;
                }
                ((r < target) == lo_below ? lo : hi) = mid;
            }
        }
        if (!res.found) {
            res.message = "no bracketing pair within [" + fmt(search.t_min) + ", " + fmt(search.t_max) + "]";
            if (res.iterations > 0) res.message = "bisection did not reach the tolerance";
        }
        out.push_back(res);
    }
    return out;
}

}  // namespace gmt
