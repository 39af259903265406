#pragma once

#include <map>
#include <string>
#include <vector>

#include "gmt/error.hpp"
#include "gmt/kernel.hpp"

namespace gmt {

/// Atom a (delta_y + delta_{-y}) for y > 0, or a delta_0 for y = 0.
struct Atom {
    double weight = 0.0;
    double location = 0.0;
};

class SpectralMeasure {
public:
    SpectralMeasure() = default;
    explicit SpectralMeasure(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double total_mass() const;
    static double effective_mass(const Atom& atom) { return atom.location > 0.0 ? 2.0 * atom.weight : atom.weight; }

    /// Fourier transform sum of effective_mass * cos(h y).
    double transform(double h) const;
    /// 1 - transform(h) summed as 2 m sin^2(h y / 2), plus any mass defect.
    double one_minus_transform(double h) const;

    /// Throws InvalidMeasure on non-positive weights, negative locations or mass off 1 by more than 1e-12.
    void validate() const;

private:
    std::vector<Atom> atoms_;
};

Kernel kernel_from_spectral(const SpectralMeasure& mu);

/// t^{-1} (1 - mu^(t)) for t > 0.
double fourier_decay_rate(const SpectralMeasure& mu, double t);

struct WeierstrassConfig {
    double a = 0.5;
    double b = 3.0;
    int k_cut = 60;
    int i_max = 2;
    long long budget = 1'000'000;

    void validate() const;
    /// Bound on the dropped terms of any x-weighted partial sum: x 2^{-k_cut+1}.
    double tail_tol(double x) const;
};

struct WeierstrassIndices {
    /// n_0, n_1, ...; complete results hold 2 (i_max + 1) + 1 entries.
    std::vector<long long> n;
    /// y_k for 2 <= k <= k_cut: b^k on the active blocks, 0 elsewhere.
    std::map<int, double> y;
    /// Last k whose y_k is decided by the computed indices.
    long long decided_through = 0;
};

/// Index search ran past its budget; carries the indices found so far.
class IndexBudgetExceeded : public BudgetExceeded {
public:
    IndexBudgetExceeded(const std::string& what, WeierstrassIndices partial)
        : BudgetExceeded(what), partial_(std::move(partial)) {}
    const WeierstrassIndices& partial() const { return partial_; }

private:
    WeierstrassIndices partial_;
};

namespace weierstrass {

/// x sum_{k=n}^{min(floor x, k_cut)} a^k (1 - cos(b^k / x)).
double f(long long n, double x, const WeierstrassConfig& cfg);

/// x sum over blocks [lo, hi] (hi clipped at k_cut) of a^k (1 - cos(b^k / x)).
double g(const std::vector<std::pair<long long, long long>>& blocks, double x, const WeierstrassConfig& cfg);

/// Blocks [n_{2l}, n_{2l+1} - 1] available in an index list.
std::vector<std::pair<long long, long long>> active_blocks(const std::vector<long long>& n);

}  // namespace weierstrass

/// Throws IndexBudgetExceeded when some index would exceed cfg.budget.
WeierstrassIndices weierstrass_indices(const WeierstrassConfig& cfg);

/// Sum over k >= 2 of 2^{-k}(delta_{b^k} + delta_{-b^k}), truncated at k_cut with the deficit at 0.
SpectralMeasure weierstrass_measure(const WeierstrassConfig& cfg);

SpectralMeasure counterexample_measure(const WeierstrassConfig& cfg);
/// Builds from (possibly partial) indices; requires y_k decided up to k_cut.
SpectralMeasure counterexample_measure(const WeierstrassIndices& indices, const WeierstrassConfig& cfg);

struct WitnessSearch {
    double t_min = 1e-9;
    double t_max = 1.0;
    int grid_points = 4000;
    int max_iterations = 60;
    /// Tolerance is rel_tol (1 + target).
    double rel_tol = 1e-3;
};

struct WitnessResult {
    double target = 0.0;
    bool found = false;
    double t = 0.0;
    double rate = 0.0;
    double error = 0.0;
    int iterations = 0;
    std::string message;
};

/// For each target, a t with |rate(t) - target| below tolerance. Positive targets
/// are bracketed on a log grid, deepest bracket first, then bisected; target 0 is
/// accepted at a grid point already within tolerance. Failures are reported in the result.
std::vector<WitnessResult> cluster_witnesses(const SpectralMeasure& mu, const std::vector<double>& targets,
                                             const WitnessSearch& search = {});

}  // namespace gmt
