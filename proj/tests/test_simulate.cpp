#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmt/error.hpp"
#include "gmt/rng.hpp"
#include "gmt/simulate.hpp"
#include "gmt/transform.hpp"

using namespace gmt;
using Eigen::MatrixXd;

namespace {

// Test-side sample covariance and standard errors, written out long-hand.
struct Moments {
    MatrixXd cov;
    MatrixXd se;
};

Moments moments(const MatrixXd& paths) {
    const long n = paths.rows();
    const long d = paths.cols();
    std::vector<double> mean(d, 0.0);
    for (long j = 0; j < d; ++j) {
        for (long p = 0; p < n; ++p) mean[j] += paths(p, j);
        mean[j] /= n;
    }
    Moments m{MatrixXd(d, d), MatrixXd(d, d)};
    for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) {
            double s = 0.0, s2 = 0.0;
            for (long p = 0; p < n; ++p) {
                const double v = (paths(p, i) - mean[i]) * (paths(p, j) - mean[j]);
                s += v;
                s2 += v * v;
            }
            const double avg = s / n;
            m.cov(i, j) = s / (n - 1);
            m.se(i, j) = std::sqrt(std::max(0.0, s2 / n - avg * avg) / n);
        }
    }
    return m;
}

// Entrywise |est - target| / se, with se floored to avoid dividing by zero.
double worst_z(const Moments& m, const MatrixXd& target, double slack = 0.0) {
    double worst = 0.0;
    for (long i = 0; i < target.rows(); ++i)
        for (long j = 0; j < target.cols(); ++j)
            worst = std::max(worst, (std::abs(m.cov(i, j) - target(i, j)) - slack) / std::max(m.se(i, j), 1e-300));
    return worst;
}

GaussianVector law_of(const Kernel& k, const Grid& g) { return GaussianVector::from_kernel(k, g); }

SdeSpec ou_spec(double step) {
    SdeSpec s;
    s.drift = [](double, double x) { return -x; };
    s.diffusion = [](double, double) { return std::sqrt(2.0); };
    s.step = step;
    return s;
}

}  // namespace

TEST_CASE("Philox known-answer vectors") {
    using B = Philox::Block;
    CHECK(Philox::round10({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox::round10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox::round10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox draws") {
    Philox a(5, 1), b(5, 1), c(5, 2);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(Philox(5, 1).next() != c.next());

    Philox u(9, 0);
    double s = 0, s2 = 0, m3 = 0, m4 = 0;
    const int N = 400'000;
    for (int i = 0; i < N; ++i) {
        const double x = u.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
    }
    Philox z(9, 1);
    for (int i = 0; i < N; ++i) {
        const double x = z.normal();
        s += x;
        s2 += x * x;
        m3 += x * x * x;
        m4 += x * x * x * x;
    }
    CHECK(std::abs(s / N) < 3 / std::sqrt(N));
    CHECK(std::abs(s2 / N - 1) < 3 * std::sqrt(2.0 / N));
    CHECK(std::abs(m3 / N) < 3 * std::sqrt(15.0 / N));
    CHECK(std::abs(m4 / N - 3) < 3 * std::sqrt(96.0 / N));
}

TEST_CASE("empirical_covariance") {
    TrajectoryBatch flat;
    flat.times = {0, 1, 2};
    flat.paths = MatrixXd::Constant(50, 3, 1.5);
    const EmpiricalCovariance e = empirical_covariance(flat);
    CHECK(e.estimate.cov.isZero());
    CHECK(e.estimate.mean.isApproxToConstant(1.5));

    const TrajectoryBatch iid = cholesky_sample(law_of(kernels::white_noise(), {0, 1, 2, 3}), 100'000, 3);
    const EmpiricalCovariance ie = empirical_covariance(iid);
    const Moments ref = moments(iid.paths);
    CHECK((ie.estimate.cov - ref.cov).cwiseAbs().maxCoeff() < 1e-12);
    // n versus n - 1 normalisation of the product variance.
    CHECK(((ie.cov_se - ref.se).array() / ref.se.array()).abs().maxCoeff() < 1e-4);
    CHECK(worst_z(ref, MatrixXd::Identity(4, 4)) < 3.0);

    TrajectoryBatch one;
    one.times = {0};
    one.paths = MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS(empirical_covariance(one), InvalidInput);
}

TEST_CASE("cholesky_sample") {
    const TrajectoryBatch id = cholesky_sample(law_of(kernels::white_noise(), {0, 1}), 100'000, 11);
    const Moments m = moments(id.paths);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(m.cov(j, j) - 1.0) < 3 * m.se(j, j));

    const TrajectoryBatch flat = cholesky_sample(law_of(kernels::constant(), {0, 1, 2, 3, 4}), 2000, 12);
    for (long p = 0; p < flat.paths.rows(); ++p)
        CHECK((flat.paths.row(p).array() - flat.paths(p, 0)).abs().maxCoeff() < 1e-4);

    const Kernel ex = kernels::exponential_rate(RateFunction::constant(1.0));
    const Grid g{0, 0.5, 1};
    const TrajectoryBatch eb = cholesky_sample(law_of(ex, g), 100'000, 13);
    CHECK(worst_z(moments(eb.paths), ex.gram(g)) < 3.0);
    CHECK(eb.source == BatchSource::Sampler);

    GaussianVector bad = law_of(kernels::white_noise(), {0, 1});
    bad.cov(1, 1) = -1.0;
    CHECK_THROWS_AS(cholesky_sample(bad, 10, 1), NotPsd);
    // Slightly indefinite: repaired by the ladder.
    GaussianVector near = law_of(kernels::constant(), {0, 1});
    near.cov(0, 1) = near.cov(1, 0) = 1.0 + 1e-9;
    CHECK_NOTHROW(cholesky_sample(near, 10, 1));
    CHECK_THROWS_AS(cholesky_sample(law_of(ex, g), 0, 1), InvalidInput);
}

TEST_CASE("cholesky_sample matches the law on random grids") {
    const std::vector<Kernel> ks{kernels::fbm(0.3), kernels::fbm_log(0.75),
                                 kernels::exponential_rate(RateFunction::linear(0.2, 0.5))};
    std::uint64_t seed = 100;
    for (const Kernel& k : ks) {
        const Grid g{0.2, 0.5, 0.9, 1.4, 2.0, 2.7, 3.1, 3.8, 4.4, 5.0};
        const TrajectoryBatch b = cholesky_sample(law_of(k, g), 100'000, ++seed);
        CHECK(worst_z(moments(b.paths), k.gram(g)) < 3.0);
    }
}

TEST_CASE("batches are bit-identical for equal seeds") {
    const GaussianVector law = law_of(kernels::fbm(0.7), {0.5, 1, 1.5});
    CHECK(cholesky_sample(law, 500, 77).paths == cholesky_sample(law, 500, 77).paths);
    CHECK(cholesky_sample(law, 500, 77).paths != cholesky_sample(law, 500, 78).paths);
    CHECK(euler_maruyama(ou_spec(1e-2), {0, 1}, 300, 5).paths == euler_maruyama(ou_spec(1e-2), {0, 1}, 300, 5).paths);
    CHECK(ou_exact(RateFunction::constant(1), {0, 1, 2}, 300, 5).paths ==
          ou_exact(RateFunction::constant(1), {0, 1, 2}, 300, 5).paths);
    // A prefix of paths does not depend on the batch size.
    CHECK(cholesky_sample(law, 10, 77).paths == cholesky_sample(law, 500, 77).paths.topRows(10));
}

TEST_CASE("euler_maruyama") {
    SdeSpec still;
    still.drift = [](double, double) { return 0.0; };
    still.diffusion = [](double, double) { return 0.0; };
    still.initial_mean = 2.5;
    still.initial_variance = 0.0;
    const TrajectoryBatch c = euler_maruyama(still, {0, 0.3, 1}, 20, 1);
    CHECK(c.paths.isApproxToConstant(2.5));
    CHECK(c.source == BatchSource::Sde);

    // Zero rate: dZ = 0 with a random start.
    const SdeSpec zero = mimicking_sde(kernels::constant(), RateFunction::constant(0.0), 0, 1e-2);
    const TrajectoryBatch z = euler_maruyama(zero, {0, 0.5, 1}, 200, 2);
    for (long p = 0; p < z.paths.rows(); ++p) CHECK((z.paths.row(p).array() - z.paths(p, 0)).abs().maxCoeff() == 0.0);

    SdeSpec neg = ou_spec(1e-2);
    neg.diffusion = [](double t, double) { return t > 0.5 ? -1.0 : 1.0; };
    CHECK_THROWS_AS(euler_maruyama(neg, {0, 1}, 5, 1), InvalidSde);
    SdeSpec nostep = ou_spec(0.0);
    CHECK_THROWS_AS(euler_maruyama(nostep, {0, 1}, 5, 1), InvalidSde);
    CHECK_THROWS_AS(euler_maruyama(ou_spec(1e-2), {1, 0}, 5, 1), InvalidInput);
}

TEST_CASE("euler_maruyama on the OU equation against the closed form") {
    const Grid g{0, 0.25, 0.5, 1.0};
    const double step = 1e-3;
    const TrajectoryBatch b = euler_maruyama(ou_spec(step), g, 100'000, 21);
    MatrixXd target(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) target(i, j) = std::exp(-std::abs(g[i] - g[j]));
    CHECK(worst_z(moments(b.paths), target, 2 * step) < 3.0);
}

TEST_CASE("ou_exact") {
    const TrajectoryBatch z = ou_exact(RateFunction::constant(0.0), {0, 1, 2}, 100, 4);
    for (long p = 0; p < z.paths.rows(); ++p) CHECK((z.paths.row(p).array() - z.paths(p, 0)).abs().maxCoeff() == 0.0);

    const Grid g{0, 0.1, 0.3};
    const TrajectoryBatch one = ou_exact(RateFunction::constant(1.0), g, 100'000, 5);
    CHECK(worst_z(moments(one.paths), transform::k_alpha(RateFunction::constant(1.0)).gram(g)) < 3.0);

    const TrajectoryBatch lin = ou_exact(RateFunction::linear(0, 1), {0, 1, 2}, 100'000, 6);
    const Moments m = moments(lin.paths);
    CHECK(std::abs(m.cov(0, 2) - std::exp(-2.0)) < 3 * m.se(0, 2));
    CHECK(std::abs(m.cov(0, 1) - std::exp(-0.5)) < 3 * m.se(0, 1));
    CHECK(std::abs(m.cov(1, 2) - std::exp(-1.5)) < 3 * m.se(1, 2));

    const TrajectoryBatch w = ou_exact(RateFunction::infinite(), {0, 1, 2}, 100'000, 7);
    CHECK(worst_z(moments(w.paths), MatrixXd::Identity(3, 3)) < 3.0);
}

TEST_CASE("Euler-Maruyama chain law converges with order one") {
    AffineSde ou;
    ou.offset = [](double) { return 0.0; };
    ou.slope = [](double) { return -1.0; };
    ou.noise = [](double) { return std::sqrt(2.0); };
    const Grid g{0, 0.5, 1, 2, 5};
    const MatrixXd target = transform::k_alpha(RateFunction::constant(1.0)).gram(g);
    std::vector<double> err;
    for (double step : {1e-2, 5e-3, 2.5e-3}) {
        ou.step = step;
        err.push_back((euler_maruyama_law(ou, g).cov - target).cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        CHECK(ratio > 1.8);
        CHECK(ratio < 2.2);
    }
    CHECK(err.back() < 2 * 2.5e-3);

    // The sampled chain follows the same law.
    ou.step = 1e-2;
    const GaussianVector exact = euler_maruyama_law(ou, g);
    const TrajectoryBatch b = euler_maruyama(ou_spec(1e-2), g, 100'000, 8);
    CHECK(worst_z(moments(b.paths), exact.cov) < 3.0);
}

TEST_CASE("mimicking_sde") {
    const SdeSpec s = mimicking_sde(kernels::exponential_rate(RateFunction::constant(1.0)), RateFunction::constant(1.0),
                                    0, 1e-3);
    CHECK(s.drift(0.3, 2.0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(s.diffusion(0.3, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(s.initial_variance == 1.0);

    // Scale sigma(t) = t^H with zero rate: drift H Z / t.
    const Kernel fb = kernels::fbm(0.75);
    const SdeSpec f = mimicking_sde(fb, RateFunction::constant(0.0), 1.0, 1e-3);
    CHECK(f.drift(2.0, 1.0) == doctest::Approx(0.375).epsilon(1e-8));
    CHECK(f.diffusion(2.0, 1.0) == 0.0);
    CHECK_THROWS_AS(mimicking_sde(fb, RateFunction::infinite(), 1.0, 1e-3), InvalidRate);
}

TEST_CASE("figure_comparison") {
    const Kernel ex = kernels::exponential_rate(RateFunction::constant(1.0));
    const FigureReport r = figure_comparison(ex, RateFunction::constant(1.0), {0, 0.5, 1, 2}, 20'000, 31);
    CHECK(r.pass);
    CHECK(r.worst_pair_excess <= 0.0);

    const FigureReport z = figure_comparison(kernels::constant(), RateFunction::constant(0.0), {0, 1, 2}, 20'000, 32);
    CHECK(z.pass);
    CHECK(z.max_cov_discrepancy < 5 * z.sde.cov_se.maxCoeff());

    // fBm made Markov through its stationary representation: s^H t^H for H > 1/2.
    const Kernel fb = transform_kernel(kernels::fbm_log(0.75), TimeFunction::power(1.0, 0.75),
                                       TimeFunction::logarithm(0.5), Interval::positive());
    const Grid g{1, 1.25, 1.5, 2};
    FigureOptions opts;
    opts.route = GaussianRoute::Cholesky;
    opts.step = 1e-2;
    const FigureReport f = figure_comparison(fb, kernels::fbm_log_rate(0.75), g, 20'000, 33, opts);
    MatrixXd target(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) target(i, j) = std::pow(g[i] * g[j], 0.75);
    CHECK((f.analytic - target).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(worst_z(moments(f.gaussian_batch.paths), target) < 3.0);
    CHECK(worst_z(moments(f.sde_batch.paths), target, 2 * opts.step) < 3.0);
}
