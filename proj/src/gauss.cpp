#include "gmt/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "gmt/error.hpp"

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

double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

struct Blocks {
    std::vector<Index> offset;
    std::vector<Index> size;

    explicit Blocks(const std::vector<Index>& dims) {
        Index at = 0;
        for (Index d : dims) {
            if (d <= 0) throw InvalidInput("block dimensions must be positive");
            offset.push_back(at);
            size.push_back(d);
            at += d;
        }
    }
    Index total() const { return offset.empty() ? 0 : offset.back() + size.back(); }
    std::size_t count() const { return size.size(); }
};

void check_chain(const std::vector<TransportPlan>& plans) {
    if (plans.empty()) throw InvalidInput("empty plan list");
    for (std::size_t i = 0; i + 1 < plans.size(); ++i) {
        const GaussianVector a = plans[i].right();
        const GaussianVector b = plans[i + 1].left();
        if (a.dim() != b.dim()) {
            throw ChainMismatch("plan " + std::to_string(i) + " right marginal has dimension " +
                                std::to_string(a.dim()) + ", plan " + std::to_string(i + 1) +
                                " left marginal has " + std::to_string(b.dim()));
        }
        const double gap = std::max(max_abs(a.mean - b.mean), max_abs(a.cov - b.cov));
        if (gap > kMarginalTolerance) {
            throw ChainMismatch("marginals of plans " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                " differ by " + fmt(gap));
        }
    }
}

// Sigma_{j-1,j-1}^{-1} Sigma_{j-1,j} for each interior junction.
std::vector<MatrixXd> transfers(const std::vector<TransportPlan>& plans) {
    std::vector<MatrixXd> out;
    for (std::size_t j = 1; j < plans.size(); ++j) {
        const MatrixXd middle = plans[j].joint.cov.topLeftCorner(plans[j].left_dim, plans[j].left_dim);
        out.push_back(checked_cholesky(middle, "intermediate marginal").solve(plans[j].cross()));
    }
    return out;
}

}  // namespace

void GaussianVector::validate() const {
    const Index n = mean.size();
    if (cov.rows() != n || cov.cols() != n) throw InvalidInput("covariance shape does not match the mean");
    if (!times.empty()) {
        if (static_cast<Index>(times.size()) != n) throw InvalidInput("times do not match the dimension");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1])) throw InvalidInput("times must be strictly increasing");
        }
    }
    if (n == 0) return;
    const double scale = std::max(1.0, max_abs(cov));
    if (max_abs(cov - cov.transpose()) > 1e-12 * scale) throw InvalidInput("covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -1e-10 * cov.diagonal().maxCoeff()) {
        throw InvalidInput("covariance is not positive semi-definite (min eigenvalue " + fmt(min_eig) + ")");
    }
}

GaussianVector GaussianVector::project(const std::vector<Index>& indices) const {
    GaussianVector out;
    const auto k = static_cast<Index>(indices.size());
    out.mean.resize(k);
    out.cov.resize(k, k);
    for (Index a = 0; a < k; ++a) {
        if (indices[a] < 0 || indices[a] >= dim()) throw InvalidInput("projection index out of range");
        out.mean(a) = mean(indices[a]);
        for (Index b = 0; b < k; ++b) out.cov(a, b) = cov(indices[a], indices[b]);
        if (!times.empty()) out.times.push_back(times[indices[a]]);
    }
    return out;
}

GaussianVector GaussianVector::from_kernel(const Kernel& kernel, const Grid& times) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw InvalidInput("times must be strictly increasing");
    }
    return {times, kernel.mean_vector(times), kernel.gram(times)};
}

TransportPlan::TransportPlan(Index left, Index right, GaussianVector law)
    : left_dim(left), right_dim(right), joint(std::move(law)) {
    if (left <= 0 || right <= 0) throw InvalidInput("plan blocks must be non-empty");
    if (joint.dim() != left + right || joint.cov.rows() != left + right) {
        throw InvalidInput("plan joint law has the wrong dimension");
    }
}

GaussianVector TransportPlan::left() const {
    std::vector<Index> idx(static_cast<std::size_t>(left_dim));
    for (Index i = 0; i < left_dim; ++i) idx[i] = i;
    return joint.project(idx);
}

GaussianVector TransportPlan::right() const {
    std::vector<Index> idx(static_cast<std::size_t>(right_dim));
    for (Index i = 0; i < right_dim; ++i) idx[i] = left_dim + i;
    return joint.project(idx);
}

TransportPlan TransportPlan::from_kernel(const Kernel& kernel, double s, double t) {
    return TransportPlan(1, 1, GaussianVector::from_kernel(kernel, {s, t}));
}

Eigen::LLT<MatrixXd> checked_cholesky(const MatrixXd& block, const char* what) {
    if (block.rows() != block.cols() || block.rows() == 0) {
        throw InvalidInput(std::string(what) + ": block must be square and non-empty");
    }
    if (block.rows() == 1) {
        if (!(block(0, 0) > 0.0)) {
            throw SingularMarginal(std::string(what) + " has non-positive variance " + fmt(block(0, 0)));
        }
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> solver(block, Eigen::EigenvaluesOnly);
        const double lo = solver.eigenvalues().minCoeff();
        const double hi = solver.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo >= kConditionLimit) {
            throw SingularMarginal(std::string(what) + " is singular or ill-conditioned (eigenvalues " + fmt(lo) +
                                   ", " + fmt(hi) + ")");
        }
    }
    Eigen::LLT<MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) throw SingularMarginal(std::string(what) + ": Cholesky factorization failed");
    return llt;
}

ConditionalLaw condition(const TransportPlan& plan, const VectorXd& x) {
    if (x.size() != plan.left_dim) throw InvalidInput("condition: x has the wrong dimension");
    const Index l = plan.left_dim;
    const Index r = plan.right_dim;
    const MatrixXd& c = plan.joint.cov;
    const MatrixXd cross = c.topRightCorner(l, r);
    const MatrixXd solved = checked_cholesky(c.topLeftCorner(l, l), "left marginal").solve(cross);
    ConditionalLaw out;
    out.mean = plan.joint.mean.tail(r) + solved.transpose() * (x - plan.joint.mean.head(l));
    out.cov = c.bottomRightCorner(r, r) - cross.transpose() * solved;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

GaussianVector concatenate(const std::vector<TransportPlan>& plans) {
    check_chain(plans);
    const std::size_t p = plans.size();
    std::vector<Index> dims{plans.front().left_dim};
    for (const auto& plan : plans) dims.push_back(plan.right_dim);
    const Blocks blocks(dims);
    const std::vector<MatrixXd> transfer = transfers(plans);

    GaussianVector out;
    out.mean.resize(blocks.total());
    out.cov.resize(blocks.total(), blocks.total());
    bool labelled = true;
    for (const auto& plan : plans) labelled = labelled && !plan.joint.times.empty();

    auto block = [&](std::size_t i, std::size_t j) {
        return out.cov.block(blocks.offset[i], blocks.offset[j], blocks.size[i], blocks.size[j]);
    };
    for (std::size_t i = 0; i <= p; ++i) {
        const TransportPlan& src = i == 0 ? plans[0] : plans[i - 1];
        const GaussianVector marginal = i == 0 ? src.left() : src.right();
        out.mean.segment(blocks.offset[i], blocks.size[i]) = marginal.mean;
        block(i, i) = marginal.cov;
        if (labelled) out.times.insert(out.times.end(), marginal.times.begin(), marginal.times.end());
    }
    for (std::size_t i = 0; i < p; ++i) {
        MatrixXd acc = plans[i].cross();
        block(i, i + 1) = acc;
        for (std::size_t j = i + 2; j <= p; ++j) {
            acc = (acc * transfer[j - 2]).eval();
            block(i, j) = acc;
        }
    }
    for (std::size_t i = 0; i <= p; ++i) {
        for (std::size_t j = i + 1; j <= p; ++j) block(j, i) = block(i, j).transpose();
    }
    return out;
}

TransportPlan compose(const std::vector<TransportPlan>& plans) {
    check_chain(plans);
    if (plans.size() == 1) return plans.front();
    const std::vector<MatrixXd> transfer = transfers(plans);
    MatrixXd cross = plans.front().cross();
    for (const auto& t : transfer) cross = (cross * t).eval();

    const GaussianVector first = plans.front().left();
    const GaussianVector last = plans.back().right();
    const Index l = first.dim();
    const Index r = last.dim();
    GaussianVector joint;
    joint.mean.resize(l + r);
    joint.mean << first.mean, last.mean;
    joint.cov.resize(l + r, l + r);
    joint.cov.topLeftCorner(l, l) = first.cov;
    joint.cov.bottomRightCorner(r, r) = last.cov;
    joint.cov.topRightCorner(l, r) = cross;
    joint.cov.bottomLeftCorner(r, l) = cross.transpose();
    if (!first.times.empty() && !last.times.empty()) {
        joint.times = first.times;
        joint.times.insert(joint.times.end(), last.times.begin(), last.times.end());
    }
    return TransportPlan(l, r, std::move(joint));
}

MarkovReport markov_check(const GaussianVector& joint, const std::vector<Index>& block_dims) {
    const Blocks blocks(block_dims);
    if (blocks.total() != joint.dim() || joint.cov.rows() != joint.dim()) {
        throw InvalidInput("markov_check: block dimensions do not add up to the law dimension");
    }
    const std::size_t p = blocks.count();
    auto block = [&](std::size_t i, std::size_t j) {
        return joint.cov.block(blocks.offset[i], blocks.offset[j], blocks.size[i], blocks.size[j]);
    };
    std::vector<Eigen::LLT<MatrixXd>> factors;
    factors.reserve(p);
    for (std::size_t j = 0; j < p; ++j) factors.push_back(checked_cholesky(block(j, j), "diagonal block"));

    MarkovReport out;
    for (std::size_t j = 1; j + 1 < p; ++j) {
        for (std::size_t k = j + 1; k < p; ++k) {
            const MatrixXd right = factors[j].solve(MatrixXd(block(j, k)));
            for (std::size_t i = 0; i < j; ++i) {
                const MatrixXd residual = block(i, k) - block(i, j) * right;
                out.max_residual = std::max(out.max_residual, max_abs(residual));
            }
        }
    }
    out.is_markov = out.max_residual < 1e-8 * joint.cov.diagonal().maxCoeff();
    return out;
}

MarkovReport markov_check(const GaussianVector& joint) {
    return markov_check(joint, std::vector<Index>(static_cast<std::size_t>(joint.dim()), 1));
}

double gaussian_distance(const GaussianVector& a, const GaussianVector& b) {
    if (a.dim() != b.dim() || a.cov.rows() != b.cov.rows() || a.cov.cols() != b.cov.cols()) {
        throw InvalidInput("gaussian_distance: dimensions differ");
    }
    if (!a.times.empty() && !b.times.empty() && a.times != b.times) {
        throw InvalidInput("gaussian_distance: laws are indexed by different times");
    }
    return std::max(max_abs(a.mean - b.mean), max_abs(a.cov - b.cov));
}

}  // namespace gmt
