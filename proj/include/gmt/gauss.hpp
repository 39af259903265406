#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gmt/kernel.hpp"

namespace gmt {

/// Finite-dimensional Gaussian law. `times` labels the coordinates; it is
/// either empty (block laws with several coordinates per time) or strictly
/// increasing with one entry per coordinate.
struct GaussianVector {
    std::vector<double> times;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    Eigen::Index dim() const { return mean.size(); }

    /// Throws InvalidInput on shape, ordering, symmetry or PSD violations.
    void validate() const;

    GaussianVector project(const std::vector<Eigen::Index>& indices) const;

    static GaussianVector from_kernel(const Kernel& kernel, const Grid& times);
};

/// Joint law of a left block (left_dim coordinates) and a right block.
struct TransportPlan {
    Eigen::Index left_dim = 0;
    Eigen::Index right_dim = 0;
    GaussianVector joint;

    TransportPlan() = default;
    TransportPlan(Eigen::Index left, Eigen::Index right, GaussianVector law);

    GaussianVector left() const;
    GaussianVector right() const;
    Eigen::MatrixXd cross() const { return joint.cov.topRightCorner(left_dim, right_dim); }

    /// Two-time plan from a kernel.
    static TransportPlan from_kernel(const Kernel& kernel, double s, double t);
};

struct ConditionalLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

inline constexpr double kConditionLimit = 1e12;
inline constexpr double kMarginalTolerance = 1e-10;

/// Cholesky factor of an invertible covariance block; throws SingularMarginal
/// when the block is not positive definite or its condition number reaches 1e12.
Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& block, const char* what);

/// Law of the right block given the left block equals x.
ConditionalLaw condition(const TransportPlan& plan, const Eigen::VectorXd& x);

/// Chains plans whose consecutive marginals agree; returns the joint law of all blocks.
GaussianVector concatenate(const std::vector<TransportPlan>& plans);

/// Outer marginal pair of the concatenation.
TransportPlan compose(const std::vector<TransportPlan>& plans);

struct MarkovReport {
    double max_residual = 0.0;
    bool is_markov = false;
};

/// Residual of Sigma_ik = Sigma_ij Sigma_jj^{-1} Sigma_jk over all block triples i<j<k.
MarkovReport markov_check(const GaussianVector& joint, const std::vector<Eigen::Index>& block_dims);
/// One coordinate per block.
MarkovReport markov_check(const GaussianVector& joint);

/// Sup-norm distance on means and covariances.
double gaussian_distance(const GaussianVector& a, const GaussianVector& b);

}  // namespace gmt
