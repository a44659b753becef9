#pragma once

#include <vector>

#include <Eigen/Dense>

namespace transco {

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares solver for a fixed design, built on a column-pivoted QR.
/// Keeps the thin orthogonal factor so projections cost O(np).
class LeastSquares {
public:
    LeastSquares() = default;
    explicit LeastSquares(const Eigen::MatrixXd& X);

    Eigen::Index rows() const { return q_.rows(); }
    Eigen::Index cols() const { return q_.cols(); }

    Eigen::VectorXd coefficients(const Eigen::VectorXd& y) const;
    Eigen::VectorXd project(const Eigen::VectorXd& v) const;
    Eigen::VectorXd residual(const Eigen::VectorXd& v) const;

    /// Diagonal of the hat matrix.
    const Eigen::VectorXd& leverage() const { return leverage_; }
    const Eigen::MatrixXd& q() const { return q_; }

private:
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd q_;
    Eigen::VectorXd leverage_;
};

/// Numerical rank with the relative cutoff kRankTolerance.
Eigen::Index numerical_rank(const Eigen::MatrixXd& A);

double max_singular_value(const Eigen::MatrixXd& A);

/// 1.4826 * median absolute deviation; 0 for fewer than three values.
double mad_scale(std::vector<double> values);

/// Throws NumericalFailure naming `what` when any entry is not finite.
void require_finite(const Eigen::MatrixXd& A, const char* what);
void require_finite(const Eigen::VectorXd& v, const char* what);

}  // namespace transco
