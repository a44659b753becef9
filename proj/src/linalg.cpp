#include "transco/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "transco/errors.hpp"

namespace transco {

LeastSquares::LeastSquares(const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (p > n) {
        throw SingularDesign("design has more columns (" + std::to_string(p) + ") than rows (" +
                                 std::to_string(n) + ")",
                             static_cast<long>(n), static_cast<long>(p));
    }
    if (p == 0) {
        q_ = Eigen::MatrixXd(n, 0);
        leverage_ = Eigen::VectorXd::Zero(n);
        return;
    }
    qr_.compute(X);
    const Eigen::MatrixXd R = qr_.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::Index rank = numerical_rank(R);
    if (rank < p) {
        throw SingularDesign("design is rank deficient: numerical rank " + std::to_string(rank) +
                                 " of " + std::to_string(p) + " columns",
                             static_cast<long>(rank), static_cast<long>(p));
    }
    q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(n, p);
    leverage_ = q_.rowwise().squaredNorm();
}

Eigen::VectorXd LeastSquares::coefficients(const Eigen::VectorXd& y) const {
    if (y.size() != rows()) throw DimensionError("response length does not match design rows");
    if (cols() == 0) return Eigen::VectorXd(0);
    return qr_.solve(y);
}

Eigen::VectorXd LeastSquares::project(const Eigen::VectorXd& v) const {
    if (v.size() != rows()) throw DimensionError("vector length does not match design rows");
    if (cols() == 0) return Eigen::VectorXd::Zero(rows());
    return q_ * (q_.transpose() * v);
}

Eigen::VectorXd LeastSquares::residual(const Eigen::VectorXd& v) const {
    return v - project(v);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const Eigen::VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > kRankTolerance * s[0]) ++r;
    }
    return r;
}

double max_singular_value(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    // The largest eigenvalue of the smaller Gram matrix is cheaper than a full SVD.
    const Eigen::MatrixXd G = A.rows() <= A.cols() ? Eigen::MatrixXd(A * A.transpose())
                                                   : Eigen::MatrixXd(A.transpose() * A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double mad_scale(std::vector<double> values) {
    const std::size_t n = values.size();
    if (n < 3) return 0.0;
    auto median = [](std::vector<double>& v) {
        const std::size_t m = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
        double hi = v[m];
        if (v.size() % 2 == 1) return hi;
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
        return 0.5 * (lo + hi);
    };
    const double med = median(values);
    for (double& x : values) x = std::abs(x - med);
    return 1.4826 * median(values);
}

void require_finite(const Eigen::MatrixXd& A, const char* what) {
    if (!A.allFinite()) throw NumericalFailure(std::string("non-finite values in ") + what);
}

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) throw NumericalFailure(std::string("non-finite values in ") + what);
}

}  // namespace transco
