#include "transco/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "transco/errors.hpp"
#include "transco/linalg.hpp"
#include "transco/transfer.hpp"

namespace transco {

namespace {

double soft(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
    if (X.rows() != Y.size()) throw DimensionError("design rows and response length differ");
    if (!X.allFinite() || !Y.allFinite()) throw InvalidParameter("non-finite input to regression");
}

// Cyclic coordinate descent on a residual kept in sync with beta.
void cd_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& col_sq, double lambda, double tol,
              int max_iter, Eigen::VectorXd& beta, Eigen::VectorXd& resid) {
    const Eigen::Index p = X.cols();
    for (int it = 0; it < max_iter; ++it) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) {
                beta[j] = 0.0;
                continue;
            }
            const double old = beta[j];
            const double z = X.col(j).dot(resid) + col_sq[j] * old;
            const double next = soft(z, lambda) / col_sq[j];
            if (next != old) {
                resid.noalias() -= (next - old) * X.col(j);
                beta[j] = next;
                change = std::max(change, std::abs(next - old));
            }
        }
        if (change < tol) return;
    }
}

}  // namespace

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
    check_xy(X, Y);
    return LeastSquares(X).coefficients(Y);
}

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts,
                         const Eigen::VectorXd* warm_start) {
    check_xy(X, Y);
    if (!(opts.lambda >= 0.0)) throw InvalidParameter("lasso penalty must be nonnegative");
    if (!(opts.tol > 0.0)) throw InvalidParameter("lasso tolerance must be positive");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    if (warm_start) {
        if (warm_start->size() != X.cols()) throw DimensionError("lasso warm start has the wrong length");
        beta = *warm_start;
    }
    Eigen::VectorXd resid = Y - X * beta;
    const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose();
    cd_solve(X, col_sq, opts.lambda, opts.tol, opts.max_iter, beta, resid);
    require_finite(beta, "lasso coefficients");
    return beta;
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const Eigen::VectorXd& beta,
                       double lambda) {
    return 0.5 * (Y - X * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

std::vector<double> lasso_cv_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts) {
    if (!opts.grid.empty()) return opts.grid;
    if (opts.grid_size < 1) throw InvalidParameter("lasso grid size must be positive");
    const double n = static_cast<double>(X.rows());
    const double top = X.cols() > 0 ? (X.transpose() * Y).cwiseAbs().maxCoeff() / n : 0.0;
    std::vector<double> grid;
    if (top <= 0.0) return {0.0};
    for (int i = 0; i < opts.grid_size; ++i) {
        const double t = opts.grid_size == 1 ? 0.0 : static_cast<double>(i) / (opts.grid_size - 1);
        grid.push_back(top * std::pow(opts.grid_ratio, t));
    }
    return grid;
}

Eigen::VectorXd lasso_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts) {
    check_xy(X, Y);
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (opts.folds < 2) throw InvalidParameter("lasso cross-validation needs at least 2 folds");
    if (n < opts.folds) {
        throw InvalidParameter("lasso cross-validation needs at least as many rows as folds");
    }
    const std::vector<double> grid = lasso_cv_grid(X, Y, opts);
    const std::size_t L = grid.size();
    std::vector<double> cv_error(L, 0.0);

    for (int f = 0; f < opts.folds; ++f) {
        const Eigen::Index lo = n * f / opts.folds;
        const Eigen::Index hi = n * (f + 1) / opts.folds;
        const Eigen::Index m = n - (hi - lo);
        Eigen::MatrixXd Xt(m, p);
        Eigen::VectorXd Yt(m);
        Xt << X.topRows(lo), X.bottomRows(n - hi);
        Yt << Y.head(lo), Y.tail(n - hi);
        const Eigen::Index hold = hi - lo;
        const auto Xv = X.middleRows(lo, hold);
        const auto Yv = Y.segment(lo, hold);
        const Eigen::VectorXd col_sq = Xt.colwise().squaredNorm().transpose();
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd resid = Yt;
        for (std::size_t k = 0; k < L; ++k) {
            cd_solve(Xt, col_sq, grid[k] * static_cast<double>(m), opts.tol, opts.max_iter, beta, resid);
            cv_error[k] += (Yv - Xv * beta).squaredNorm();
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < L; ++k) {
        if (cv_error[k] < cv_error[best]) best = k;
    }

    const Eigen::VectorXd col_sq = X.colwise().squaredNorm().transpose();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = Y;
    for (std::size_t k = 0; k <= best; ++k) {
        cd_solve(X, col_sq, grid[k] * static_cast<double>(n), opts.tol, opts.max_iter, beta, resid);
    }
    require_finite(beta, "cross-validated lasso coefficients");
    return beta;
}

Eigen::VectorXd ptl_fit(const Dataset& target, const SourceEnsemble& ensemble, const LassoOptions& opts) {
    target.validate();
    const Eigen::MatrixXd& B = ensemble.B_hat;
    if (B.rows() != target.cols()) throw DimensionError("coefficient bank rows must equal target columns");
    if (target.rows() <= B.cols()) throw InvalidParameter("profiled transfer requires n > K");
    const Eigen::MatrixXd Z = target.X * B;
    LeastSquares zls;
    try {
        zls = LeastSquares(Z);
    } catch (const SingularDesign& e) {
        throw Degeneracy(std::string("transferred design X B is degenerate: ") + e.what());
    }
    const Eigen::VectorXd w = zls.coefficients(target.Y);
    const Eigen::VectorXd e = target.Y - Z * w;
    return B * w + lasso_cv(target.X, e, opts);
}

}  // namespace transco
