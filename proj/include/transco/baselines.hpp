#pragma once

#include <vector>

#include <Eigen/Dense>

#include "transco/dataset.hpp"

namespace transco {

struct SourceEnsemble;

/// Settings for the lasso solvers.
///
/// `lambda` is the penalty of 1/2 ||Y - X b||^2 + lambda ||b||_1 for lasso_cd.
/// Cross-validation works with per-observation penalties `alpha`, applied to a
/// training fold of size m as lambda = alpha * m; an empty `grid` means
/// `grid_size` log-spaced values from ||X^T Y||_inf / n down by `grid_ratio`.
struct LassoOptions {
    double lambda = 0.0;
    std::vector<double> grid;
    double tol = 1e-8;
    int max_iter = 20000;
    int folds = 5;
    int grid_size = 50;
    double grid_ratio = 1e-3;
};

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

Eigen::VectorXd lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts,
                         const Eigen::VectorXd* warm_start = nullptr);

/// 1/2 ||Y - X b||^2 + lambda ||b||_1.
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const Eigen::VectorXd& beta,
                       double lambda);

/// The per-observation grid used by lasso_cv when opts.grid is empty.
std::vector<double> lasso_cv_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts);

Eigen::VectorXd lasso_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const LassoOptions& opts = {});

/// Profiled transfer: OLS of Y on Z = X B, then cross-validated lasso on the profiled residual.
Eigen::VectorXd ptl_fit(const Dataset& target, const SourceEnsemble& ensemble, const LassoOptions& opts = {});

}  // namespace transco
