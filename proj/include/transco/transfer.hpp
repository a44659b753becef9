#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "transco/baselines.hpp"
#include "transco/dataset.hpp"
#include "transco/ipod.hpp"
#include "transco/linalg.hpp"

namespace transco {

/// Robust per-source fits: column k of B_hat is the coefficient estimate of source k.
struct SourceEnsemble {
    Eigen::MatrixXd B_hat;
    std::vector<Eigen::VectorXd> gamma_hats;
    std::vector<int> iterations;
    std::vector<double> lambda_adj;

    Eigen::Index K() const { return B_hat.cols(); }
};

/// Precomputed pieces of the profiled (Z w eliminated) target model.
struct TransformCache {
    Eigen::MatrixXd Z;        // X B
    Eigen::MatrixXd M;        // [X | I]
    double k0 = 0.0;          // sigma_max(M) + 1
    Eigen::MatrixXd P;        // C^{-1/2} U_c^T, (n-K) x n
    Eigen::MatrixXd A;        // P M
    Eigen::VectorXd Y_tilde;  // P Y
    LeastSquares z_solver;    // least squares on Z
};

struct TransferState {
    Eigen::VectorXd w;
    Eigen::VectorXd delta;
    Eigen::VectorXd gamma;
    double objective = 0.0;

    /// [delta; gamma]
    Eigen::VectorXd xi() const;
};

struct TransferFit {
    Eigen::VectorXd w_hat;
    Eigen::VectorXd delta_hat;
    Eigen::VectorXd gamma_hat;
    Eigen::VectorXd beta_hat;
    double lambda = 0.0;
    /// Objective after initialisation and after every iteration.
    std::vector<double> objective_trace;
    /// Objective after the weight update of iteration i, before its thresholding step.
    std::vector<double> half_step_trace;
    int iterations = 0;
    bool converged = false;
    double bic = 0.0;
    /// || B^T (X^T X / n) delta_hat ||_inf; zero when the identification condition holds exactly.
    double identification_gap = 0.0;

    std::vector<Eigen::Index> detected() const;
};

struct TransferOptions {
    double tol = 1e-6;
    int max_iter = 2000;
    int grid_size = 40;
    /// Solve the sparse problem on unit-norm columns of X; estimates are mapped back.
    bool normalize_columns = true;
    IpodOptions source;
    LassoOptions init_lasso;
};

SourceEnsemble fit_sources(const std::vector<Dataset>& sources, const IpodOptions& options = {});

TransformCache build_transform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_hat, const Eigen::VectorXd& Y);

/// Objective of the joint problem with the step-consistent penalty:
/// 1/2 ||Y - X B w - X delta - gamma||^2 + k0^2 sum P(xi_j; lambda / k0^2).
double transco_objective(const TransferState& state, const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_hat,
                         const Eigen::VectorXd& Y, double lambda, double k0);

/// One iteration: least-squares weights, then a simultaneous thresholded gradient step on (delta, gamma).
TransferState transco_step(const TransferState& state, const TransformCache& cache, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& B_hat, const Eigen::VectorXd& Y, double lambda);

TransferFit transco_fit(const Dataset& target, const SourceEnsemble& ensemble, double lambda, double tol = 1e-6,
                        int max_iter = 2000, const std::optional<TransferState>& init = std::nullopt,
                        const TransferOptions& options = {});

std::pair<TuningPath, TransferFit> transco_bic_path(const Dataset& target, const SourceEnsemble& ensemble,
                                                    const TransferOptions& options = {});

TransferFit transco_full(const Dataset& target, const std::vector<Dataset>& sources,
                         const TransferOptions& options = {});

/// Outlier-robust fit of a single dataset with p >= n: the joint solver without sources.
std::pair<TuningPath, TransferFit> ipod_highdim_bic_path(const Dataset& data, const TransferOptions& options = {});

}  // namespace transco
