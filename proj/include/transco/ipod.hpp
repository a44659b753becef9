#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "transco/dataset.hpp"

namespace transco {

struct IpodOptions {
    double tol = 1e-6;
    int max_iter = 500;
    int grid_size = 40;
};

struct IpodFit {
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd gamma_hat;
    double lambda_adj = 0.0;
    int iterations = 0;
    bool converged = false;
    double bic = 0.0;

    std::vector<Eigen::Index> detected() const;
};

/// Penalty path with per-level fit summaries.
///
/// `bic` holds the raw criterion. Walking down from the largest penalty, levels
/// are `eligible` until the first one whose fit leaves no residual degrees of
/// freedom (q >= m) or whose penalty falls below the robust noise floor estimated
/// from that same fit. `best_index` is the eligible level with the smallest
/// criterion, ties going to the larger penalty.
struct TuningPath {
    std::vector<double> lambdas;
    std::vector<long> df;
    std::vector<double> rss;
    std::vector<double> bic;
    std::vector<double> noise_floor;
    std::vector<bool> eligible;
    std::size_t best_index = 0;

    std::size_t size() const { return lambdas.size(); }
};

struct HatMatrix {
    Eigen::MatrixXd H;
    Eigen::VectorXd h_diag;
};

HatMatrix hat_matrix(const Eigen::MatrixXd& X);

/// Without `gamma_init` the iteration starts from gamma = 0 at the top of the penalty
/// range and is warm-started down the default grid to `lambda_adj`.
IpodFit ipod_fit(const Dataset& data, double lambda_adj, double tol = 1e-6, int max_iter = 500,
                 const std::optional<Eigen::VectorXd>& gamma_init = std::nullopt);

/// 1/2 ||Y - X beta - gamma||^2 + sum_i P(gamma_i; lambda_adj sqrt(1 - h_i)).
double ipod_objective(const Dataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma,
                      double lambda_adj);

/// m log(rss/m) + q (log m + 1); -infinity when rss == 0.
double bic_star(double rss, long m, long q);

/// Descending grid: `grid_size` log-spaced points from lambda_max to lambda_max * 1e-3, then 0.
std::vector<double> penalty_grid(double lambda_max, int grid_size);

/// Fills `eligible` and `best_index` from the other columns; m is the residual dimension.
void select_best(TuningPath& path, long m);

std::pair<TuningPath, IpodFit> ipod_bic_path(const Dataset& data, const IpodOptions& options = {});

}  // namespace transco
