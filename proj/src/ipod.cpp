#include "transco/ipod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "transco/errors.hpp"
#include "transco/linalg.hpp"
#include "transco/thresholding.hpp"

namespace transco {

void Dataset::validate() const {
    if (X.rows() != Y.size()) {
        throw DimensionError("design has " + std::to_string(X.rows()) + " rows but response has " +
                             std::to_string(Y.size()) + " entries");
    }
    if (!X.allFinite() || !Y.allFinite()) {
        throw InvalidParameter("dataset contains non-finite values");
    }
}

std::vector<Eigen::Index> IpodFit::detected() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < gamma_hat.size(); ++i) {
        if (gamma_hat[i] != 0.0) out.push_back(i);
    }
    return out;
}

HatMatrix hat_matrix(const Eigen::MatrixXd& X) {
    LeastSquares ls(X);
    return {ls.q() * ls.q().transpose(), ls.leverage()};
}

double bic_star(double rss, long m, long q) {
    if (m < 1) throw InvalidParameter("BIC residual dimension must be positive");
    if (q < 1) throw InvalidParameter("BIC parameter count must be positive");
    if (!(rss >= 0.0)) throw InvalidParameter("BIC residual sum of squares must be nonnegative");
    if (rss == 0.0) return -std::numeric_limits<double>::infinity();
    const double md = static_cast<double>(m);
    return md * std::log(rss / md) + static_cast<double>(q) * (std::log(md) + 1.0);
}

std::vector<double> penalty_grid(double lambda_max, int grid_size) {
    if (grid_size < 2) throw InvalidParameter("grid size must be at least 2");
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
        throw InvalidParameter("grid top must be finite and nonnegative");
    }
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(grid_size) + 1);
    if (lambda_max == 0.0) {
        grid.assign(static_cast<std::size_t>(grid_size) + 1, 0.0);
        return grid;
    }
    const double top = std::log(lambda_max);
    const double bottom = std::log(lambda_max * 1e-3);
    for (int i = 0; i < grid_size; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid_size - 1);
        grid.push_back(i == 0 ? lambda_max : std::exp(top + t * (bottom - top)));
    }
    grid.push_back(0.0);
    return grid;
}

void select_best(TuningPath& path, long m) {
    const std::size_t L = path.lambdas.size();
    path.eligible.assign(L, false);
    path.best_index = 0;
    bool found = false;
    for (std::size_t k = 0; k < L; ++k) {
        const long q = path.df[k] + 1;
        if (q >= m || path.lambdas[k] < path.noise_floor[k]) break;
        path.eligible[k] = true;
        if (!found || path.bic[k] < path.bic[path.best_index]) {
            path.best_index = k;
            found = true;
        }
    }
}

namespace {

struct IpodWork {
    const LeastSquares& ls;
    Eigen::VectorXd r;       // (I - H) Y
    Eigen::VectorXd scale;   // sqrt(1 - h_i)
};

// Runs gamma <- Theta(H gamma + r; lambda_i) in place; returns (iterations, converged).
std::pair<int, bool> iterate(const IpodWork& w, double lambda_adj, double tol, int max_iter,
                             Eigen::VectorXd& gamma) {
    const Eigen::MatrixXd& Q = w.ls.q();
    const Eigen::Index n = gamma.size();
    const Eigen::Index p = Q.cols();
    Eigen::VectorXd t(p);
    Eigen::VectorXd next(n);
    for (int it = 1; it <= max_iter; ++it) {
        t.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (gamma[i] != 0.0) t.noalias() += gamma[i] * Q.row(i).transpose();
        }
        next.noalias() = Q * t;
        next += w.r;
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = std::abs(next[i]) <= lambda_adj * w.scale[i] ? 0.0 : next[i];
            change = std::max(change, std::abs(v - gamma[i]));
            gamma[i] = v;
        }
        if (!std::isfinite(change)) throw NumericalFailure("non-finite values in outlier iteration");
        if (change < tol) return {it, true};
    }
    return {max_iter, false};
}

void check_ipod_inputs(const Dataset& data, double tol, int max_iter) {
    data.validate();
    if (data.rows() <= data.cols()) {
        throw InvalidParameter("robust fit requires more rows than columns (n = " +
                               std::to_string(data.rows()) + ", p = " + std::to_string(data.cols()) + ")");
    }
    if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");
    if (max_iter < 1) throw InvalidParameter("max_iter must be at least 1");
}

Eigen::VectorXd leverage_scale(const LeastSquares& ls) {
    return (1.0 - ls.leverage().array()).max(0.0).sqrt().matrix();
}

// Smallest penalty at which the first thresholding step keeps gamma at zero.
double range_top(const IpodWork& w) {
    double top = 0.0;
    for (Eigen::Index i = 0; i < w.r.size(); ++i) {
        if (w.scale[i] > 1e-12) top = std::max(top, std::abs(w.r[i]) / w.scale[i]);
    }
    // Guard against a rounding survivor exactly at the top of the grid.
    return top * (1.0 + 1e-9);
}

double residual_norm2(const LeastSquares& ls, const Eigen::VectorXd& Y, const Eigen::VectorXd& gamma) {
    return ls.residual(Y - gamma).squaredNorm();
}

IpodFit finish(const LeastSquares& ls, const Dataset& data, Eigen::VectorXd gamma, double lambda_adj,
               std::pair<int, bool> status) {
    IpodFit fit;
    fit.beta_hat = ls.coefficients(data.Y - gamma);
    require_finite(fit.beta_hat, "robust coefficient estimate");
    const long m = static_cast<long>(data.rows() - data.cols());
    const long q = static_cast<long>((gamma.array() != 0.0).count()) + 1;
    fit.bic = bic_star(residual_norm2(ls, data.Y, gamma), m, q);
    fit.gamma_hat = std::move(gamma);
    fit.lambda_adj = lambda_adj;
    fit.iterations = status.first;
    fit.converged = status.second;
    return fit;
}

}  // namespace

IpodFit ipod_fit(const Dataset& data, double lambda_adj, double tol, int max_iter,
                 const std::optional<Eigen::VectorXd>& gamma_init) {
    check_ipod_inputs(data, tol, max_iter);
    if (!(lambda_adj >= 0.0)) throw InvalidParameter("lambda_adj must be nonnegative");
    LeastSquares ls(data.X);
    IpodWork work{ls, ls.residual(data.Y), leverage_scale(ls)};
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(data.rows());
    int spent = 0;
    if (gamma_init) {
        if (gamma_init->size() != data.rows()) throw DimensionError("gamma_init has the wrong length");
        gamma = *gamma_init;
    } else {
        // Start from gamma = 0 at the top of the penalty range and follow the warm-started
        // path down to lambda_adj.
        for (double level : penalty_grid(range_top(work), IpodOptions{}.grid_size)) {
            if (level <= lambda_adj) break;
            spent += iterate(work, level, tol, max_iter, gamma).first;
        }
    }
    auto status = iterate(work, lambda_adj, tol, max_iter, gamma);
    status.first += spent;
    return finish(ls, data, std::move(gamma), lambda_adj, status);
}

double ipod_objective(const Dataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma,
                      double lambda_adj) {
    data.validate();
    LeastSquares ls(data.X);
    const Eigen::VectorXd lambdas = lambda_adj * leverage_scale(ls);
    const Eigen::VectorXd res = data.Y - data.X * beta - gamma;
    return 0.5 * res.squaredNorm() + hard_penalty_sum(gamma, lambdas);
}

std::pair<TuningPath, IpodFit> ipod_bic_path(const Dataset& data, const IpodOptions& options) {
    check_ipod_inputs(data, options.tol, options.max_iter);
    LeastSquares ls(data.X);
    IpodWork work{ls, ls.residual(data.Y), leverage_scale(ls)};
    const Eigen::Index n = data.rows();
    const long m = static_cast<long>(n - data.cols());

    const double lambda_max = range_top(work);

    TuningPath path;
    path.lambdas = penalty_grid(lambda_max, options.grid_size);
    const double log_factor = std::sqrt(2.0 * std::log(static_cast<double>(n)));

    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
    std::vector<IpodFit> fits;
    fits.reserve(path.lambdas.size());
    for (double lambda : path.lambdas) {
        const auto status = iterate(work, lambda, options.tol, options.max_iter, gamma);
        const Eigen::VectorXd res = ls.residual(data.Y - gamma);
        const long df = static_cast<long>((gamma.array() != 0.0).count());
        std::vector<double> clean;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (work.scale[i] > 1e-12) clean.push_back((res[i] + gamma[i]) / work.scale[i]);
        }
        path.df.push_back(df);
        path.rss.push_back(res.squaredNorm());
        path.bic.push_back(bic_star(res.squaredNorm(), m, df + 1));
        path.noise_floor.push_back(mad_scale(std::move(clean)) * log_factor);
        fits.push_back(finish(ls, data, gamma, lambda, status));
    }
    select_best(path, m);
    IpodFit best = std::move(fits[path.best_index]);
    return {std::move(path), std::move(best)};
}

}  // namespace transco
