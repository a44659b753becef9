#include "transco/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "transco/errors.hpp"
#include "transco/thresholding.hpp"

namespace transco {

Eigen::VectorXd TransferState::xi() const {
    Eigen::VectorXd out(delta.size() + gamma.size());
    out << delta, gamma;
    return out;
}

std::vector<Eigen::Index> TransferFit::detected() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < gamma_hat.size(); ++i) {
        if (gamma_hat[i] != 0.0) out.push_back(i);
    }
    return out;
}

namespace {

Eigen::VectorXd sparse_product(const Eigen::MatrixXd& X, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (v[j] != 0.0) out.noalias() += v[j] * X.col(j);
    }
    return out;
}

double scaled_penalty(const Eigen::VectorXd& v, double lambda, double k2) {
    return k2 * hard_penalty_sum(v, lambda / k2);
}

double objective_core(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y,
                      const TransferState& s, double lambda, double k2) {
    const Eigen::VectorXd r = Y - Z * s.w - sparse_product(X, s.delta) - s.gamma;
    return 0.5 * r.squaredNorm() + scaled_penalty(s.delta, lambda, k2) + scaled_penalty(s.gamma, lambda, k2);
}

struct StepResult {
    TransferState state;
    double half = 0.0;
    double gamma_change = 0.0;
};

StepResult step_core(const Eigen::MatrixXd& X, const TransformCache& cache, const Eigen::VectorXd& Y,
                     const TransferState& s, double lambda) {
    const double k2 = cache.k0 * cache.k0;
    const double level = lambda / k2;
    const Eigen::VectorXd base = Y - sparse_product(X, s.delta) - s.gamma;

    StepResult out;
    out.state.w = cache.z_solver.coefficients(base);
    const Eigen::VectorXd r = base - cache.Z * out.state.w;
    out.half = 0.5 * r.squaredNorm() + scaled_penalty(s.delta, lambda, k2) + scaled_penalty(s.gamma, lambda, k2);

    const Eigen::VectorXd grad_delta = X.transpose() * r;
    out.state.delta.resize(s.delta.size());
    for (Eigen::Index j = 0; j < s.delta.size(); ++j) {
        const double t = s.delta[j] + grad_delta[j] / k2;
        out.state.delta[j] = std::abs(t) <= level ? 0.0 : t;
    }
    out.state.gamma.resize(s.gamma.size());
    for (Eigen::Index i = 0; i < s.gamma.size(); ++i) {
        const double t = s.gamma[i] + r[i] / k2;
        const double v = std::abs(t) <= level ? 0.0 : t;
        out.gamma_change = std::max(out.gamma_change, std::abs(v - s.gamma[i]));
        out.state.gamma[i] = v;
    }
    if (!out.state.delta.allFinite() || !out.state.gamma.allFinite() || !std::isfinite(out.half)) {
        throw NumericalFailure("non-finite values in transfer iteration");
    }
    out.state.objective = objective_core(X, cache.Z, Y, out.state, lambda, k2);
    return out;
}

void check_state(const TransferState& s, Eigen::Index p, Eigen::Index n, Eigen::Index K) {
    if (s.delta.size() != p || s.gamma.size() != n || (s.w.size() != K && s.w.size() != 0)) {
        throw DimensionError("transfer state dimensions do not match the problem");
    }
}

// Problem solved on (optionally) unit-norm columns: X_w = X D^{-1}, B_w = D B, so X_w B_w = X B.
struct Working {
    Eigen::MatrixXd X;
    Eigen::VectorXd scale;
    Eigen::MatrixXd B;
    Eigen::VectorXd Y;
    TransformCache cache;
};

Working make_working(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B, const Eigen::VectorXd& Y, bool normalize) {
    Working w;
    w.scale = Eigen::VectorXd::Ones(X.cols());
    if (normalize) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double c = X.col(j).norm();
            if (c > 0.0) w.scale[j] = c;
        }
    }
    w.X = X * w.scale.cwiseInverse().asDiagonal();
    w.B = w.scale.asDiagonal() * B;
    w.Y = Y;
    w.cache = build_transform(w.X, w.B, Y);
    return w;
}

TransferState initial_state(const Working& wk, const Eigen::VectorXd& delta0, const Eigen::VectorXd& gamma0,
                            double lambda) {
    TransferState s;
    s.delta = delta0;
    s.gamma = gamma0;
    s.w = wk.cache.z_solver.coefficients(wk.Y - sparse_product(wk.X, s.delta) - s.gamma);
    const double k2 = wk.cache.k0 * wk.cache.k0;
    s.objective = objective_core(wk.X, wk.cache.Z, wk.Y, s, lambda, k2);
    return s;
}

struct RunResult {
    TransferState state;
    std::vector<double> trace;
    std::vector<double> half;
    int iterations = 0;
    bool converged = false;
};

RunResult run(const Working& wk, TransferState state, double lambda, double tol, int max_iter) {
    const double k2 = wk.cache.k0 * wk.cache.k0;
    state.objective = objective_core(wk.X, wk.cache.Z, wk.Y, state, lambda, k2);
    RunResult out;
    out.trace.reserve(static_cast<std::size_t>(max_iter) + 1);
    out.trace.push_back(state.objective);
    for (int it = 1; it <= max_iter; ++it) {
        StepResult sr = step_core(wk.X, wk.cache, wk.Y, state, lambda);
        state = std::move(sr.state);
        out.half.push_back(sr.half);
        out.trace.push_back(state.objective);
        out.iterations = it;
        if (sr.gamma_change < tol) {
            out.converged = true;
            break;
        }
    }
    out.state = std::move(state);
    return out;
}

TransferFit to_fit(const Working& wk, const Eigen::MatrixXd& X_raw, const Eigen::MatrixXd& B_raw, RunResult&& rr,
                   double lambda) {
    TransferFit fit;
    fit.w_hat = rr.state.w;
    fit.delta_hat = rr.state.delta.cwiseQuotient(wk.scale);
    fit.gamma_hat = rr.state.gamma;
    fit.beta_hat = B_raw * fit.w_hat + fit.delta_hat;
    fit.lambda = lambda;
    fit.objective_trace = std::move(rr.trace);
    fit.half_step_trace = std::move(rr.half);
    fit.iterations = rr.iterations;
    fit.converged = rr.converged;
    if (B_raw.cols() > 0 && X_raw.rows() > 0) {
        const Eigen::VectorXd g = B_raw.transpose() * (X_raw.transpose() * (X_raw * fit.delta_hat)) /
                                  static_cast<double>(X_raw.rows());
        fit.identification_gap = g.cwiseAbs().maxCoeff();
    }
    require_finite(fit.beta_hat, "transfer coefficient estimate");
    return fit;
}

double transformed_rss(const TransformCache& cache, const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma) {
    const Eigen::Index p = delta.size();
    Eigen::VectorXd fitted = cache.P * gamma;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (delta[j] != 0.0) fitted.noalias() += delta[j] * cache.A.col(j);
    }
    return (cache.Y_tilde - fitted).squaredNorm();
}

Eigen::VectorXd default_beta0(const Dataset& target, const LassoOptions& lasso) {
    if (target.rows() > target.cols()) return ols_fit(target.X, target.Y);
    return lasso_cv(target.X, target.Y, lasso);
}

void check_target(const Dataset& target, const Eigen::MatrixXd& B, double tol, int max_iter) {
    target.validate();
    if (B.rows() != target.cols()) {
        throw DimensionError("coefficient bank has " + std::to_string(B.rows()) + " rows, target has " +
                             std::to_string(target.cols()) + " columns");
    }
    if (target.rows() <= B.cols()) throw InvalidParameter("transfer fit requires n > K");
    if (!(tol > 0.0)) throw InvalidParameter("tolerance must be positive");
    if (max_iter < 1) throw InvalidParameter("max_iter must be at least 1");
}

std::pair<TuningPath, TransferFit> bic_path_core(const Dataset& target, const Eigen::MatrixXd& B,
                                                 const TransferOptions& options, bool absorb_beta0) {
    check_target(target, B, options.tol, options.max_iter);
    const Working wk = make_working(target.X, B, target.Y, options.normalize_columns);
    const Eigen::Index n = target.rows();
    const Eigen::Index p = target.cols();
    const long m = static_cast<long>(n - B.cols());
    const double k2 = wk.cache.k0 * wk.cache.k0;

    const Eigen::VectorXd beta0 = default_beta0(target, options.init_lasso);
    const Eigen::VectorXd gamma0 = target.Y - target.X * beta0;
    const Eigen::VectorXd delta0 =
        absorb_beta0 ? Eigen::VectorXd(beta0.cwiseProduct(wk.scale)) : Eigen::VectorXd(Eigen::VectorXd::Zero(p));
    TransferState state = initial_state(wk, delta0, gamma0, 0.0);

    // Smallest penalty that zeroes every coordinate of the first thresholded step.
    const Eigen::VectorXd r0 = wk.Y - wk.cache.Z * state.w - sparse_product(wk.X, state.delta) - state.gamma;
    Eigen::VectorXd t(p + n);
    t << state.delta + wk.X.transpose() * r0 / k2, state.gamma + r0 / k2;
    const double lambda_max = k2 * t.cwiseAbs().maxCoeff() * (1.0 + 1e-9);

    TuningPath path;
    path.lambdas = penalty_grid(lambda_max, options.grid_size);
    const double log_factor = std::sqrt(2.0 * std::log(static_cast<double>(n + p)));

    std::vector<TransferFit> fits;
    fits.reserve(path.lambdas.size());
    for (double lambda : path.lambdas) {
        RunResult rr = run(wk, state, lambda, options.tol, options.max_iter);
        state = rr.state;
        const Eigen::VectorXd r = wk.Y - wk.cache.Z * state.w - sparse_product(wk.X, state.delta) - state.gamma;
        std::vector<double> clean;
        for (Eigen::Index i = 0; i < n; ++i) {
            clean.push_back(r[i] + state.gamma[i]);
        }
        const long df = static_cast<long>((state.delta.array() != 0.0).count() + (state.gamma.array() != 0.0).count());
        const double rss = transformed_rss(wk.cache, state.delta, state.gamma);
        path.df.push_back(df);
        path.rss.push_back(rss);
        path.bic.push_back(m >= 1 ? bic_star(rss, m, df + 1) : 0.0);
        path.noise_floor.push_back(mad_scale(std::move(clean)) * log_factor);
        TransferFit fit = to_fit(wk, target.X, B, std::move(rr), lambda);
        fit.bic = path.bic.back();
        fits.push_back(std::move(fit));
    }
    select_best(path, m);
    TransferFit best = std::move(fits[path.best_index]);
    return {std::move(path), std::move(best)};
}

template <class E>
[[noreturn]] void rethrow_with_source(const E& e, std::size_t k) {
    throw E("source " + std::to_string(k) + ": " + e.what());
}

}  // namespace

SourceEnsemble fit_sources(const std::vector<Dataset>& sources, const IpodOptions& options) {
    if (sources.empty()) throw InvalidParameter("at least one source dataset is required");
    const Eigen::Index p = sources.front().cols();
    SourceEnsemble ens;
    ens.B_hat.resize(p, static_cast<Eigen::Index>(sources.size()));
    for (std::size_t k = 0; k < sources.size(); ++k) {
        if (sources[k].cols() != p) {
            throw DimensionError("source " + std::to_string(k) + " has " + std::to_string(sources[k].cols()) +
                                 " columns, expected " + std::to_string(p));
        }
        try {
            auto [path, fit] = ipod_bic_path(sources[k], options);
            ens.B_hat.col(static_cast<Eigen::Index>(k)) = fit.beta_hat;
            ens.gamma_hats.push_back(std::move(fit.gamma_hat));
            ens.iterations.push_back(fit.iterations);
            ens.lambda_adj.push_back(fit.lambda_adj);
        } catch (const SingularDesign& e) {
            throw SingularDesign("source " + std::to_string(k) + ": " + e.what(), e.rank(), e.cols());
        } catch (const InvalidParameter& e) {
            rethrow_with_source(e, k);
        } catch (const DimensionError& e) {
            rethrow_with_source(e, k);
        } catch (const NumericalFailure& e) {
            rethrow_with_source(e, k);
        }
    }
    if (numerical_rank(ens.B_hat) < ens.K()) {
        throw Degeneracy("source coefficient estimates are linearly dependent");
    }
    return ens;
}

TransformCache build_transform(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_hat, const Eigen::VectorXd& Y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index K = B_hat.cols();
    if (B_hat.rows() != X.cols()) throw DimensionError("coefficient bank rows must equal design columns");
    if (Y.size() != n) throw DimensionError("response length must equal design rows");
    if (n <= K) throw InvalidParameter("transform requires n > K");

    TransformCache c;
    c.Z = X * B_hat;
    try {
        c.z_solver = LeastSquares(c.Z);
    } catch (const SingularDesign& e) {
        throw Degeneracy(std::string("transferred design X B is degenerate: ") + e.what());
    }

    Eigen::MatrixXd Uc;
    if (K == 0) {
        Uc = Eigen::MatrixXd::Identity(n, n);
    } else {
        const Eigen::MatrixXd Hz = c.z_solver.q() * c.z_solver.q().transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hz);
        if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of the Z projector failed");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (es.eigenvalues()[i] < 0.5) keep.push_back(i);
        }
        if (static_cast<Eigen::Index>(keep.size()) != n - K) {
            throw Degeneracy("projector spectrum does not split into n - K null directions");
        }
        Uc.resize(n, n - K);
        for (std::size_t j = 0; j < keep.size(); ++j) Uc.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
    }

    Eigen::MatrixXd G = X * X.transpose();
    G.diagonal().array() += 1.0;
    const Eigen::MatrixXd C = Uc.transpose() * G * Uc;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(C);
    if (ec.info() != Eigen::Success || ec.eigenvalues().minCoeff() < 1e-12) {
        throw NumericalFailure("profiled Gram matrix is not positive definite");
    }
    const Eigen::MatrixXd C_inv_sqrt =
        ec.eigenvectors() * ec.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * ec.eigenvectors().transpose();
    c.P = C_inv_sqrt * Uc.transpose();

    c.M.resize(n, X.cols() + n);
    c.M << X, Eigen::MatrixXd::Identity(n, n);
    c.A = c.P * c.M;
    c.Y_tilde = c.P * Y;
    const double smax_x = max_singular_value(X);
    c.k0 = std::sqrt(smax_x * smax_x + 1.0) + 1.0;
    require_finite(c.A, "transformed design");
    return c;
}

double transco_objective(const TransferState& state, const Eigen::MatrixXd& X, const Eigen::MatrixXd& B_hat,
                         const Eigen::VectorXd& Y, double lambda, double k0) {
    if (!(lambda >= 0.0)) throw InvalidParameter("penalty must be nonnegative");
    if (!(k0 > 0.0)) throw InvalidParameter("step constant must be positive");
    check_state(state, X.cols(), X.rows(), B_hat.cols());
    const Eigen::VectorXd r = Y - X * (B_hat * state.w) - X * state.delta - state.gamma;
    const double k2 = k0 * k0;
    const double f = 0.5 * r.squaredNorm() + scaled_penalty(state.delta, lambda, k2) +
                     scaled_penalty(state.gamma, lambda, k2);
    if (!std::isfinite(f)) throw NumericalFailure("non-finite objective");
    return f;
}

TransferState transco_step(const TransferState& state, const TransformCache& cache, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& B_hat, const Eigen::VectorXd& Y, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidParameter("penalty must be nonnegative");
    if (cache.Z.rows() != X.rows() || cache.Z.cols() != B_hat.cols() || Y.size() != X.rows()) {
        throw DimensionError("transform cache does not match the problem");
    }
    check_state(state, X.cols(), X.rows(), B_hat.cols());
    return step_core(X, cache, Y, state, lambda).state;
}

TransferFit transco_fit(const Dataset& target, const SourceEnsemble& ensemble, double lambda, double tol,
                        int max_iter, const std::optional<TransferState>& init, const TransferOptions& options) {
    const Eigen::MatrixXd& B = ensemble.B_hat;
    check_target(target, B, tol, max_iter);
    if (B.cols() < 1) throw InvalidParameter("at least one source is required");
    if (!(lambda >= 0.0)) throw InvalidParameter("penalty must be nonnegative");
    const Working wk = make_working(target.X, B, target.Y, options.normalize_columns);
    TransferState state;
    if (init) {
        check_state(*init, target.cols(), target.rows(), B.cols());
        state = initial_state(wk, init->delta.cwiseProduct(wk.scale), init->gamma, lambda);
    } else {
        const Eigen::VectorXd beta0 = default_beta0(target, options.init_lasso);
        state = initial_state(wk, Eigen::VectorXd::Zero(target.cols()), target.Y - target.X * beta0, lambda);
    }
    RunResult rr = run(wk, state, lambda, tol, max_iter);
    const double rss = transformed_rss(wk.cache, rr.state.delta, rr.state.gamma);
    const long df = static_cast<long>((rr.state.delta.array() != 0.0).count() +
                                      (rr.state.gamma.array() != 0.0).count());
    TransferFit fit = to_fit(wk, target.X, B, std::move(rr), lambda);
    fit.bic = bic_star(rss, static_cast<long>(target.rows() - B.cols()), df + 1);
    return fit;
}

std::pair<TuningPath, TransferFit> transco_bic_path(const Dataset& target, const SourceEnsemble& ensemble,
                                                    const TransferOptions& options) {
    if (ensemble.K() < 1) throw InvalidParameter("at least one source is required");
    return bic_path_core(target, ensemble.B_hat, options, false);
}

TransferFit transco_full(const Dataset& target, const std::vector<Dataset>& sources, const TransferOptions& options) {
    if (sources.empty()) throw InvalidParameter("at least one source dataset is required");
    const SourceEnsemble ens = fit_sources(sources, options.source);
    return transco_bic_path(target, ens, options).second;
}

std::pair<TuningPath, TransferFit> ipod_highdim_bic_path(const Dataset& data, const TransferOptions& options) {
    return bic_path_core(data, Eigen::MatrixXd(data.cols(), 0), options, true);
}

}  // namespace transco
