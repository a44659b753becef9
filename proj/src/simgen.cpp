#include "transco/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "transco/errors.hpp"

namespace transco {

namespace {

Eigen::Index delta_support_size(Eigen::Index s) { return s / 5; }
Eigen::Index shared_rank(Eigen::Index s) { return s / 3; }

double spread_sd(double b, SpreadConvention spread) {
    return spread == SpreadConvention::Variance ? std::sqrt(b) : b;
}

void fail(const std::string& msg) { throw ConfigError(msg); }

}  // namespace

std::string to_string(ExampleId id) { return "Ex" + std::to_string(static_cast<int>(id)); }

std::string to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::Identity: return "identity";
        case CovarianceKind::ToeplitzPerSource: return "toeplitz";
        case CovarianceKind::AR05: return "ar05";
    }
    return "?";
}

std::string to_string(NoiseKind kind) {
    return kind == NoiseKind::Unit ? "unit" : "per_source";
}

Eigen::VectorXd fixed_weights() {
    Eigen::VectorXd w(5);
    w << 1.5, 0.75, 0.0, 0.0, -1.25;
    return w;
}

Eigen::Index contamination_count(Eigen::Index m, double rho) {
    return static_cast<Eigen::Index>(std::floor(rho * static_cast<double>(m) + 1e-9));
}

void SimulationConfig::validate() const {
    if (n < 2 || p < 1 || K < 1 || N < 1 || s < 1) fail("n, p, K, N and s must be positive (n >= 2)");
    if (s > p) fail("s = " + std::to_string(s) + " exceeds p = " + std::to_string(p));
    if (!(rho >= 0.0 && rho <= 1.0)) fail("rho must lie in [0, 1], got " + std::to_string(rho));
    if (!(h >= 0.0) || !std::isfinite(h)) fail("h must be finite and nonnegative");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) fail("noise_scale must be finite and nonnegative");
    if (shared_rank(s) < K) {
        fail("floor(s/3) = " + std::to_string(shared_rank(s)) + " must be at least K = " + std::to_string(K));
    }
    if (delta_support_size(s) < 1) fail("floor(s/5) must be at least 1");
    if (identified() && delta_support_size(s) > p - s) fail("floor(s/5) exceeds p - s");
    if (N <= p) fail("sources need N > p for the robust source fits");
    if (trials < 1) fail("trials must be at least 1");
    if (grid_size < 2) fail("grid_size must be at least 2");
    if (!(tol > 0.0)) fail("tol must be positive");
    if (max_iter < 1) fail("max_iter must be at least 1");

    const auto need = [&](bool ok, const std::string& what) {
        if (!ok) fail(to_string(example_id) + " requires " + what);
    };
    switch (example_id) {
        case ExampleId::Ex1:
        case ExampleId::Ex5:
            need(w_spec == WeightSpec::Fixed && K == 5, "the fixed five-component weight vector");
            need(covariance == CovarianceKind::Identity, "covariance = identity");
            need(noise == NoiseKind::Unit, "noise = unit");
            if (example_id == ExampleId::Ex5) need(n < p, "n < p");
            break;
        case ExampleId::Ex2:
            need(w_spec == WeightSpec::Uniform, "w = uniform");
            need(covariance == CovarianceKind::Identity, "covariance = identity");
            need(noise == NoiseKind::Unit, "noise = unit");
            break;
        case ExampleId::Ex3:
            need(w_spec == WeightSpec::Fixed && K == 5, "the fixed five-component weight vector");
            need(covariance == CovarianceKind::ToeplitzPerSource, "covariance = toeplitz");
            need(noise == NoiseKind::PerSourceScaled, "noise = per_source");
            need(2 * K <= p, "2K <= p");
            break;
        case ExampleId::Ex4:
            need(w_spec == WeightSpec::Fixed && K == 5, "the fixed five-component weight vector");
            need(covariance == CovarianceKind::AR05, "covariance = ar05");
            need(noise == NoiseKind::Unit, "noise = unit");
            break;
    }
}

SimulationConfig SimulationConfig::preset(ExampleId id) {
    SimulationConfig c;
    c.example_id = id;
    switch (id) {
        case ExampleId::Ex1:
            break;
        case ExampleId::Ex2:
            c.w_spec = WeightSpec::Uniform;
            c.n = 200;
            c.s = 30;
            c.rho = 0.05;
            break;
        case ExampleId::Ex3:
            c.covariance = CovarianceKind::ToeplitzPerSource;
            c.noise = NoiseKind::PerSourceScaled;
            break;
        case ExampleId::Ex4:
            c.covariance = CovarianceKind::AR05;
            break;
        case ExampleId::Ex5:
            c.n = 50;
            break;
    }
    return c;
}

Eigen::MatrixXd gen_coefficient_bank(Eigen::Index p, Eigen::Index s, Eigen::Index K, Rng& rng) {
    const Eigen::Index r0 = shared_rank(s);
    if (K < 1) throw ConfigError("K must be at least 1");
    if (s > p) throw ConfigError("s must not exceed p");
    if (r0 < K) {
        throw ConfigError("floor(s/3) = " + std::to_string(r0) + " is smaller than K = " + std::to_string(K));
    }
    Eigen::MatrixXd omega(r0, K);
    for (Eigen::Index i = 0; i < r0; ++i)
        for (Eigen::Index j = 0; j < K; ++j) omega(i, j) = rng.normal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(omega, Eigen::ComputeThinU);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, K);
    B.topRows(r0) = 2.0 * svd.matrixU().leftCols(K);
    const Eigen::Index diag = std::min(s - r0, K);
    for (Eigen::Index j = 0; j < diag; ++j) B(r0 + j, j) = 0.3;
    return B;
}

Eigen::VectorXd gen_delta(Eigen::Index p, Eigen::Index s, double h, Rng& rng, bool identified,
                          SpreadConvention spread) {
    const Eigen::Index sd = delta_support_size(s);
    if (sd < 1) throw ConfigError("floor(s/5) must be at least 1");
    const Eigen::Index offset = identified ? s : 0;
    if (sd > p - offset) throw ConfigError("delta support does not fit in the allowed coordinates");
    const std::vector<Eigen::Index> support = rng.sample_without_replacement(p - offset, sd);
    const double scale = spread_sd(h / static_cast<double>(sd), spread);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j : support) delta[offset + j] = rng.normal(0.0, scale);
    return delta;
}

std::pair<Eigen::VectorXd, std::vector<Eigen::Index>> gen_contamination(Eigen::Index m, double rho, Rng& rng,
                                                                        bool shared, SpreadConvention spread) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidParameter("contamination fraction must lie in [0, 1]");
    std::vector<Eigen::Index> idx = rng.sample_without_replacement(m, contamination_count(m, rho));
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(m);
    double a = 0.0;
    double b = 0.0;
    if (shared) {
        a = rng.uniform(0.0, 20.0);
        b = rng.uniform(0.0, 5.0);
    }
    for (Eigen::Index i : idx) {
        if (!shared) {
            a = rng.uniform(0.0, 20.0);
            b = rng.uniform(0.0, 5.0);
        }
        gamma[i] = rng.normal(a, spread_sd(b, spread));
    }
    std::sort(idx.begin(), idx.end());
    return {gamma, idx};
}

Eigen::MatrixXd covariance_matrix(CovarianceKind kind, Eigen::Index p, std::optional<Eigen::Index> k) {
    if (p < 1) throw InvalidParameter("dimension must be positive");
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(p, p);
    switch (kind) {
        case CovarianceKind::Identity:
            return S;
        case CovarianceKind::ToeplitzPerSource: {
            if (!k) return S;
            const Eigen::Index kk = *k;
            if (kk < 1 || 2 * kk > p) throw ConfigError("Toeplitz source covariance needs 1 <= k and 2k <= p");
            const double v = 1.0 / static_cast<double>(kk + 1);
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) {
                    const Eigen::Index d = std::abs(i - j);
                    if (d >= 1 && d <= 2 * kk - 1) S(i, j) = v;
                }
            break;
        }
        case CovarianceKind::AR05:
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) S(i, j) = std::pow(0.5, static_cast<double>(std::abs(i - j)));
            break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo > 0.0)) {
        throw ConfigError("covariance matrix is not positive definite (smallest eigenvalue " + std::to_string(lo) + ")");
    }
    return S;
}

Eigen::MatrixXd sample_gaussian_rows(Eigen::Index rows, const Eigen::MatrixXd& sigma, Rng& rng) {
    const Eigen::Index p = sigma.rows();
    Eigen::MatrixXd Z(rows, p);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
    if (sigma.isIdentity(0.0)) return Z;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw ConfigError("covariance matrix is not positive definite");
    return Z * llt.matrixL().transpose();
}

SimulatedProblem gen_problem(const SimulationConfig& config, Rng& rng) {
    config.validate();
    const Eigen::Index p = config.p;
    const Eigen::Index K = config.K;
    SimulatedProblem out;
    GroundTruth& t = out.truth;

    Rng bank_rng = rng.split("bank");
    t.B = gen_coefficient_bank(p, config.s, K, bank_rng);
    if (config.w_spec == WeightSpec::Fixed) {
        t.w = fixed_weights();
    } else {
        Rng wr = rng.split("weights");
        t.w.resize(K);
        for (Eigen::Index k = 0; k < K; ++k) t.w[k] = wr.uniform(-2.0, 2.0);
    }
    Rng delta_rng = rng.split("delta");
    t.delta = gen_delta(p, config.s, config.h, delta_rng, config.identified(), config.spread);
    t.beta = t.B * t.w + t.delta;

    {
        Rng xr = rng.split("target_design");
        Rng er = rng.split("target_noise");
        Rng gr = rng.split("target_contamination");
        out.target.X = sample_gaussian_rows(config.n, covariance_matrix(config.covariance, p), xr);
        auto [gamma, idx] = gen_contamination(config.n, config.rho, gr, config.shared_contamination, config.spread);
        Eigen::VectorXd eps(config.n);
        for (Eigen::Index i = 0; i < config.n; ++i) eps[i] = config.noise_scale * er.normal();
        out.target.Y = out.target.X * t.beta + gamma + eps;
        t.gamma_target = std::move(gamma);
        t.target_outliers = std::move(idx);
    }

    for (Eigen::Index k = 1; k <= K; ++k) {
        const auto uk = static_cast<std::uint64_t>(k);
        Rng xr = rng.split("source_design", uk);
        Rng er = rng.split("source_noise", uk);
        Rng gr = rng.split("source_contamination", uk);
        Dataset src;
        src.X = sample_gaussian_rows(config.N, covariance_matrix(config.covariance, p, k), xr);
        auto [gamma, idx] = gen_contamination(config.N, config.rho, gr, config.shared_contamination, config.spread);
        const double sd = config.noise == NoiseKind::Unit ? 1.0 : std::sqrt(static_cast<double>(k + 1) / 10.0);
        Eigen::VectorXd eps(config.N);
        for (Eigen::Index i = 0; i < config.N; ++i) eps[i] = config.noise_scale * sd * er.normal();
        src.Y = src.X * t.B.col(k - 1) + gamma + eps;
        out.sources.push_back(std::move(src));
        t.gamma_sources.push_back(std::move(gamma));
        t.source_outliers.push_back(std::move(idx));
    }
    return out;
}

}  // namespace transco
