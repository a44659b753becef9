#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "transco/errors.hpp"
#include "transco/ipod.hpp"
#include "transco/thresholding.hpp"

using namespace transco;

namespace {

Dataset linear_data(Eigen::Index n, Eigen::Index p, double sigma, Rng& rng) {
    Dataset d;
    d.X = oracle::gaussian(n, p, rng);
    const Eigen::VectorXd beta = oracle::gaussian(p, rng);
    d.Y = d.X * beta + sigma * oracle::gaussian(n, rng);
    return d;
}

}  // namespace

TEST_CASE("hat_matrix small cases") {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 1);
    const HatMatrix a = hat_matrix(ones);
    CHECK((a.H - Eigen::MatrixXd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(a.h_diag[0] - 0.5) < 1e-14);
    CHECK(std::abs(a.h_diag[1] - 0.5) < 1e-14);

    const HatMatrix b = hat_matrix(Eigen::MatrixXd::Identity(2, 2));
    CHECK((b.H - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    Rng rng(11);
    const Eigen::MatrixXd X = oracle::gaussian(6, 2, rng);
    const HatMatrix c = hat_matrix(X);
    CHECK((c.H * c.H - c.H).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.H - c.H.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(c.H.trace() - 2.0) < 1e-10);
    CHECK((c.h_diag - oracle::leverages(X)).cwiseAbs().maxCoeff() < 1e-10);
    for (Eigen::Index i = 0; i < 6; ++i) {
        CHECK(c.h_diag[i] >= 0.0);
        CHECK(c.h_diag[i] <= 1.0);
    }
}

TEST_CASE("hat_matrix rejects a rank-deficient design") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 2, 4, 3, 6, 4, 8;
    try {
        hat_matrix(X);
        FAIL("expected SingularDesign");
    } catch (const SingularDesign& e) {
        CHECK(e.rank() == 1);
        CHECK(e.cols() == 2);
    }
}

TEST_CASE("bic_star values") {
    CHECK(bic_star(10.0, 10, 1) == doctest::Approx(std::log(10.0) + 1.0).epsilon(1e-12));
    CHECK(bic_star(10.0, 10, 1) == doctest::Approx(3.302585).epsilon(1e-6));
    CHECK(bic_star(std::exp(1.0) * 5.0, 5, 2) == doctest::Approx(5.0 + 2.0 * (std::log(5.0) + 1.0)).epsilon(1e-12));
    CHECK(bic_star(std::exp(1.0) * 5.0, 5, 2) == doctest::Approx(10.218875).epsilon(1e-6));
    CHECK(bic_star(0.0, 4, 3) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(bic_star(1.0, 0, 1), InvalidParameter);
}

TEST_CASE("penalty_grid shape") {
    const auto g = penalty_grid(10.0, 40);
    REQUIRE(g.size() == 41);
    CHECK(g.front() == 10.0);
    CHECK(g[39] == doctest::Approx(10.0 * 1e-3).epsilon(1e-12));
    CHECK(g.back() == 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] < g[i - 1]);
    CHECK_THROWS_AS(penalty_grid(1.0, 1), InvalidParameter);
}

TEST_CASE("ipod_fit on clean noiseless data returns the OLS solution") {
    Rng rng(3);
    Dataset d = linear_data(30, 3, 0.0, rng);
    const IpodFit fit = ipod_fit(d, 100.0);
    CHECK(fit.gamma_hat.isZero(0.0));
    CHECK((fit.beta_hat - oracle::normal_equations(d.X, d.Y)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fit.converged);
}

TEST_CASE("ipod_fit detects a single gross shift like the exhaustive oracle") {
    Rng rng(5);
    Dataset d = linear_data(20, 2, 1.0, rng);
    d.Y[7] += 10.0;
    const double lambda = 4.0;
    const IpodFit fit = ipod_fit(d, lambda);
    const auto best = oracle::best_support(d, lambda, 3);
    CHECK(best.support == std::vector<Eigen::Index>{7});
    CHECK(fit.detected() == best.support);
}

TEST_CASE("ipod_fit agrees with support enumeration on small instances") {
    Rng root(77);
    int matched = 0;
    for (int t = 0; t < 100; ++t) {
        Rng rng = root.split("small", static_cast<std::uint64_t>(t));
        const Eigen::Index n = 6 + t % 5;
        const Eigen::Index p = 1 + t % 2;
        Dataset d = linear_data(n, p, 1.0, rng);
        const auto shifted = rng.sample_without_replacement(n, 1)[0];
        d.Y[shifted] += 10.0;
        const double lambda = 3.0;
        const IpodFit fit = ipod_fit(d, lambda, 1e-10, 5000);
        const auto best = oracle::best_support(d, lambda, 3);
        const double f = ipod_objective(d, fit.beta_hat, fit.gamma_hat, lambda);
        const auto S = fit.detected();
        CHECK(std::abs(f - oracle::support_objective(d, S, lambda)) < 1e-8);
        const bool global = f <= best.objective + 1e-6;
        CHECK((global || oracle::support_local_min(d, S, lambda)));
        matched += S == best.support;
    }
    CHECK(matched >= 90);
}

TEST_CASE("ipod_fit with zero threshold absorbs every residual") {
    Rng rng(8);
    Dataset d = linear_data(15, 2, 1.0, rng);
    const IpodFit fit = ipod_fit(d, 0.0);
    const Eigen::VectorXd r = d.Y - d.X * oracle::normal_equations(d.X, d.Y);
    long nonzero_resid = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) nonzero_resid += r[i] != 0.0;
    CHECK(static_cast<long>(fit.detected().size()) == nonzero_resid);
    CHECK((d.Y - d.X * fit.beta_hat - fit.gamma_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ipod_fit argument validation") {
    Rng rng(1);
    Dataset d = linear_data(5, 5, 1.0, rng);
    CHECK_THROWS_AS(ipod_fit(d, 1.0), InvalidParameter);
    Dataset e = linear_data(10, 2, 1.0, rng);
    CHECK_THROWS_AS(ipod_fit(e, -1.0), InvalidParameter);
    CHECK_THROWS_AS(ipod_fit(e, 1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(ipod_fit(e, 1.0, 1e-6, 0), InvalidParameter);
    CHECK_THROWS_AS(ipod_fit(e, 1.0, 1e-6, 10, Eigen::VectorXd::Zero(3)), DimensionError);
    e.Y[0] = std::nan("");
    CHECK_THROWS_AS(ipod_fit(e, 1.0), InvalidParameter);
}

TEST_CASE("ipod fixed point, coefficient consistency and objective descent") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 15 + trial % 20;
        const Eigen::Index p = 1 + trial % 4;
        Dataset d = linear_data(n, p, 1.0, rng);
        for (Eigen::Index i = 0; i < n / 6; ++i) d.Y[i] += rng.uniform(5.0, 15.0);
        const double lambda = rng.uniform(0.5, 4.0);

        Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n);
        double prev = ipod_objective(d, oracle::normal_equations(d.X, d.Y), gamma, lambda);
        for (int it = 0; it < 60; ++it) {
            const IpodFit step = ipod_fit(d, lambda, 1e-12, 1, gamma);
            const double f = ipod_objective(d, step.beta_hat, step.gamma_hat, lambda);
            CHECK(f <= prev + 1e-8 * (1.0 + std::abs(prev)));
            prev = f;
            gamma = step.gamma_hat;
        }

        const IpodFit fit = ipod_fit(d, lambda);
        REQUIRE(fit.converged);
        const Eigen::MatrixXd H = hat_matrix(d.X).H;
        const Eigen::VectorXd r = d.Y - H * d.Y;
        const Eigen::VectorXd h = oracle::leverages(d.X);
        const Eigen::VectorXd lam = lambda * (1.0 - h.array()).sqrt().matrix();
        const Eigen::VectorXd again = hard_threshold_vec(H * fit.gamma_hat + r, lam);
        CHECK((again - fit.gamma_hat).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((fit.beta_hat - oracle::normal_equations(d.X, d.Y - fit.gamma_hat)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("ipod_bic_path grid endpoints and path shape") {
    Rng rng(4);
    Dataset d = linear_data(60, 3, 1.0, rng);
    d.Y[3] += 12.0;
    d.Y[40] -= 9.0;
    IpodOptions opt;
    opt.grid_size = 25;
    const auto [path, fit] = ipod_bic_path(d, opt);
    REQUIRE(path.size() == 26);
    CHECK(path.df.front() == 0);
    CHECK(path.lambdas.back() == 0.0);
    CHECK(path.rss.size() == path.size());
    CHECK(path.bic.size() == path.size());
    CHECK(path.eligible[path.best_index]);
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.eligible[k]) CHECK(path.bic[k] >= path.bic[path.best_index]);
    }
    CHECK(fit.lambda_adj == path.lambdas[path.best_index]);
    CHECK(fit.bic == doctest::Approx(path.bic[path.best_index]));
    long monotone_breaks = 0;
    for (std::size_t k = 1; k < path.size(); ++k) monotone_breaks += path.df[k] < path.df[k - 1];
    CHECK(monotone_breaks == 0);
}

TEST_CASE("ipod_bic_path selects no outliers on clean data") {
    Rng root(99);
    int zero = 0;
    for (int t = 0; t < 100; ++t) {
        Rng rng = root.split("clean", static_cast<std::uint64_t>(t));
        const Dataset d = linear_data(50, 2, 1.0, rng);
        const TuningPath path = ipod_bic_path(d).first;
        zero += path.df[path.best_index] == 0;
    }
    CHECK(zero >= 80);
}

TEST_CASE("ipod_bic_path recovers two gross shifts") {
    Rng root(123);
    int exact = 0;
    for (int t = 0; t < 100; ++t) {
        Rng rng = root.split("shift", static_cast<std::uint64_t>(t));
        Dataset d = linear_data(40, 2, 1.0, rng);
        const auto idx = rng.sample_without_replacement(40, 2);
        for (auto i : idx) d.Y[i] += 10.0;
        std::vector<Eigen::Index> planted(idx.begin(), idx.end());
        std::sort(planted.begin(), planted.end());
        exact += ipod_bic_path(d).second.detected() == planted;
    }
    CHECK(exact >= 90);
}
