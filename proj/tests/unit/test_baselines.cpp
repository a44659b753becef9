#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "transco/baselines.hpp"
#include "transco/errors.hpp"
#include "transco/transfer.hpp"

using namespace transco;

namespace {

double soft_threshold(double z, double t) { return std::copysign(std::max(std::abs(z) - t, 0.0), z); }

}  // namespace

TEST_CASE("ols_fit") {
    Rng rng(1);
    const Eigen::VectorXd y = oracle::gaussian(4, rng);
    CHECK((ols_fit(Eigen::MatrixXd::Identity(4, 4), y) - y).cwiseAbs().maxCoeff() < 1e-14);

    const Eigen::MatrixXd X = oracle::gaussian(30, 5, rng);
    const Eigen::VectorXd beta = oracle::gaussian(5, rng);
    CHECK((ols_fit(X, X * beta) - beta).cwiseAbs().maxCoeff() < 1e-10);

    const Eigen::VectorXd Y = oracle::gaussian(30, rng);
    const Eigen::VectorXd b = ols_fit(X, Y);
    CHECK((X.transpose() * (Y - X * b)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((b - oracle::normal_equations(X, Y)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd D(5, 2);
    D.col(0) = oracle::gaussian(5, rng);
    D.col(1) = -D.col(0);
    CHECK_THROWS_AS(ols_fit(D, oracle::gaussian(5, rng)), SingularDesign);
    CHECK_THROWS_AS(ols_fit(X, oracle::gaussian(29, rng)), DimensionError);
}

TEST_CASE("lasso_cd limits and closed form") {
    Rng rng(2);
    const Eigen::MatrixXd X = oracle::gaussian(40, 6, rng);
    const Eigen::VectorXd Y = oracle::gaussian(40, rng);

    LassoOptions o;
    o.lambda = 0.0;
    CHECK((lasso_cd(X, Y, o) - ols_fit(X, Y)).cwiseAbs().maxCoeff() < 1e-6);

    o.lambda = (X.transpose() * Y).cwiseAbs().maxCoeff();
    CHECK(lasso_cd(X, Y, o).isZero(0.0));

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(oracle::gaussian(10, 2, rng));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(10, 2);
    const Eigen::VectorXd y = oracle::gaussian(10, rng);
    o.lambda = 0.3;
    const Eigen::VectorXd b = lasso_cd(Q, y, o);
    for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK(b[j] == doctest::Approx(soft_threshold(Q.col(j).dot(y), 0.3)).epsilon(1e-8));
    }

    o.lambda = -1.0;
    CHECK_THROWS_AS(lasso_cd(X, Y, o), InvalidParameter);
}

TEST_CASE("lasso_cd descends per cycle and satisfies KKT") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const Eigen::MatrixXd X = oracle::gaussian(30, 12, rng);
        const Eigen::VectorXd Y = oracle::gaussian(30, rng);
        LassoOptions o;
        o.lambda = rng.uniform(0.5, 8.0);
        o.max_iter = 1;
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
        double f = lasso_objective(X, Y, beta, o.lambda);
        for (int c = 0; c < 50; ++c) {
            beta = lasso_cd(X, Y, o, &beta);
            const double g = lasso_objective(X, Y, beta, o.lambda);
            CHECK(g <= f + 1e-12 * (1.0 + f));
            f = g;
        }
        o.max_iter = 100000;
        o.tol = 1e-12;
        const Eigen::VectorXd b = lasso_cd(X, Y, o);
        const Eigen::VectorXd g = X.transpose() * (Y - X * b);
        for (Eigen::Index j = 0; j < 12; ++j) {
            if (b[j] == 0.0) {
                CHECK(std::abs(g[j]) <= o.lambda + 1e-4);
            } else {
                CHECK(std::abs(g[j] - o.lambda * (b[j] > 0 ? 1.0 : -1.0)) <= 1e-4);
            }
        }
    }
}

TEST_CASE("lasso_cv") {
    Rng root(4);
    SUBCASE("noiseless sparse support recovery") {
        int recovered = 0;
        for (int t = 0; t < 50; ++t) {
            Rng rng = root.split("cv", static_cast<std::uint64_t>(t));
            const Eigen::MatrixXd X = oracle::gaussian(80, 120, rng);
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(120);
            for (auto j : rng.sample_without_replacement(120, 5)) beta[j] = rng.uniform(1.0, 3.0) * (rng.uniform(0, 1) < 0.5 ? -1 : 1);
            const Eigen::VectorXd b = lasso_cv(X, X * beta);
            bool all = true;
            for (Eigen::Index j = 0; j < 120; ++j) {
                if (beta[j] != 0.0 && b[j] == 0.0) all = false;
            }
            recovered += all;
        }
        CHECK(recovered >= 40);
    }
    SUBCASE("zero response") {
        Rng rng = root.split("zero");
        const Eigen::MatrixXd X = oracle::gaussian(20, 8, rng);
        CHECK(lasso_cv(X, Eigen::VectorXd::Zero(20)).isZero(0.0));
    }
    SUBCASE("single grid point equals the direct solve") {
        Rng rng = root.split("single");
        const Eigen::MatrixXd X = oracle::gaussian(25, 8, rng);
        const Eigen::VectorXd Y = oracle::gaussian(25, rng);
        LassoOptions o;
        o.grid = {0.2};
        LassoOptions d;
        d.lambda = 0.2 * 25;
        CHECK((lasso_cv(X, Y, o) - lasso_cd(X, Y, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("grid shape and errors") {
        Rng rng = root.split("grid");
        const Eigen::MatrixXd X = oracle::gaussian(25, 8, rng);
        const Eigen::VectorXd Y = oracle::gaussian(25, rng);
        const auto g = lasso_cv_grid(X, Y, LassoOptions{});
        REQUIRE(g.size() == 50);
        CHECK(g.front() == doctest::Approx((X.transpose() * Y).cwiseAbs().maxCoeff() / 25.0).epsilon(1e-12));
        CHECK(g.back() == doctest::Approx(g.front() * 1e-3).epsilon(1e-10));
        LassoOptions o;
        o.folds = 1;
        CHECK_THROWS_AS(lasso_cv(X, Y, o), InvalidParameter);
        o.folds = 30;
        CHECK_THROWS_AS(lasso_cv(X, Y, o), InvalidParameter);
    }
}

TEST_CASE("ptl_fit") {
    Rng rng(5);
    SUBCASE("exact bank, noiseless") {
        const Eigen::VectorXd beta = oracle::gaussian(6, rng);
        Dataset d{oracle::gaussian(30, 6, rng), Eigen::VectorXd()};
        d.Y = d.X * beta;
        SourceEnsemble e;
        e.B_hat = beta;
        CHECK((ptl_fit(d, e) - beta).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("clean target without offset") {
        const Eigen::MatrixXd B = oracle::gaussian(20, 3, rng);
        const Eigen::VectorXd w = oracle::gaussian(3, rng);
        Dataset d{oracle::gaussian(200, 20, rng), Eigen::VectorXd()};
        d.Y = d.X * (B * w) + 0.1 * oracle::gaussian(200, rng);
        SourceEnsemble e;
        e.B_hat = B;
        const Eigen::VectorXd b = ptl_fit(d, e);
        CHECK(std::sqrt((b - B * w).squaredNorm() / 20.0) < 1e-2);

        const Eigen::MatrixXd Z = d.X * B;
        const Eigen::VectorXd resid = d.Y - Z * ols_fit(Z, d.Y);
        CHECK((Z.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("errors") {
        Dataset d{oracle::gaussian(10, 4, rng), oracle::gaussian(10, rng)};
        SourceEnsemble e;
        e.B_hat = oracle::gaussian(3, 1, rng);
        CHECK_THROWS_AS(ptl_fit(d, e), DimensionError);
        e.B_hat = Eigen::MatrixXd::Zero(4, 1);
        CHECK_THROWS_AS(ptl_fit(d, e), Degeneracy);
    }
}
