#include <doctest.h>

#include <cmath>
#include <vector>

#include "transco/errors.hpp"
#include "transco/thresholding.hpp"

using namespace transco;

namespace {

// Composite Simpson rule for the integral of max(lambda - u, 0) over [0, |t|],
// split at the kink u = lambda.
double penalty_by_quadrature(double t, double lambda) {
    auto s = [&](double u) { return std::max(lambda - u, 0.0); };
    auto simpson = [&](double lo, double hi) {
        if (hi <= lo) return 0.0;
        const int n = 2000;
        const double h = (hi - lo) / n;
        double acc = s(lo) + s(hi);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * s(lo + i * h);
        return acc * h / 3.0;
    };
    const double a = std::abs(t);
    const double knee = std::min(a, lambda);
    return simpson(0.0, knee) + simpson(knee, a);
}

}  // namespace

TEST_CASE("hard_threshold scalar cases") {
    CHECK(hard_threshold(0.5, 1.0) == 0.0);
    CHECK(hard_threshold(2.0, 1.0) == 2.0);
    CHECK(hard_threshold(-3.0, 0.0) == -3.0);
    CHECK(hard_threshold(1.0, 1.0) == 0.0);
    CHECK(hard_threshold(-1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(hard_threshold(1.0, -0.1), InvalidParameter);
}

TEST_CASE("hard_threshold_vec element-wise") {
    Eigen::VectorXd v(2);
    v << 0.5, 2.0;
    const Eigen::VectorXd a = hard_threshold_vec(v, 1.0);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 2.0);

    Eigen::VectorXd w(2), lam(2);
    w << 1.0, -1.0;
    lam << 2.0, 0.5;
    const Eigen::VectorXd b = hard_threshold_vec(w, lam);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == -1.0);

    CHECK(hard_threshold_vec(Eigen::VectorXd::Zero(5), 0.3).isZero(0.0));
    CHECK_THROWS_AS(hard_threshold_vec(w, Eigen::VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("hard_penalty closed form against quadrature") {
    CHECK(hard_penalty(0.0, 1.0) == 0.0);
    CHECK(hard_penalty(2.0, 1.0) == doctest::Approx(penalty_by_quadrature(2.0, 1.0)).epsilon(1e-10));
    CHECK(hard_penalty(0.5, 1.0) == doctest::Approx(penalty_by_quadrature(0.5, 1.0)).epsilon(1e-10));
    CHECK(hard_penalty(2.0, 1.0) == doctest::Approx(0.5));
    CHECK(hard_penalty(0.5, 1.0) == doctest::Approx(0.375));
    for (double lam : {0.0, 0.3, 1.0, 4.0})
        for (double t : {-6.0, -1.0, -0.2, 0.0, 0.7, 2.5, 9.0})
            CHECK(hard_penalty(t, lam) == doctest::Approx(penalty_by_quadrature(t, lam)).epsilon(1e-9));
    CHECK_THROWS_AS(hard_penalty(1.0, -1.0), InvalidParameter);
}

TEST_CASE("threshold rule properties on a grid") {
    for (double lam : {0.0, 0.5, 1.0, 5.0}) {
        double prev = -1e300;
        for (int k = -1000; k <= 1000; ++k) {
            const double t = k * 0.01;
            const double v = hard_threshold(t, lam);
            CHECK(hard_threshold(-t, lam) == -v);
            CHECK(v >= prev);
            CHECK(std::abs(v) <= std::abs(t));
            CHECK(hard_threshold(v, lam) == v);
            prev = v;
        }
        CHECK(hard_threshold(1e6, lam) == 1e6);
    }
}

TEST_CASE("hard_penalty is continuous and nondecreasing in |t|") {
    for (double lam : {0.5, 1.0, 3.0}) {
        double prev = 0.0;
        for (int k = 0; k <= 2000; ++k) {
            const double t = k * 0.005;
            const double v = hard_penalty(t, lam);
            CHECK(v >= prev - 1e-15);
            CHECK(std::abs(v - prev) <= lam * 0.005 + 1e-12);
            CHECK(hard_penalty(-t, lam) == v);
            prev = v;
        }
    }
}

TEST_CASE("hard_threshold minimises the penalised quadratic") {
    for (double lam : {0.0, 0.5, 1.0, 2.0})
        for (double t : {-3.1, -1.7, -0.4, 0.0, 0.3, 0.9, 1.3, 2.2, 4.0}) {
            if (std::abs(std::abs(t) - lam) < 1e-12) continue;
            const double range = 2.0 * std::abs(t) + 2.0 * lam;
            double best_x = 0.0;
            double best_g = 1e300;
            const long steps = static_cast<long>(std::ceil(2.0 * range / 1e-3));
            for (long i = 0; i <= steps; ++i) {
                const double x = -range + i * 1e-3;
                const double g = 0.5 * (t - x) * (t - x) + hard_penalty(x, lam);
                if (g < best_g) {
                    best_g = g;
                    best_x = x;
                }
            }
            CHECK(std::abs(best_x - hard_threshold(t, lam)) <= 2e-3);
        }
}

TEST_CASE("rule dispatch") {
    CHECK(threshold(ThresholdRule::Hard, 2.0, 1.0) == 2.0);
    CHECK(penalty(ThresholdRule::Hard, 0.5, 1.0) == doctest::Approx(0.375));
}
