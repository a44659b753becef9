#include "transco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "transco/errors.hpp"

namespace transco {

double mse_beta(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
    if (beta_hat.size() != beta_true.size()) throw DimensionError("coefficient vectors differ in length");
    if (beta_hat.size() == 0) throw InvalidParameter("coefficient vectors are empty");
    return (beta_hat - beta_true).squaredNorm() / static_cast<double>(beta_hat.size());
}

DetectionScore f1_detection(const std::vector<Eigen::Index>& detected, const std::vector<Eigen::Index>& truth) {
    const std::set<Eigen::Index> d(detected.begin(), detected.end());
    const std::set<Eigen::Index> t(truth.begin(), truth.end());
    DetectionScore s;
    for (Eigen::Index i : d) {
        if (t.count(i)) ++s.tp;
        else ++s.fp;
    }
    s.fn = static_cast<long>(t.size()) - s.tp;
    if (d.empty() && t.empty()) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = d.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(d.size());
    s.recall = t.empty() ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(t.size());
    s.f1 = s.tp == 0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

double huber_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, double alpha) {
    if (y.size() != y_hat.size()) throw DimensionError("response and prediction differ in length");
    if (!(alpha > 0.0)) throw InvalidParameter("Huber knee must be positive");
    if (y.size() == 0) throw InvalidParameter("empty response");
    double total = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = std::abs(y[i] - y_hat[i]);
        total += e <= alpha ? 0.5 * e * e : alpha * e - 0.5 * alpha * alpha;
    }
    return total / static_cast<double>(y.size());
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
    if (y.size() != y_hat.size()) throw DimensionError("response and prediction differ in length");
    if (y.size() < 2) throw InvalidParameter("R-squared needs at least two observations");
    const double sst = (y.array() - y.mean()).square().sum();
    if (sst == 0.0) throw InvalidParameter("R-squared is undefined for a constant response");
    return 1.0 - (y - y_hat).squaredNorm() / sst;
}

}  // namespace transco
