#include "transco/thresholding.hpp"

#include <cmath>
#include <string>

#include "transco/errors.hpp"

namespace transco {

namespace {

void check_lambda(double lambda) {
    if (!(lambda >= 0.0)) {
        throw InvalidParameter("threshold level must be nonnegative, got " + std::to_string(lambda));
    }
}

}  // namespace

double hard_threshold(double t, double lambda) {
    check_lambda(lambda);
    return std::abs(t) <= lambda ? 0.0 : t;
}

Eigen::VectorXd hard_threshold_vec(const Eigen::VectorXd& v, double lambda) {
    check_lambda(lambda);
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = std::abs(v[i]) <= lambda ? 0.0 : v[i];
    }
    return out;
}

Eigen::VectorXd hard_threshold_vec(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda) {
    if (lambda.size() != v.size()) {
        throw DimensionError("threshold vector has length " + std::to_string(lambda.size()) +
                             ", expected " + std::to_string(v.size()));
    }
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        check_lambda(lambda[i]);
        out[i] = std::abs(v[i]) <= lambda[i] ? 0.0 : v[i];
    }
    return out;
}

double hard_penalty(double t, double lambda) {
    check_lambda(lambda);
    const double a = std::abs(t);
    if (a <= lambda) {
        return lambda * a - 0.5 * a * a;
    }
    return 0.5 * lambda * lambda;
}

double hard_penalty_sum(const Eigen::VectorXd& v, double lambda) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += hard_penalty(v[i], lambda);
    return s;
}

double hard_penalty_sum(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda) {
    if (lambda.size() != v.size()) {
        throw DimensionError("penalty vector length mismatch");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += hard_penalty(v[i], lambda[i]);
    return s;
}

double threshold(ThresholdRule rule, double t, double lambda) {
    switch (rule) {
        case ThresholdRule::Hard:
            return hard_threshold(t, lambda);
    }
    throw InvalidParameter("unknown threshold rule");
}

double penalty(ThresholdRule rule, double t, double lambda) {
    switch (rule) {
        case ThresholdRule::Hard:
            return hard_penalty(t, lambda);
    }
    throw InvalidParameter("unknown threshold rule");
}

}  // namespace transco
