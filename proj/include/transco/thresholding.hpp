#pragma once

#include <Eigen/Dense>

namespace transco {

enum class ThresholdRule { Hard };

/// Hard threshold: 0 when |t| <= lambda, t otherwise.
double hard_threshold(double t, double lambda);

Eigen::VectorXd hard_threshold_vec(const Eigen::VectorXd& v, double lambda);
Eigen::VectorXd hard_threshold_vec(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda);

/// Penalty induced by the hard rule: lambda|t| - t^2/2 on |t| <= lambda, lambda^2/2 beyond.
double hard_penalty(double t, double lambda);

/// Sum of hard_penalty over the entries of v.
double hard_penalty_sum(const Eigen::VectorXd& v, double lambda);
double hard_penalty_sum(const Eigen::VectorXd& v, const Eigen::VectorXd& lambda);

double threshold(ThresholdRule rule, double t, double lambda);
double penalty(ThresholdRule rule, double t, double lambda);

}  // namespace transco
