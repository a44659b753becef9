#pragma once

#include <vector>

#include <Eigen/Dense>

namespace transco {

struct DetectionScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

/// (1/p) ||beta_hat - beta_true||^2
double mse_beta(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

/// Both sets empty counts as a perfect score.
DetectionScore f1_detection(const std::vector<Eigen::Index>& detected, const std::vector<Eigen::Index>& truth);

/// Mean Huber loss with knee alpha.
double huber_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat, double alpha = 0.05);

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

}  // namespace transco
