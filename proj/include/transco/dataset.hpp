#pragma once

#include <Eigen/Dense>

namespace transco {

/// Design matrix X (n x p) and response Y (length n).
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd Y;

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index cols() const { return X.cols(); }

    /// Throws DimensionError / InvalidParameter when X and Y disagree or hold non-finite values.
    void validate() const;
};

}  // namespace transco
