#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "transco/dataset.hpp"
#include "transco/rng.hpp"

namespace transco {

enum class ExampleId { Ex1 = 1, Ex2, Ex3, Ex4, Ex5 };
enum class CovarianceKind { Identity, ToeplitzPerSource, AR05 };
enum class NoiseKind { Unit, PerSourceScaled };
enum class WeightSpec { Fixed, Uniform };
/// Whether the second parameter of N(a, b) in the generators is a variance or a standard deviation.
enum class SpreadConvention { Variance, StdDev };

struct SimulationConfig {
    ExampleId example_id = ExampleId::Ex1;
    Eigen::Index n = 150;
    Eigen::Index p = 100;
    Eigen::Index K = 5;
    Eigen::Index s = 25;
    Eigen::Index N = 1000;
    double rho = 0.1;
    double h = 6.0;
    WeightSpec w_spec = WeightSpec::Fixed;
    CovarianceKind covariance = CovarianceKind::Identity;
    NoiseKind noise = NoiseKind::Unit;
    std::uint64_t seed = 1;
    int trials = 50;
    int grid_size = 40;
    double tol = 1e-6;
    int max_iter = 2000;
    /// One (a, b) pair per dataset instead of one per contaminated point.
    bool shared_contamination = false;
    SpreadConvention spread = SpreadConvention::Variance;
    /// Multiplies every noise standard deviation; 0 gives noiseless responses.
    double noise_scale = 1.0;

    bool identified() const { return example_id != ExampleId::Ex4; }
    void validate() const;

    /// Reference configuration of an example (the smallest sample sizes of its design).
    static SimulationConfig preset(ExampleId id);
};

struct GroundTruth {
    Eigen::VectorXd beta;
    Eigen::MatrixXd B;
    Eigen::VectorXd w;
    Eigen::VectorXd delta;
    Eigen::VectorXd gamma_target;
    std::vector<Eigen::VectorXd> gamma_sources;
    std::vector<Eigen::Index> target_outliers;
    std::vector<std::vector<Eigen::Index>> source_outliers;
};

struct SimulatedProblem {
    Dataset target;
    std::vector<Dataset> sources;
    GroundTruth truth;
};

/// Weight vector used by every example except the one with random weights.
Eigen::VectorXd fixed_weights();

/// floor(rho * m) with a small guard against representation error.
Eigen::Index contamination_count(Eigen::Index m, double rho);

Eigen::MatrixXd gen_coefficient_bank(Eigen::Index p, Eigen::Index s, Eigen::Index K, Rng& rng);

Eigen::VectorXd gen_delta(Eigen::Index p, Eigen::Index s, double h, Rng& rng, bool identified,
                          SpreadConvention spread = SpreadConvention::Variance);

std::pair<Eigen::VectorXd, std::vector<Eigen::Index>> gen_contamination(
    Eigen::Index m, double rho, Rng& rng, bool shared = false, SpreadConvention spread = SpreadConvention::Variance);

/// `k` is the 1-based source index; without it the target covariance is returned.
Eigen::MatrixXd covariance_matrix(CovarianceKind kind, Eigen::Index p, std::optional<Eigen::Index> k = std::nullopt);

/// Rows drawn i.i.d. from N(0, sigma).
Eigen::MatrixXd sample_gaussian_rows(Eigen::Index rows, const Eigen::MatrixXd& sigma, Rng& rng);

SimulatedProblem gen_problem(const SimulationConfig& config, Rng& rng);

std::string to_string(ExampleId id);
std::string to_string(CovarianceKind kind);
std::string to_string(NoiseKind kind);

}  // namespace transco
