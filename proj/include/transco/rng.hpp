#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace transco {

/// Seeded random stream. Child streams are derived from the construction seed
/// and a label, never from the current engine state, so drawing from one stream
/// cannot perturb another.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    Rng split(std::string_view label, std::uint64_t index = 0) const;

    double normal();
    double normal(double mean, double sd);
    double uniform(double lo, double hi);

    /// k distinct indices from {0, ..., pool-1}, in draw order.
    std::vector<Eigen::Index> sample_without_replacement(Eigen::Index pool, Eigen::Index k);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

}  // namespace transco
