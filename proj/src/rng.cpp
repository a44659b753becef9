#include "transco/rng.hpp"

#include <numeric>

#include "transco/errors.hpp"

namespace transco {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::string_view label, std::uint64_t index) const {
    const std::uint64_t a = splitmix64(seed_ ^ fnv1a(label));
    return Rng(splitmix64(a + splitmix64(index)));
}

double Rng::normal() { return normal_(engine_); }

double Rng::normal(double mean, double sd) { return mean + sd * normal_(engine_); }

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::vector<Eigen::Index> Rng::sample_without_replacement(Eigen::Index pool, Eigen::Index k) {
    if (k < 0 || k > pool) throw InvalidParameter("cannot sample more items than the pool holds");
    std::vector<Eigen::Index> items(static_cast<std::size_t>(pool));
    std::iota(items.begin(), items.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, pool - 1);
        std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(pick(engine_))]);
    }
    items.resize(static_cast<std::size_t>(k));
    return items;
}

}  // namespace transco
