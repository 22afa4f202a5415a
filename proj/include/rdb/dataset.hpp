#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace rdb {

struct Dataset {
    Eigen::MatrixXd X;        // n x d running variables
    Eigen::VectorXd Y;        // n outcomes (may be empty for density tests)
    std::vector<int> treated; // side labels, 1 = treated (may be empty)

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index d() const { return X.cols(); }
    bool has_outcome() const { return Y.size() == X.rows(); }
};

// Named RNG substream: all randomness in the project flows from a master
// seed through (seed, tags...) so parallel and serial schedules agree.
inline std::mt19937_64 substream(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t t : tags) {
        h ^= t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
    }
    return std::mt19937_64(h);
}

}  // namespace rdb
