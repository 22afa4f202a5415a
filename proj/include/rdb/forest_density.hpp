#pragma once

// Random-forest density estimator: median-depth partition trees built by
// equal-volume midpoint bisection along random coordinates, with
// Monte-Carlo effective-volume correction on irregular supports.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rdb/dataset.hpp"
#include "rdb/geometry.hpp"

namespace rdb {

struct DensityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Box {
    Eigen::VectorXd lo, hi;
    double volume() const {
        double v = 1.0;
        for (Eigen::Index j = 0; j < lo.size(); ++j) v *= hi(j) - lo(j);
        return v;
    }
    bool contains(const Eigen::VectorXd& x) const {
        for (Eigen::Index j = 0; j < lo.size(); ++j)
            if (x(j) < lo(j) || x(j) > hi(j)) return false;
        return true;
    }
};

struct PartitionCell {
    Box box;
    double mass = 0.0;      // D(A): cell count / m
    double eff_volume = 0.0; // mu_eff(A) in [0, vol(A)]
};

struct PartitionNode {
    int split_dim = -1;     // -1 for leaf
    double split_value = 0.0;
    int left = -1, right = -1;
    int cell = -1;          // leaf cell index
};

struct PartitionTree {
    std::vector<PartitionNode> nodes;
    std::vector<PartitionCell> cells;
    int cell_of(const Eigen::VectorXd& x) const;
};

struct DensityForestParams {
    int num_trees = 100;
    int depth = 0;          // 0 -> depth_rule(N, d)
    int mc_samples = 1000;
    std::uint64_t seed = 1;
};

struct PartitionForest {
    std::vector<PartitionTree> trees;
    Box enclosing;
    long n_side = 0;
    long n_total = 0;
};

// floor(d ln N / (1 + d ln 2)), clamped to >= 1.
int depth_rule(long N, int d);

// Enclosing box from per-coordinate data min/max expanded by 1%.
Box enclosing_box(const Eigen::MatrixXd& X);

// side = 1 builds from the treated region, side = 0 from its complement;
// effective volumes are measured against that region intersected with the
// enclosing box.
PartitionForest build_partition_forest(const Eigen::MatrixXd& X_side,
                                       const BoundaryGeometry& b, int side,
                                       const Box& box, long n_total, int depth,
                                       const DensityForestParams& params);

// Average over trees of D(A(x0)) / mu_eff(A(x0)) (0 where mu_eff is 0),
// scaled by n_side / N. Queries are clamped into the enclosing box.
double rf_density(const PartitionForest& f, const Eigen::VectorXd& x0);

// Lambda_n per query point: 1 iff treated-side density minus control-side
// density at the point is >= 0.
std::vector<int> estimate_lambda(const Dataset& train, const BoundaryGeometry& b,
                                 const std::vector<Eigen::VectorXd>& query_points,
                                 const DensityForestParams& params);

}  // namespace rdb
