#pragma once

// Honest regression forest producing locality weights, and the local
// linear forest predictor used to classify conditional-mean jump signs
// at boundary points.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rdb/dataset.hpp"
#include "rdb/geometry.hpp"

namespace rdb {

struct ForestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ForestParams {
    int num_trees = 100;
    int min_leaf = 5;
    double subsample_fraction = 0.5;
    int split_try_count = 0;     // 0 -> ceil(sqrt(d))
    double ridge_fraction = 0.01; // lambda = ridge_fraction * weighted Var(Y)
    std::uint64_t seed = 1;
};

struct TreeNode {
    int split_dim = -1;          // -1 for leaf
    double split_value = 0.0;
    int left = -1, right = -1;
    std::vector<int> honest_idx; // weighting-half observations in this leaf
};

struct Tree {
    std::vector<TreeNode> nodes;
    int leaf_of(const Eigen::VectorXd& x) const;
};

struct HonestForest {
    std::vector<Tree> trees;
    Eigen::MatrixXd X;           // training running variables
    Eigen::VectorXd Y;           // training outcomes
    ForestParams params;
};

struct LlfPrediction {
    double value = 0.0;
    double effective_weight_count = 0.0; // 1 / sum of squared weights
};

HonestForest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                        const ForestParams& params);

// Honest forest weights over the observations in `scope` (indices into the
// forest's training set); per tree, uniform over honest-half observations
// sharing x0's leaf, averaged over trees and renormalized to sum 1.
Eigen::VectorXd forest_weights(const HonestForest& f, const Eigen::VectorXd& x0,
                               const std::vector<int>& scope);

LlfPrediction llf_predict(const HonestForest& f, const Eigen::VectorXd& x0,
                          double lambda = -1.0);

// Gamma_n at each query boundary point: 1 iff the treated-side LLF
// prediction minus the control-side prediction is >= 0.
std::vector<int> estimate_gamma(const Dataset& train,
                                const std::vector<Eigen::VectorXd>& query_points,
                                const ForestParams& params);

}  // namespace rdb
