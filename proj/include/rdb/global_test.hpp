#pragma once

// Cross-fitting orchestration, repeated splits, sign normalization and
// the final global test statistics: heterogeneity test, density
// manipulation test and the plain distance-aggregated RD estimate.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rdb/dataset.hpp"
#include "rdb/forest_density.hpp"
#include "rdb/forest_regression.hpp"
#include "rdb/geometry.hpp"
#include "rdb/kde_boundary.hpp"
#include "rdb/rd_local_poly.hpp"

namespace rdb {

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CrossfitPlan {
    int K = 2;
    int S = 1;
    std::uint64_t seed = 1;
    bool stratify_by_side = true;
    // assignment[s][i] = fold id of observation i in split s
    std::vector<std::vector<int>> assignment;
};

struct FoldDiagnostics {
    int split = 0, fold = 0;
    double h_plus = 0.0, h_minus = 0.0;
    int n_effective_plus = 0, n_effective_minus = 0;
    int sign_ones = 0;       // Gamma/Lambda = 1 classifications
    int fold_size = 0;
    double tau_p1 = 0.0;     // order-1 fold estimate (raw jump for density)
    double tau_q2 = 0.0;     // order-2 fold statistic (bias-corrected jump)
    double fhat_g0 = 0.0;
    bool h_clamped = false;
};

struct TestResult {
    double estimate = 0.0;   // averaged fold/split main statistic
    double bias = 0.0;       // averaged curvature bias (density test only)
    double statistic = 0.0;  // numerator of z (bias-corrected / order-q)
    double se = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool two_sided = false;
    std::vector<double> per_split;        // per-split statistic
    std::vector<FoldDiagnostics> per_fold;
};

struct TestParams {
    int bootstrap_B = 500;
    ForestParams forest;
    DensityForestParams density_forest;
    // Oracle sign at a boundary point; bypasses forest estimation.
    std::function<int(const Eigen::VectorXd&)> oracle_sign;
    double h_plus_override = 0.0;   // 0 -> data-driven
    double h_minus_override = 0.0;
};

CrossfitPlan make_plan(long n, int K, int S, std::uint64_t seed,
                       const std::vector<SignedProjection>& projections);

// Average of the two one-sided boundary-corrected KDE limits of the
// signed-distance density at 0.
double estimate_fg0(const std::vector<double>& g);

TestResult distance_rd(const Dataset& data, const BoundaryGeometry& b,
                       const TestParams& params, std::uint64_t seed);

TestResult heterogeneity_test(const Dataset& data, const BoundaryGeometry& b,
                              const CrossfitPlan& plan, const TestParams& params);

TestResult density_test(const Dataset& data, const BoundaryGeometry& b,
                        const CrossfitPlan& plan, const TestParams& params);

double normal_cdf(double z);

}  // namespace rdb
