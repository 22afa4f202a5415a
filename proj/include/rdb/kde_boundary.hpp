#pragma once

// Boundary-corrected kernel density jump estimator at 0 with curvature
// bias correction, MSE-optimal bandwidth and multiplier-bootstrap
// influence contributions.

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rdb/kernels.hpp"

namespace rdb {

struct KdeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PilotEstimates {
    double f_plus = 0.0, f_minus = 0.0;    // one-sided density levels at 0
    double fdd_plus = 0.0, fdd_minus = 0.0; // one-sided second derivatives
};

struct DensityFoldFit {
    double jump_raw = 0.0;  // uncorrected f+ - f- at 0
    double bias = 0.0;      // estimated curvature bias B_k
    double jump_bc = 0.0;   // jump_raw - bias
    double h = 0.0;
    PilotEstimates pilot;
    bool h_clamped = false;
};

// sum (1/nh) (a1 + a2 |g/h|) K(g/h) (2 delta - 1), delta = 1(g >= 0).
double kde_jump(const std::vector<double>& gstar, double h,
                const BoundaryCoeffs& coeffs);

// (1/n h^3) sum L''(g/h) (2 delta - 1).
double curvature_jump(const std::vector<double>& gstar, double h);

// jump_raw minus h^2 * C * curvature_jump, with
// C = int_0^1 u^2 (a1 + a2 u) K(u) / 2! du.
double bias_corrected_jump(const std::vector<double>& gstar, double h,
                           const BoundaryCoeffs& coeffs);

// One-sided boundary-corrected density estimate at 0 from the side's
// samples, normalized by n_total (unconditional density scale).
double one_sided_density(const std::vector<double>& g_side_abs, double h,
                         const BoundaryCoeffs& coeffs, long n_total);

// Order-4 local polynomial fit of the side's empirical CDF on |g|;
// first derivative at 0 gives f(0), third gives f''(0). Pilot bandwidth
// 2 SD(|g|) n^{-1/7}, clamped to the data range.
void pilot_estimates(const std::vector<double>& g_side_abs, double& f0,
                     double& fdd0);

struct KdeBandwidthResult {
    double h = 0.0;
    bool clamped = false; // |B_k| below floor, clamped to max |g|
};

// h = (V_k / B_k^2)^{1/5} with closed-form kernel integrals.
KdeBandwidthResult mse_bandwidth(const PilotEstimates& pilot,
                                 const BoundaryCoeffs& coeffs, long n,
                                 double max_abs_g);

// Per-observation influence contribution of the bias-corrected fold
// statistic; `scale` is the effective sample size of the aggregated
// statistic (K * n_k for a K-fold average).
std::vector<double> density_influence(const std::vector<double>& gstar,
                                      double h, const BoundaryCoeffs& coeffs,
                                      const PilotEstimates& pilot,
                                      double scale);

// Full per-fold fit: pilots, bandwidth, raw and bias-corrected jump.
DensityFoldFit density_fold_fit(const std::vector<double>& gstar,
                                const BoundaryCoeffs& coeffs);

}  // namespace rdb
