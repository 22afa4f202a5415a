#pragma once

// Univariate local polynomial estimator on the signed-distance running
// variable, plus the multiplier-bootstrap influence contributions used
// for inference.

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rdb/kernels.hpp"

namespace rdb {

struct LocalPolyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FoldFit {
    Eigen::VectorXd beta_plus, beta_minus;
    double h_plus = 0.0, h_minus = 0.0;
    int p = 1;
    double tau = 0.0;
    int n_effective_plus = 0, n_effective_minus = 0;
};

struct BandwidthResult {
    double h = 0.0;
    bool clamped_curvature = false; // curvature pilot vanished, upper clamp
};

// Weighted least squares of yhat on r_p(g) with weights K(g/h), restricted
// to one side of zero (g = 0 belongs to the + side).
Eigen::VectorXd local_poly_fit(const std::vector<double>& g,
                               const Eigen::VectorXd& yhat, Side side,
                               double h, int p);

FoldFit tau_fold(const std::vector<double>& g, const Eigen::VectorXd& yhat,
                 double h_plus, double h_minus, int p);

// Per-observation influence contribution of the fold statistic at order q:
//   e1' (Gamma_q^s)^-1 r_q(g/h_s) K(g/h_s) (yhat - r_q(g)'beta_q^s) * sgn(s)
//   / (scale * h_s * fhat_g0)
// where s is the observation's side and sgn is +1 / -1. `scale` is the
// effective sample size of the aggregated statistic (K * n_k for a K-fold
// average). Multiplying by a +/-1 weight matrix and summing gives the
// bootstrap draws phi_b^+ - phi_b^-.
std::vector<double> bootstrap_influence(const std::vector<double>& g,
                                        const Eigen::VectorXd& yhat,
                                        const FoldFit& fit_q, double fhat_g0,
                                        double scale);

// SE over bootstrap columns of sum_i U(i,b) * psi_i.
double multiplier_se(const std::vector<double>& psi,
                     const Eigen::MatrixXd& weights,
                     const std::vector<int>& rows);

// Plug-in MSE-optimal bandwidth for order p with coverage-error rescaling
// n^{-p/((3+p)(3+2p))}, clamped to [5th percentile of |g|, max |g|] on the
// side. Pilot: global quartic fit giving the (p+1)-th derivative at 0 and
// the residual variance.
BandwidthResult select_bandwidth(const std::vector<double>& g,
                                 const Eigen::VectorXd& yhat, Side side, int p,
                                 double fhat_g0);

}  // namespace rdb
