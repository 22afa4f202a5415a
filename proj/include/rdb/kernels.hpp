#pragma once

// Epanechnikov kernel, one-sided moment matrices, boundary-correction
// coefficients and the curvature kernel L with its second derivative.
// All moments are closed-form polynomial integrals, no quadrature.

#include <cmath>

#include <Eigen/Dense>

namespace rdb {

enum class Side { Plus, Minus };

inline double epanechnikov(double u) {
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

// int_0^1 u^m K(u) du for the Epanechnikov kernel.
double kernel_moment(int m);

// int_0^1 u^m K(u)^2 du.
double kernel_sq_moment(int m);

// Gamma_p^{+/-}: (p+1)x(p+1) matrix of int u^{j+k} K(u) du over [0,1] or
// [-1,0]. Supported orders p in {0,1,2,3}.
Eigen::MatrixXd moment_matrix(int p, Side side);

// Psi_p^{+/-}: same shape with K^2 in the integrand (variance constants).
Eigen::MatrixXd sq_moment_matrix(int p, Side side);

struct BoundaryCoeffs {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

// Solves [[intK, intuK],[intuK, intu2K]] [a1;a2] = [1;0] over [0,1].
BoundaryCoeffs boundary_coeffs();

// int_0^1 u^m (alpha1 + alpha2 u) K(u) du.
double corrected_kernel_moment(const BoundaryCoeffs& c, int m);

// int_0^1 (alpha1 + alpha2 u)^2 K(u)^2 du (equal on both sides by symmetry).
double corrected_kernel_sq_integral(const BoundaryCoeffs& c);

// Bias-correction constant int_0^1 u^2 (alpha1 + alpha2 u) K(u) / 2! du.
double curvature_correction_constant(const BoundaryCoeffs& c);

// L(u) = 30 (1-|u|)^2 u^2 on [-1,1].
inline double curvature_kernel(double u) {
    double a = std::abs(u);
    return a <= 1.0 ? 30.0 * (1.0 - a) * (1.0 - a) * u * u : 0.0;
}

// Piecewise-analytic L''(u); even in u, 0 outside the support.
inline double curvature_kernel_dd(double u) {
    double a = std::abs(u);
    if (a > 1.0) return 0.0;
    return 60.0 - 360.0 * a + 360.0 * a * a;
}

}  // namespace rdb
