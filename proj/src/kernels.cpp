#include "rdb/kernels.hpp"

#include <cassert>
#include <stdexcept>

namespace rdb {

double kernel_moment(int m) {
    // int_0^1 u^m 0.75 (1 - u^2) du
    return 0.75 * (1.0 / (m + 1) - 1.0 / (m + 3));
}

double kernel_sq_moment(int m) {
    // int_0^1 u^m 0.5625 (1 - u^2)^2 du
    return 0.5625 * (1.0 / (m + 1) - 2.0 / (m + 3) + 1.0 / (m + 5));
}

Eigen::MatrixXd moment_matrix(int p, Side side) {
    if (p < 0 || p > 3) throw std::invalid_argument("moment_matrix: p must be in {0,1,2,3}");
    Eigen::MatrixXd G(p + 1, p + 1);
    for (int j = 0; j <= p; ++j)
        for (int k = 0; k <= p; ++k) {
            double m = kernel_moment(j + k);
            // On [-1,0] odd moments flip sign (K symmetric).
            if (side == Side::Minus && (j + k) % 2 == 1) m = -m;
            G(j, k) = m;
        }
    return G;
}

Eigen::MatrixXd sq_moment_matrix(int p, Side side) {
    if (p < 0 || p > 3) throw std::invalid_argument("sq_moment_matrix: p must be in {0,1,2,3}");
    Eigen::MatrixXd P(p + 1, p + 1);
    for (int j = 0; j <= p; ++j)
        for (int k = 0; k <= p; ++k) {
            double m = kernel_sq_moment(j + k);
            if (side == Side::Minus && (j + k) % 2 == 1) m = -m;
            P(j, k) = m;
        }
    return P;
}

BoundaryCoeffs boundary_coeffs() {
    double m0 = kernel_moment(0), m1 = kernel_moment(1), m2 = kernel_moment(2);
    double det = m0 * m2 - m1 * m1;
    assert(det > 0.0);
    BoundaryCoeffs c;
    c.alpha1 = m2 / det;
    c.alpha2 = -m1 / det;
    return c;
}

double corrected_kernel_moment(const BoundaryCoeffs& c, int m) {
    return c.alpha1 * kernel_moment(m) + c.alpha2 * kernel_moment(m + 1);
}

double corrected_kernel_sq_integral(const BoundaryCoeffs& c) {
    return c.alpha1 * c.alpha1 * kernel_sq_moment(0) +
           2.0 * c.alpha1 * c.alpha2 * kernel_sq_moment(1) +
           c.alpha2 * c.alpha2 * kernel_sq_moment(2);
}

double curvature_correction_constant(const BoundaryCoeffs& c) {
    return corrected_kernel_moment(c, 2) / 2.0;
}

}  // namespace rdb
