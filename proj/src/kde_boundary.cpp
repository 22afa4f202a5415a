#include "rdb/kde_boundary.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rdb {

double kde_jump(const std::vector<double>& gstar, double h,
                const BoundaryCoeffs& coeffs) {
    if (h <= 0.0) throw KdeError("kde_jump: bandwidth must be > 0");
    const std::size_t n = gstar.size();
    if (n < 1) throw KdeError("kde_jump: empty sample");
    double acc = 0.0;
    for (double g : gstar) {
        double u = g / h;
        double k = epanechnikov(u);
        if (k == 0.0) continue;
        double sign = g >= 0.0 ? 1.0 : -1.0;
        acc += (coeffs.alpha1 + coeffs.alpha2 * std::abs(u)) * k * sign;
    }
    return acc / (static_cast<double>(n) * h);
}

double curvature_jump(const std::vector<double>& gstar, double h) {
    if (h <= 0.0) throw KdeError("curvature_jump: bandwidth must be > 0");
    double acc = 0.0;
    for (double g : gstar) {
        double u = g / h;
        if (std::abs(u) > 1.0) continue;
        acc += curvature_kernel_dd(u) * (g >= 0.0 ? 1.0 : -1.0);
    }
    return acc / (static_cast<double>(gstar.size()) * h * h * h);
}

double bias_corrected_jump(const std::vector<double>& gstar, double h,
                           const BoundaryCoeffs& coeffs) {
    double c = curvature_correction_constant(coeffs);
    return kde_jump(gstar, h, coeffs) - h * h * c * curvature_jump(gstar, h);
}

double one_sided_density(const std::vector<double>& g_side_abs, double h,
                         const BoundaryCoeffs& coeffs, long n_total) {
    if (h <= 0.0) throw KdeError("one_sided_density: bandwidth must be > 0");
    double acc = 0.0;
    for (double a : g_side_abs) {
        double u = a / h;
        double k = epanechnikov(u);
        if (k == 0.0) continue;
        acc += (coeffs.alpha1 + coeffs.alpha2 * u) * k;
    }
    return acc / (static_cast<double>(n_total) * h);
}

void pilot_estimates(const std::vector<double>& g_side_abs, double& f0,
                     double& fdd0) {
    const int m = static_cast<int>(g_side_abs.size());
    if (m < 30) throw KdeError("pilot_estimates: need >= 30 side observations");
    std::vector<double> t = g_side_abs;
    std::sort(t.begin(), t.end());

    // Third-derivative extraction from an empirical CDF is hopelessly noisy
    // in narrow windows, so the quartic pilot is fit over the whole side
    // sample (still kernel-downweighted toward the far tail).
    double h = t.back();
    // Keep at least 6 points inside the window (order-4 fit).
    h = std::max(h, t[5] * 1.0001 + 1e-12);

    const int order = 4;
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
        if (t[static_cast<std::size_t>(i)] <= h) rows.push_back(i);
    Eigen::MatrixXd D(rows.size(), order + 1);
    Eigen::VectorXd y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double ti = t[static_cast<std::size_t>(rows[r])];
        double sw = std::sqrt(std::max(epanechnikov(ti / h), 1e-8));
        double v = sw;
        for (int j = 0; j <= order; ++j) {
            D(static_cast<Eigen::Index>(r), j) = v;
            v *= ti;
        }
        y(static_cast<Eigen::Index>(r)) = sw * (rows[r] + 0.5) / m;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    Eigen::VectorXd beta = qr.solve(y);
    f0 = std::max(beta(1), 0.0);
    fdd0 = 6.0 * beta(3);
}

KdeBandwidthResult mse_bandwidth(const PilotEstimates& pilot,
                                 const BoundaryCoeffs& coeffs, long n,
                                 double max_abs_g) {
    double i2 = corrected_kernel_sq_integral(coeffs);
    double V = (pilot.f_plus + pilot.f_minus) * i2 / static_cast<double>(n);
    assert(V >= 0.0);
    double c2 = corrected_kernel_moment(coeffs, 2);
    double B = c2 * (pilot.fdd_plus - pilot.fdd_minus);
    KdeBandwidthResult out;
    if (std::abs(B) < 1e-8 || V <= 0.0) {
        out.h = max_abs_g;
        out.clamped = true;
        return out;
    }
    out.h = std::min(std::pow(V / (B * B), 0.2), max_abs_g);
    out.h = std::max(out.h, 1e-6);
    return out;
}

std::vector<double> density_influence(const std::vector<double>& gstar,
                                      double h, const BoundaryCoeffs& coeffs,
                                      const PilotEstimates& pilot,
                                      double scale) {
    double c = curvature_correction_constant(coeffs);
    std::vector<double> psi(gstar.size());
    for (std::size_t i = 0; i < gstar.size(); ++i) {
        double g = gstar[i];
        bool plus = g >= 0.0;
        double u = g / h;
        double k = epanechnikov(u);
        double ldd = std::abs(u) <= 1.0 ? curvature_kernel_dd(u) : 0.0;
        double f0 = plus ? pilot.f_plus : pilot.f_minus;
        double fdd0 = plus ? pilot.fdd_plus : pilot.fdd_minus;
        double term = (coeffs.alpha1 + coeffs.alpha2 * std::abs(u)) * k -
                      h * f0 - (ldd - h * fdd0) * c;
        psi[i] = (plus ? 1.0 : -1.0) * term / (scale * h);
    }
    return psi;
}

DensityFoldFit density_fold_fit(const std::vector<double>& gstar,
                                const BoundaryCoeffs& coeffs) {
    std::vector<double> plus, minus;
    double max_abs = 0.0;
    for (double g : gstar) {
        (g >= 0.0 ? plus : minus).push_back(std::abs(g));
        max_abs = std::max(max_abs, std::abs(g));
    }
    if (plus.empty() || minus.empty())
        throw KdeError("density_fold_fit: a side is empty");
    const long n = static_cast<long>(gstar.size());

    DensityFoldFit fit;
    double fp, fddp, fm, fddm;
    pilot_estimates(plus, fp, fddp);
    pilot_estimates(minus, fm, fddm);
    // Pilots are conditional on the side; rescale to the unconditional
    // density of g*.
    double wp = static_cast<double>(plus.size()) / n;
    double wm = static_cast<double>(minus.size()) / n;
    fit.pilot.f_plus = fp * wp;
    fit.pilot.f_minus = fm * wm;
    fit.pilot.fdd_plus = fddp * wp;
    fit.pilot.fdd_minus = fddm * wm;

    KdeBandwidthResult bw = mse_bandwidth(fit.pilot, coeffs, n, max_abs);
    fit.h = bw.h;
    fit.h_clamped = bw.clamped;
    fit.jump_raw = kde_jump(gstar, fit.h, coeffs);
    fit.bias = fit.h * fit.h * curvature_correction_constant(coeffs) *
               curvature_jump(gstar, fit.h);
    fit.jump_bc = fit.jump_raw - fit.bias;
    return fit;
}

}  // namespace rdb
