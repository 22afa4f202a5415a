#include "rdb/rd_local_poly.hpp"

#include <algorithm>
#include <cmath>

namespace rdb {

namespace {

Eigen::VectorXd poly_row(double u, int p) {
    Eigen::VectorXd r(p + 1);
    double v = 1.0;
    for (int j = 0; j <= p; ++j) {
        r(j) = v;
        v *= u;
    }
    return r;
}

bool on_side(double g, Side side) {
    return side == Side::Plus ? g >= 0.0 : g < 0.0;
}

}  // namespace

Eigen::VectorXd local_poly_fit(const std::vector<double>& g,
                               const Eigen::VectorXd& yhat, Side side,
                               double h, int p) {
    if (h <= 0.0) throw LocalPolyError("local_poly_fit: bandwidth must be > 0");
    std::vector<int> rows;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (on_side(g[i], side) && std::abs(g[i] / h) <= 1.0)
            rows.push_back(static_cast<int>(i));
    if (static_cast<int>(rows.size()) < p + 2)
        throw LocalPolyError("local_poly_fit: degenerate fold side");

    Eigen::MatrixXd D(rows.size(), p + 1);
    Eigen::VectorXd t(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        int i = rows[r];
        double sw = std::sqrt(epanechnikov(g[static_cast<std::size_t>(i)] / h));
        D.row(static_cast<Eigen::Index>(r)) =
            sw * poly_row(g[static_cast<std::size_t>(i)], p).transpose();
        t(static_cast<Eigen::Index>(r)) = sw * yhat(i);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    if (qr.rank() < p + 1)
        throw LocalPolyError("local_poly_fit: singular design");
    return qr.solve(t);
}

FoldFit tau_fold(const std::vector<double>& g, const Eigen::VectorXd& yhat,
                 double h_plus, double h_minus, int p) {
    FoldFit f;
    f.p = p;
    f.h_plus = h_plus;
    f.h_minus = h_minus;
    f.beta_plus = local_poly_fit(g, yhat, Side::Plus, h_plus, p);
    f.beta_minus = local_poly_fit(g, yhat, Side::Minus, h_minus, p);
    f.tau = f.beta_plus(0) - f.beta_minus(0);
    for (double gi : g) {
        if (gi >= 0.0 && gi / h_plus <= 1.0) ++f.n_effective_plus;
        if (gi < 0.0 && -gi / h_minus <= 1.0) ++f.n_effective_minus;
    }
    return f;
}

std::vector<double> bootstrap_influence(const std::vector<double>& g,
                                        const Eigen::VectorXd& yhat,
                                        const FoldFit& fit_q, double fhat_g0,
                                        double scale) {
    if (fhat_g0 <= 0.0)
        throw LocalPolyError("bootstrap_influence: fhat_g0 must be > 0");
    const int q = fit_q.p;
    // Realized kernel-weighted design moments, normalized so they converge
    // to the asymptotic one-sided moment matrices; using the realized
    // design makes the bootstrap draw an exact linearization of the WLS
    // intercept instead of relying on nh being large.
    const double n_fold = static_cast<double>(g.size());
    Eigen::MatrixXd m_plus = Eigen::MatrixXd::Zero(q + 1, q + 1);
    Eigen::MatrixXd m_minus = Eigen::MatrixXd::Zero(q + 1, q + 1);
    for (double gi : g) {
        bool plus = gi >= 0.0;
        double h = plus ? fit_q.h_plus : fit_q.h_minus;
        double u = gi / h;
        double k = epanechnikov(u);
        if (k == 0.0) continue;
        Eigen::VectorXd r = poly_row(u, q);
        (plus ? m_plus : m_minus) +=
            r * r.transpose() * (k / (n_fold * h * fhat_g0));
    }
    auto lever_weights = [&](const Eigen::MatrixXd& emp, Side side) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(emp);
        if (lu.isInvertible())
            return Eigen::VectorXd(lu.solve(Eigen::VectorXd::Unit(q + 1, 0)));
        return Eigen::VectorXd(moment_matrix(q, side).ldlt().solve(
            Eigen::VectorXd::Unit(q + 1, 0)));
    };
    Eigen::VectorXd w_plus = lever_weights(m_plus, Side::Plus);
    Eigen::VectorXd w_minus = lever_weights(m_minus, Side::Minus);

    std::vector<double> psi(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool plus = g[i] >= 0.0;
        double h = plus ? fit_q.h_plus : fit_q.h_minus;
        double u = g[i] / h;
        double k = epanechnikov(u);
        if (k == 0.0) continue;
        const Eigen::VectorXd& beta = plus ? fit_q.beta_plus : fit_q.beta_minus;
        const Eigen::VectorXd& w = plus ? w_plus : w_minus;
        double resid = yhat(static_cast<Eigen::Index>(i)) -
                       poly_row(g[i], q).dot(beta);
        double lever = w.dot(poly_row(u, q));
        double sign = plus ? 1.0 : -1.0;
        psi[i] = sign * lever * k * resid / (scale * h * fhat_g0);
    }
    return psi;
}

double multiplier_se(const std::vector<double>& psi,
                     const Eigen::MatrixXd& weights,
                     const std::vector<int>& rows) {
    const Eigen::Index B = weights.cols();
    if (B < 2) throw LocalPolyError("multiplier_se: need B >= 2");
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(B);
    for (std::size_t j = 0; j < rows.size(); ++j)
        phi += psi[j] * weights.row(rows[j]).transpose();
    double mean = phi.mean();
    double ss = (phi.array() - mean).square().sum();
    return std::sqrt(ss / static_cast<double>(B - 1));
}

BandwidthResult select_bandwidth(const std::vector<double>& g,
                                 const Eigen::VectorXd& yhat, Side side, int p,
                                 double fhat_g0) {
    std::vector<double> gs;
    std::vector<int> rows;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (on_side(g[i], side)) {
            gs.push_back(std::abs(g[i]));
            rows.push_back(static_cast<int>(i));
        }
    const int m = static_cast<int>(rows.size());
    if (m < 20)
        throw LocalPolyError("select_bandwidth: need >= 20 side observations");

    std::vector<double> sorted = gs;
    std::sort(sorted.begin(), sorted.end());
    double lo_clamp = sorted[static_cast<std::size_t>(0.05 * (m - 1))];
    double hi_clamp = sorted.back();
    BandwidthResult out;

    // Pilot: global quartic fit on the side.
    const int pilot_order = 4;
    Eigen::MatrixXd D(m, pilot_order + 1);
    Eigen::VectorXd t(m);
    for (int r = 0; r < m; ++r) {
        D.row(r) = poly_row(g[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])],
                            pilot_order)
                       .transpose();
        t(r) = yhat(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    Eigen::VectorXd beta = qr.solve(t);
    double sigma2 =
        (t - D * beta).squaredNorm() / std::max(1, m - pilot_order - 1);
    double deriv_coef = beta(p + 1); // m^{(p+1)}(0) / (p+1)!

    if (std::abs(deriv_coef) < 1e-10 || sigma2 <= 0.0) {
        out.h = hi_clamp;
        out.clamped_curvature = true;
        return out;
    }

    // The squared pilot curvature is biased upward by its own sampling
    // noise, which drags the bandwidth down on smooth functions; debias it
    // by the estimated coefficient variance, with a floor so a pure-noise
    // pilot cannot blow the bandwidth up unboundedly.
    Eigen::MatrixXd dtd = (D.transpose() * D).inverse();
    double deriv_var = sigma2 * dtd(p + 1, p + 1);
    double deriv2 =
        std::max(deriv_coef * deriv_coef - deriv_var,
                 0.05 * std::max(deriv_coef * deriv_coef, deriv_var));

    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(p + 1, 0);
    Eigen::MatrixXd G = moment_matrix(p, side);
    Eigen::VectorXd w = G.ldlt().solve(e1);
    double v_k = w.dot(sq_moment_matrix(p, side) * w);
    Eigen::VectorXd c(p + 1);
    for (int j = 0; j <= p; ++j) {
        double mm = kernel_moment(p + 1 + j);
        if (side == Side::Minus && (p + 1 + j) % 2 == 1) mm = -mm;
        c(j) = mm;
    }
    double b_k = w.dot(c);
    double bias2 = b_k * b_k * deriv2;
    double h_mse = std::pow(
        v_k * sigma2 / (2.0 * (p + 1) * bias2 * fhat_g0 * m),
        1.0 / (2.0 * p + 3.0));
    double ce = std::pow(static_cast<double>(m),
                         -static_cast<double>(p) / ((3.0 + p) * (3.0 + 2.0 * p)));
    out.h = std::clamp(h_mse * ce, lo_clamp, hi_clamp);
    return out;
}

}  // namespace rdb
