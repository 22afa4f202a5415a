#include "rdb/global_test.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdb {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

CrossfitPlan make_plan(long n, int K, int S, std::uint64_t seed,
                       const std::vector<SignedProjection>& projections) {
    if (K < 2) throw PlanError("make_plan: K must be >= 2");
    if (S < 1) throw PlanError("make_plan: S must be >= 1");
    if (n < 2L * K) throw PlanError("make_plan: n too small for K folds");
    if (projections.size() != static_cast<std::size_t>(n))
        throw PlanError("make_plan: projections size mismatch");

    std::vector<int> plus_idx, minus_idx;
    for (long i = 0; i < n; ++i)
        (projections[static_cast<std::size_t>(i)].delta ? plus_idx : minus_idx)
            .push_back(static_cast<int>(i));
    if (static_cast<int>(plus_idx.size()) < K ||
        static_cast<int>(minus_idx.size()) < K)
        throw PlanError("make_plan: a side has fewer than K observations");

    CrossfitPlan plan;
    plan.K = K;
    plan.S = S;
    plan.seed = seed;
    plan.assignment.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
        auto rng = substream(seed, {0x5b117u, static_cast<std::uint64_t>(s)});
        std::vector<int>& fold = plan.assignment[static_cast<std::size_t>(s)];
        fold.assign(static_cast<std::size_t>(n), 0);
        // Deal each side round-robin so folds stay balanced per side.
        int next = 0;
        for (std::vector<int>* side : {&plus_idx, &minus_idx}) {
            std::vector<int> idx = *side;
            std::shuffle(idx.begin(), idx.end(), rng);
            for (int i : idx) {
                fold[static_cast<std::size_t>(i)] = next;
                next = (next + 1) % K;
            }
        }
    }
    return plan;
}

double estimate_fg0(const std::vector<double>& g) {
    const BoundaryCoeffs coeffs = boundary_coeffs();
    const long n = static_cast<long>(g.size());
    std::vector<double> plus, minus;
    for (double v : g) (v >= 0.0 ? plus : minus).push_back(std::abs(v));
    if (plus.empty() || minus.empty())
        throw PlanError("estimate_fg0: a side is empty");

    auto one_side = [&](std::vector<double>& a) {
        double f0, fdd0;
        pilot_estimates(a, f0, fdd0);
        double w = static_cast<double>(a.size()) / n;
        double i2 = corrected_kernel_sq_integral(coeffs);
        double c2 = corrected_kernel_moment(coeffs, 2);
        double V = std::max(f0 * w, 1e-8) * i2 / static_cast<double>(n);
        double B = c2 * fdd0 * w;
        double max_abs = *std::max_element(a.begin(), a.end());
        double h = std::abs(B) < 1e-8 ? max_abs
                                      : std::min(std::pow(V / (B * B), 0.2),
                                                 max_abs);
        h = std::max(h, 1e-6);
        return one_sided_density(a, h, coeffs, n);
    };
    double f = 0.5 * (one_side(plus) + one_side(minus));
    return std::max(f, 1e-8);
}

namespace {

struct FoldData {
    std::vector<int> test_idx;
    std::vector<double> g;
    std::vector<Eigen::VectorXd> gamma_points;
};

FoldData fold_data(const std::vector<SignedProjection>& proj,
                   const std::vector<int>& assignment, int k) {
    FoldData fd;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != k) continue;
        fd.test_idx.push_back(static_cast<int>(i));
        fd.g.push_back(proj[i].g);
        fd.gamma_points.push_back(proj[i].gamma);
    }
    return fd;
}

Dataset complement_dataset(const Dataset& data,
                           const std::vector<SignedProjection>& proj,
                           const std::vector<int>& assignment, int k) {
    Dataset train;
    std::vector<int> rows;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != k) rows.push_back(static_cast<int>(i));
    train.X.resize(rows.size(), data.d());
    if (data.has_outcome()) train.Y.resize(rows.size());
    train.treated.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        train.X.row(static_cast<Eigen::Index>(r)) = data.X.row(rows[r]);
        if (data.has_outcome())
            train.Y(static_cast<Eigen::Index>(r)) = data.Y(rows[r]);
        train.treated.push_back(proj[static_cast<std::size_t>(rows[r])].delta);
    }
    return train;
}

Eigen::MatrixXd rademacher_matrix(long n, int B, std::uint64_t seed) {
    auto rng = substream(seed, {0xb007u});
    std::bernoulli_distribution coin(0.5);
    Eigen::MatrixXd U(n, B);
    for (long i = 0; i < n; ++i)
        for (int b = 0; b < B; ++b) U(i, b) = coin(rng) ? 1.0 : -1.0;
    return U;
}

double finish_se(std::vector<double>& psi_bar, int S, long n, int B,
                 std::uint64_t seed) {
    for (double& v : psi_bar) v /= S;
    Eigen::MatrixXd U = rademacher_matrix(n, B, seed);
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    return multiplier_se(psi_bar, U, rows);
}

}  // namespace

TestResult heterogeneity_test(const Dataset& data, const BoundaryGeometry& b,
                              const CrossfitPlan& plan,
                              const TestParams& params) {
    if (!data.has_outcome())
        throw PlanError("heterogeneity_test: outcome column required");
    const long n = data.n();
    const std::vector<SignedProjection> proj = project_dataset(data.X, b);

    TestResult res;
    std::vector<double> psi_bar(static_cast<std::size_t>(n), 0.0);
    double est_p1 = 0.0, est_q2 = 0.0;

    for (int s = 0; s < plan.S; ++s) {
        const std::vector<int>& assignment =
            plan.assignment[static_cast<std::size_t>(s)];
        double split_p1 = 0.0, split_q2 = 0.0;
        for (int k = 0; k < plan.K; ++k) {
            FoldData fd = fold_data(proj, assignment, k);
            const int nk = static_cast<int>(fd.test_idx.size());
            if (nk == 0)
                throw PlanError("heterogeneity_test: empty fold " +
                                std::to_string(k));
            std::vector<int> sign(fd.gamma_points.size(), 1);
            if (params.oracle_sign) {
                for (std::size_t i = 0; i < fd.gamma_points.size(); ++i)
                    sign[i] = params.oracle_sign(fd.gamma_points[i]);
            } else {
                Dataset train = complement_dataset(data, proj, assignment, k);
                ForestParams fp = params.forest;
                fp.seed = substream(plan.seed,
                                    {0x6a66au, static_cast<std::uint64_t>(s),
                                     static_cast<std::uint64_t>(k)})();
                try {
                    sign = estimate_gamma(train, fd.gamma_points, fp);
                } catch (const ForestError& e) {
                    throw PlanError("heterogeneity_test: fold " +
                                    std::to_string(k) + ": " + e.what());
                }
            }
            Eigen::VectorXd yhat(nk);
            int ones = 0;
            for (int i = 0; i < nk; ++i) {
                ones += sign[static_cast<std::size_t>(i)];
                yhat(i) = (2 * sign[static_cast<std::size_t>(i)] - 1) *
                          data.Y(fd.test_idx[static_cast<std::size_t>(i)]);
            }
            double fhat = estimate_fg0(fd.g);
            BandwidthResult bwp, bwm;
            if (params.h_plus_override > 0.0) {
                bwp.h = params.h_plus_override;
                bwm.h = params.h_minus_override > 0.0 ? params.h_minus_override
                                                      : params.h_plus_override;
            } else {
                bwp = select_bandwidth(fd.g, yhat, Side::Plus, 1, fhat);
                bwm = select_bandwidth(fd.g, yhat, Side::Minus, 1, fhat);
            }
            FoldFit fit1, fit2;
            try {
                fit1 = tau_fold(fd.g, yhat, bwp.h, bwm.h, 1);
                fit2 = tau_fold(fd.g, yhat, bwp.h, bwm.h, 2);
            } catch (const LocalPolyError& e) {
                throw PlanError("heterogeneity_test: fold " +
                                std::to_string(k) + ": " + e.what());
            }
            std::vector<double> psi = bootstrap_influence(
                fd.g, yhat, fit2, fhat,
                static_cast<double>(plan.K) * nk);
            for (int i = 0; i < nk; ++i)
                psi_bar[static_cast<std::size_t>(
                    fd.test_idx[static_cast<std::size_t>(i)])] +=
                    psi[static_cast<std::size_t>(i)];
            split_p1 += fit1.tau / plan.K;
            split_q2 += fit2.tau / plan.K;

            FoldDiagnostics diag;
            diag.split = s;
            diag.fold = k;
            diag.h_plus = bwp.h;
            diag.h_minus = bwm.h;
            diag.n_effective_plus = fit2.n_effective_plus;
            diag.n_effective_minus = fit2.n_effective_minus;
            diag.sign_ones = ones;
            diag.fold_size = nk;
            diag.tau_p1 = fit1.tau;
            diag.tau_q2 = fit2.tau;
            diag.fhat_g0 = fhat;
            diag.h_clamped = bwp.clamped_curvature || bwm.clamped_curvature;
            res.per_fold.push_back(diag);
        }
        est_p1 += split_p1 / plan.S;
        est_q2 += split_q2 / plan.S;
        res.per_split.push_back(split_q2);
    }

    res.estimate = est_p1;
    res.bias = 0.0;
    res.statistic = est_q2;
    res.se = finish_se(psi_bar, plan.S, n, params.bootstrap_B, plan.seed);
    res.z = res.se > 0.0 ? res.statistic / res.se : 0.0;
    res.p_value = 1.0 - normal_cdf(res.z);
    return res;
}

TestResult density_test(const Dataset& data, const BoundaryGeometry& b,
                        const CrossfitPlan& plan, const TestParams& params) {
    const long n = data.n();
    const std::vector<SignedProjection> proj = project_dataset(data.X, b);
    const BoundaryCoeffs coeffs = boundary_coeffs();

    TestResult res;
    std::vector<double> psi_bar(static_cast<std::size_t>(n), 0.0);
    double est_raw = 0.0, est_bias = 0.0;

    for (int s = 0; s < plan.S; ++s) {
        const std::vector<int>& assignment =
            plan.assignment[static_cast<std::size_t>(s)];
        double split_bc = 0.0;
        for (int k = 0; k < plan.K; ++k) {
            FoldData fd = fold_data(proj, assignment, k);
            const int nk = static_cast<int>(fd.test_idx.size());
            if (nk == 0)
                throw PlanError("density_test: empty fold " + std::to_string(k));
            std::vector<int> sign(fd.gamma_points.size(), 1);
            if (params.oracle_sign) {
                for (std::size_t i = 0; i < fd.gamma_points.size(); ++i)
                    sign[i] = params.oracle_sign(fd.gamma_points[i]);
            } else {
                Dataset train = complement_dataset(data, proj, assignment, k);
                DensityForestParams dp = params.density_forest;
                dp.seed = substream(plan.seed,
                                    {0xd2f5u, static_cast<std::uint64_t>(s),
                                     static_cast<std::uint64_t>(k)})();
                try {
                    sign = estimate_lambda(train, b, fd.gamma_points, dp);
                } catch (const DensityError& e) {
                    throw PlanError("density_test: fold " + std::to_string(k) +
                                    ": " + e.what());
                }
            }
            std::vector<double> gstar(fd.g.size());
            int ones = 0;
            for (std::size_t i = 0; i < fd.g.size(); ++i) {
                ones += sign[i];
                gstar[i] = (2 * sign[i] - 1) * fd.g[i];
            }
            DensityFoldFit fit;
            try {
                fit = density_fold_fit(gstar, coeffs);
            } catch (const KdeError& e) {
                throw PlanError("density_test: fold " + std::to_string(k) +
                                ": " + e.what());
            }
            std::vector<double> psi = density_influence(
                gstar, fit.h, coeffs, fit.pilot,
                static_cast<double>(plan.K) * nk);
            for (int i = 0; i < nk; ++i)
                psi_bar[static_cast<std::size_t>(
                    fd.test_idx[static_cast<std::size_t>(i)])] +=
                    psi[static_cast<std::size_t>(i)];
            est_raw += fit.jump_raw / (plan.K * plan.S);
            est_bias += fit.bias / (plan.K * plan.S);
            split_bc += fit.jump_bc / plan.K;

            FoldDiagnostics diag;
            diag.split = s;
            diag.fold = k;
            diag.h_plus = fit.h;
            diag.h_minus = fit.h;
            diag.sign_ones = ones;
            diag.fold_size = nk;
            diag.tau_p1 = fit.jump_raw;
            diag.tau_q2 = fit.jump_bc;
            diag.fhat_g0 = fit.pilot.f_plus + fit.pilot.f_minus;
            diag.h_clamped = fit.h_clamped;
            res.per_fold.push_back(diag);
        }
        res.per_split.push_back(split_bc);
    }

    res.estimate = est_raw;
    res.bias = est_bias;
    res.statistic = est_raw - est_bias;
    res.se = finish_se(psi_bar, plan.S, n, params.bootstrap_B, plan.seed);
    res.z = res.se > 0.0 ? res.statistic / res.se : 0.0;
    res.p_value = 1.0 - normal_cdf(res.z);
    return res;
}

TestResult distance_rd(const Dataset& data, const BoundaryGeometry& b,
                       const TestParams& params, std::uint64_t seed) {
    if (!data.has_outcome())
        throw PlanError("distance_rd: outcome column required");
    const long n = data.n();
    const std::vector<SignedProjection> proj = project_dataset(data.X, b);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] =
        proj[static_cast<std::size_t>(i)].g;

    double fhat = estimate_fg0(g);
    BandwidthResult bwp, bwm;
    if (params.h_plus_override > 0.0) {
        bwp.h = params.h_plus_override;
        bwm.h = params.h_minus_override > 0.0 ? params.h_minus_override
                                              : params.h_plus_override;
    } else {
        bwp = select_bandwidth(g, data.Y, Side::Plus, 1, fhat);
        bwm = select_bandwidth(g, data.Y, Side::Minus, 1, fhat);
    }
    FoldFit fit1 = tau_fold(g, data.Y, bwp.h, bwm.h, 1);
    FoldFit fit2 = tau_fold(g, data.Y, bwp.h, bwm.h, 2);
    std::vector<double> psi =
        bootstrap_influence(g, data.Y, fit2, fhat, static_cast<double>(n));

    TestResult res;
    res.estimate = fit1.tau;
    res.statistic = fit2.tau;
    res.two_sided = true;
    res.se = finish_se(psi, 1, n, params.bootstrap_B, seed);
    res.z = res.se > 0.0 ? res.statistic / res.se : 0.0;
    res.p_value = 2.0 * (1.0 - normal_cdf(std::abs(res.z)));

    FoldDiagnostics diag;
    diag.h_plus = bwp.h;
    diag.h_minus = bwm.h;
    diag.n_effective_plus = fit2.n_effective_plus;
    diag.n_effective_minus = fit2.n_effective_minus;
    diag.fold_size = static_cast<int>(n);
    diag.tau_p1 = fit1.tau;
    diag.tau_q2 = fit2.tau;
    diag.fhat_g0 = fhat;
    res.per_fold.push_back(diag);
    res.per_split.push_back(fit2.tau);
    return res;
}

}  // namespace rdb
