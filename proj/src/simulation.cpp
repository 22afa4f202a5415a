#include "rdb/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace rdb {

DgpName parse_dgp_name(const std::string& name) {
    if (name == "intro_quadrant") return DgpName::IntroQuadrant;
    if (name == "het_dgp1") return DgpName::HetDgp1;
    if (name == "het_dgp2") return DgpName::HetDgp2;
    if (name == "dens_dgp1") return DgpName::DensDgp1;
    if (name == "dens_dgp2") return DgpName::DensDgp2;
    throw std::invalid_argument("unknown DGP name: " + name);
}

double het_dgp1_mean(double x1, double x2) {
    if (x1 >= 0.0 && x2 >= 0.0) return (x1 + x2) / 3.0;
    if (x1 >= 0.0) return (1.0 - x1) / 3.0;
    if (x2 >= 0.0) return (1.0 - x2) / 3.0;
    return 1.0 / 3.0;
}

double dens_dgp1_density(double x1, double x2) {
    if (x1 < -1.0 || x1 > 1.0 || x2 < -1.0 || x2 > 1.0) return 0.0;
    return het_dgp1_mean(x1, x2);
}

int true_gamma_dgp1(const Eigen::VectorXd& gamma_point) {
    // On either boundary segment one coordinate is 0; the jump sign is
    // positive iff the nonzero coordinate is >= 1/2.
    double t = std::max(gamma_point(0), gamma_point(1));
    return t >= 0.5 ? 1 : 0;
}

int true_lambda_dgp1(const Eigen::VectorXd& gamma_point) {
    return true_gamma_dgp1(gamma_point);
}

Dataset generate(const DgpSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("generate: n must be >= 1");
    auto rng = substream(spec.seed, {0xd6bu});
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);

    Dataset data;
    data.X.resize(spec.n, 2);
    bool has_y = spec.name == DgpName::IntroQuadrant ||
                 spec.name == DgpName::HetDgp1 || spec.name == DgpName::HetDgp2;
    if (has_y) data.Y.resize(spec.n);
    data.treated.reserve(static_cast<std::size_t>(spec.n));

    std::uniform_real_distribution<double> env(0.0, 2.0 / 3.0);
    for (long i = 0; i < spec.n; ++i) {
        double x1, x2;
        if (spec.name == DgpName::DensDgp1) {
            // Rejection sampling against the uniform envelope; the density
            // peaks at 2/3 on the square.
            do {
                x1 = unif(rng);
                x2 = unif(rng);
            } while (env(rng) > dens_dgp1_density(x1, x2));
        } else {
            x1 = unif(rng);
            x2 = unif(rng);
        }
        data.X(i, 0) = x1;
        data.X(i, 1) = x2;
        data.treated.push_back(x1 >= 0.0 && x2 >= 0.0 ? 1 : 0);
        if (!has_y) continue;
        double mean = spec.name == DgpName::HetDgp1 ? het_dgp1_mean(x1, x2)
                                                    : (x1 + x2) / 3.0;
        data.Y(i) = mean + noise(rng);
    }
    return data;
}

McReport run_monte_carlo(const McConfig& config) {
    const int R = config.replications;
    if (R < 1) throw std::invalid_argument("run_monte_carlo: R must be >= 1");
    auto t0 = std::chrono::steady_clock::now();
    const BoundaryGeometry boundary = quadrant_boundary();

    struct RepOut {
        bool ok = false;
        double estimate = 0.0, statistic = 0.0, se = 0.0;
        bool reject = false;
    };
    std::vector<RepOut> out(static_cast<std::size_t>(R));

    auto run_one = [&](int r) {
        DgpSpec dgp = config.dgp;
        dgp.seed = substream(config.seed, {0x9e6u, static_cast<std::uint64_t>(r), 1})();
        Dataset data = generate(dgp);
        std::uint64_t test_seed =
            substream(config.seed, {0x9e6u, static_cast<std::uint64_t>(r), 2})();
        TestResult res;
        if (config.test == McTest::DistanceRd) {
            res = distance_rd(data, boundary, config.params, test_seed);
        } else {
            std::vector<SignedProjection> proj =
                project_dataset(data.X, boundary);
            CrossfitPlan plan =
                make_plan(data.n(), config.K, config.S, test_seed, proj);
            res = config.test == McTest::Heterogeneity
                      ? heterogeneity_test(data, boundary, plan, config.params)
                      : density_test(data, boundary, plan, config.params);
        }
        RepOut& o = out[static_cast<std::size_t>(r)];
        o.ok = true;
        // The density test's point estimate is the bias-corrected jump.
        o.estimate =
            config.test == McTest::Density ? res.statistic : res.estimate;
        o.statistic = res.statistic;
        o.se = res.se;
        o.reject = res.p_value < config.alpha;
    };

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(R)));
    if (workers <= 1) {
        for (int r = 0; r < R; ++r) {
            try { run_one(r); } catch (const std::exception&) {}
        }
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                int r = next.fetch_add(1);
                if (r >= R) return;
                try { run_one(r); } catch (const std::exception&) {}
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    McReport rep;
    rep.replications = R;
    int ok = 0, rejects = 0;
    double sum_est = 0.0, sum_stat = 0.0, sum_se = 0.0;
    for (const RepOut& o : out) {
        if (!o.ok) { ++rep.failures; continue; }
        ++ok;
        sum_est += o.estimate;
        sum_stat += o.statistic;
        sum_se += o.se;
        rejects += o.reject ? 1 : 0;
    }
    if (ok > 0) {
        rep.mean_estimate = sum_est / ok;
        rep.mean_statistic = sum_stat / ok;
        rep.mean_se = sum_se / ok;
        rep.mean_bias = rep.mean_estimate - config.true_value;
        rep.rejection_rate = static_cast<double>(rejects) / ok;
        rep.rejection_mc_se = std::sqrt(
            rep.rejection_rate * (1.0 - rep.rejection_rate) / ok);
        double ss = 0.0;
        for (const RepOut& o : out)
            if (o.ok) ss += (o.statistic - rep.mean_statistic) *
                            (o.statistic - rep.mean_statistic);
        rep.sd_estimate = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
    }
    rep.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    return rep;
}

}  // namespace rdb
