#pragma once

// Data-generating processes for the simulation studies and a Monte Carlo
// harness producing bias / SE / rejection-rate summaries.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rdb/dataset.hpp"
#include "rdb/geometry.hpp"
#include "rdb/global_test.hpp"

namespace rdb {

enum class DgpName { IntroQuadrant, HetDgp1, HetDgp2, DensDgp1, DensDgp2 };

DgpName parse_dgp_name(const std::string& name);

struct DgpSpec {
    DgpName name = DgpName::HetDgp2;
    long n = 1000;
    double noise_sd = 0.22360679774997896; // sqrt(0.05)
    std::uint64_t seed = 1;
};

// Piecewise conditional mean shared by the intro and heterogeneity DGPs.
double het_dgp1_mean(double x1, double x2);

// The piecewise density of the density DGP 1 (max 2/3 on the square).
double dens_dgp1_density(double x1, double x2);

// True boundary sign functions for the oracle variants.
int true_gamma_dgp1(const Eigen::VectorXd& gamma_point);
int true_lambda_dgp1(const Eigen::VectorXd& gamma_point);

Dataset generate(const DgpSpec& spec);

enum class McTest { Heterogeneity, Density, DistanceRd };

struct McConfig {
    DgpSpec dgp;
    McTest test = McTest::Heterogeneity;
    int K = 2;
    int S = 1;
    int replications = 500;
    double alpha = 0.05;
    double true_value = 0.0; // estimand, for bias reporting
    TestParams params;
    std::uint64_t seed = 1;
};

struct McReport {
    double mean_bias = 0.0;       // mean(estimate - true_value)
    double mean_se = 0.0;
    double rejection_rate = 0.0;
    double rejection_mc_se = 0.0; // sqrt(p(1-p)/R)
    double mean_estimate = 0.0;
    double sd_estimate = 0.0;     // Monte Carlo SD of the test statistic
    double mean_statistic = 0.0;
    int replications = 0;
    int failures = 0;
    double wall_seconds = 0.0;
};

McReport run_monte_carlo(const McConfig& config);

}  // namespace rdb
