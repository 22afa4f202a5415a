// Command-line interface: boundary-discontinuity tests on CSV data plus
// the simulation harness.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdb/global_test.hpp"
#include "rdb/io.hpp"
#include "rdb/simulation.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    std::string data_path, boundary_path, outcome_col;
    std::vector<std::string> x_cols;
    int folds = 2, splits = 1, bootstrap = 500;
    std::uint64_t seed = 1;
    bool standardize = false;
    std::string out_path, format = "table";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_outcome) {
    cmd->add_option("--data", o.data_path, "headered CSV data file")->required();
    cmd->add_option("--boundary", o.boundary_path, "boundary spec file")->required();
    if (needs_outcome)
        cmd->add_option("--outcome-col", o.outcome_col, "outcome column name")
            ->required();
    cmd->add_option("--x-cols", o.x_cols, "running-variable column names")
        ->required();
    cmd->add_option("--folds", o.folds, "cross-fitting folds K");
    cmd->add_option("--splits", o.splits, "repeated splits S");
    cmd->add_option("--bootstrap", o.bootstrap, "multiplier bootstrap draws B");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_flag("--standardize", o.standardize,
                  "divide each running variable by its sample SD before "
                  "projection (boundary must be in the same units)");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
    cmd->add_option("--format", o.format, "table or records")
        ->check(CLI::IsMember({"table", "records"}));
}

std::ostream& open_out(const CommonOpts& o, std::ofstream& file) {
    if (o.out_path.empty()) return std::cout;
    file.open(o.out_path);
    if (!file) throw rdb::IoError("cannot open output file: " + o.out_path);
    return file;
}

rdb::Dataset load_dataset(const CommonOpts& o, bool needs_outcome) {
    rdb::CsvTable table = rdb::read_csv(o.data_path);
    rdb::Dataset data;
    data.X.resize(table.values.rows(),
                  static_cast<Eigen::Index>(o.x_cols.size()));
    for (std::size_t j = 0; j < o.x_cols.size(); ++j) {
        int c = table.column_index(o.x_cols[j]);
        if (c < 0) throw rdb::IoError("missing column: " + o.x_cols[j]);
        data.X.col(static_cast<Eigen::Index>(j)) = table.values.col(c);
    }
    if (needs_outcome) {
        int c = table.column_index(o.outcome_col);
        if (c < 0) throw rdb::IoError("missing column: " + o.outcome_col);
        data.Y = table.values.col(c);
    }
    if (o.standardize) {
        for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
            double mean = data.X.col(j).mean();
            double sd = std::sqrt((data.X.col(j).array() - mean).square().sum() /
                                  std::max<Eigen::Index>(1, data.X.rows() - 1));
            if (sd > 0) data.X.col(j) /= sd;
        }
    }
    return data;
}

json result_record(const rdb::TestResult& r) {
    json j;
    j["estimate"] = r.estimate;
    j["bias"] = r.bias;
    j["statistic"] = r.statistic;
    j["se"] = r.se;
    j["z"] = r.z;
    j["p_value"] = r.p_value;
    j["two_sided"] = r.two_sided;
    j["per_split"] = r.per_split;
    return j;
}

json fold_record(const rdb::FoldDiagnostics& d) {
    json j;
    j["split"] = d.split;
    j["fold"] = d.fold;
    j["h_plus"] = d.h_plus;
    j["h_minus"] = d.h_minus;
    j["n_effective_plus"] = d.n_effective_plus;
    j["n_effective_minus"] = d.n_effective_minus;
    j["sign_ones"] = d.sign_ones;
    j["fold_size"] = d.fold_size;
    j["tau_p1"] = d.tau_p1;
    j["tau_q2"] = d.tau_q2;
    j["fhat_g0"] = d.fhat_g0;
    j["h_clamped"] = d.h_clamped;
    return j;
}

void emit_test_result(const rdb::TestResult& r, const CommonOpts& o,
                      const std::string& kind) {
    std::ofstream file;
    std::ostream& out = open_out(o, file);
    if (o.format == "records") {
        json head = result_record(r);
        head["record"] = "result";
        head["test"] = kind;
        out << head.dump() << "\n";
        for (const rdb::FoldDiagnostics& d : r.per_fold) {
            json j = fold_record(d);
            j["record"] = "fold";
            out << j.dump() << "\n";
        }
        return;
    }
    out << kind << " test\n"
        << "  estimate       " << r.estimate << "\n"
        << "  bias           " << r.bias << "\n"
        << "  statistic      " << r.statistic << "\n"
        << "  se             " << r.se << "\n"
        << "  z              " << r.z << "\n"
        << "  p-value        " << r.p_value
        << (r.two_sided ? "  (two-sided)\n" : "  (one-sided)\n");
    for (const rdb::FoldDiagnostics& d : r.per_fold)
        out << "  split " << d.split << " fold " << d.fold << ": h+ = "
            << d.h_plus << ", h- = " << d.h_minus << ", n = " << d.fold_size
            << ", signs(1) = " << d.sign_ones << ", tau_p1 = " << d.tau_p1
            << ", tau_q2 = " << d.tau_q2 << "\n";
}

int run_test(const CommonOpts& o, bool density) {
    rdb::Dataset data = load_dataset(o, !density);
    rdb::BoundaryGeometry b = rdb::read_boundary_file(o.boundary_path);
    std::vector<rdb::SignedProjection> proj = rdb::project_dataset(data.X, b);
    rdb::CrossfitPlan plan =
        rdb::make_plan(data.n(), o.folds, o.splits, o.seed, proj);
    rdb::TestParams params;
    params.bootstrap_B = o.bootstrap;
    rdb::TestResult r = density
                            ? rdb::density_test(data, b, plan, params)
                            : rdb::heterogeneity_test(data, b, plan, params);
    emit_test_result(r, o, density ? "density" : "heterogeneity");
    return 0;
}

int run_project(const CommonOpts& o) {
    rdb::Dataset data = load_dataset(o, false);
    rdb::BoundaryGeometry b = rdb::read_boundary_file(o.boundary_path);
    std::vector<rdb::SignedProjection> proj = rdb::project_dataset(data.X, b);
    std::ofstream file;
    std::ostream& out = open_out(o, file);
    out << "g";
    for (std::size_t j = 0; j < o.x_cols.size(); ++j) out << ",gamma" << j + 1;
    out << ",delta\n";
    out.precision(17);
    for (const rdb::SignedProjection& p : proj) {
        out << p.g;
        for (Eigen::Index j = 0; j < p.gamma.size(); ++j) out << "," << p.gamma(j);
        out << "," << p.delta << "\n";
    }
    return 0;
}

struct SimOpts {
    std::string dgp = "het_dgp2", test = "het";
    long n = 1000;
    int reps = 500;
    CommonOpts common;
};

int run_simulate(const SimOpts& s) {
    rdb::McConfig cfg;
    cfg.dgp.name = rdb::parse_dgp_name(s.dgp);
    cfg.dgp.n = s.n;
    cfg.test = s.test == "density"
                   ? rdb::McTest::Density
                   : (s.test == "dist" ? rdb::McTest::DistanceRd
                                       : rdb::McTest::Heterogeneity);
    cfg.K = s.common.folds;
    cfg.S = s.common.splits;
    cfg.replications = s.reps;
    cfg.seed = s.common.seed;
    cfg.params.bootstrap_B = s.common.bootstrap;
    if (cfg.dgp.name == rdb::DgpName::HetDgp1) cfg.true_value = 1.0 / 6.0;
    if (cfg.dgp.name == rdb::DgpName::DensDgp1) cfg.true_value = 1.0 / 3.0;
    rdb::McReport rep = rdb::run_monte_carlo(cfg);

    std::ofstream file;
    std::ostream& out = open_out(s.common, file);
    if (s.common.format == "records") {
        json j;
        j["record"] = "mc_report";
        j["dgp"] = s.dgp;
        j["test"] = s.test;
        j["n"] = s.n;
        j["replications"] = rep.replications;
        j["failures"] = rep.failures;
        j["mean_bias"] = rep.mean_bias;
        j["mean_se"] = rep.mean_se;
        j["rejection_rate"] = rep.rejection_rate;
        j["rejection_mc_se"] = rep.rejection_mc_se;
        j["mean_estimate"] = rep.mean_estimate;
        j["sd_estimate"] = rep.sd_estimate;
        out << j.dump() << "\n";
    } else {
        out << "Monte Carlo: dgp=" << s.dgp << " test=" << s.test
            << " n=" << s.n << " K=" << s.common.folds << " S="
            << s.common.splits << " R=" << rep.replications << "\n"
            << "  bias            " << rep.mean_bias << "\n"
            << "  mean SE         " << rep.mean_se << "\n"
            << "  rejection rate  " << rep.rejection_rate << " +/- "
            << rep.rejection_mc_se << "\n"
            << "  MC SD           " << rep.sd_estimate << "\n"
            << "  failures        " << rep.failures << "\n"
            << "  wall seconds    " << rep.wall_seconds << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global discontinuity tests along multivariate RD boundaries"};
    app.require_subcommand(1);

    CommonOpts het_opts, dens_opts, proj_opts;
    SimOpts sim_opts;

    CLI::App* het = app.add_subcommand(
        "test-het", "conditional-mean discontinuity (heterogeneity) test");
    add_common(het, het_opts, true);
    CLI::App* dens = app.add_subcommand(
        "test-density", "running-variable density manipulation test");
    add_common(dens, dens_opts, false);
    CLI::App* proj = app.add_subcommand(
        "project", "emit signed distances and boundary projections");
    add_common(proj, proj_opts, false);
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo harness");
    sim->add_option("--dgp", sim_opts.dgp,
                    "intro_quadrant | het_dgp1 | het_dgp2 | dens_dgp1 | dens_dgp2");
    sim->add_option("--test", sim_opts.test, "het | density | dist");
    sim->add_option("--n", sim_opts.n, "sample size per replication");
    sim->add_option("--reps", sim_opts.reps, "replications");
    sim->add_option("--folds", sim_opts.common.folds, "folds K");
    sim->add_option("--splits", sim_opts.common.splits, "splits S");
    sim->add_option("--bootstrap", sim_opts.common.bootstrap, "bootstrap B");
    sim->add_option("--seed", sim_opts.common.seed, "master seed");
    sim->add_option("--out", sim_opts.common.out_path, "output file");
    sim->add_option("--format", sim_opts.common.format, "table or records")
        ->check(CLI::IsMember({"table", "records"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (het->parsed()) return run_test(het_opts, false);
        if (dens->parsed()) return run_test(dens_opts, true);
        if (proj->parsed()) return run_project(proj_opts);
        if (sim->parsed()) return run_simulate(sim_opts);
    } catch (const rdb::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rdb::PlanError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rdb::GeometryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
