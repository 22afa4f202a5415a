#include "rdb/forest_density.hpp"

#include <algorithm>
#include <cmath>

namespace rdb {

int PartitionTree::cell_of(const Eigen::VectorXd& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].split_dim >= 0) {
        const PartitionNode& nd = nodes[static_cast<std::size_t>(node)];
        node = x(nd.split_dim) <= nd.split_value ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].cell;
}

int depth_rule(long N, int d) {
    if (N < 2) throw DensityError("depth_rule: N must be >= 2");
    double p = d * std::log(static_cast<double>(N)) / (1.0 + d * std::log(2.0));
    return std::max(1, static_cast<int>(std::floor(p)));
}

Box enclosing_box(const Eigen::MatrixXd& X) {
    Box b;
    b.lo = X.colwise().minCoeff().transpose();
    b.hi = X.colwise().maxCoeff().transpose();
    Eigen::VectorXd pad = 0.01 * (b.hi - b.lo).cwiseMax(1e-12);
    b.lo -= pad;
    b.hi += pad;
    return b;
}

namespace {

struct SimplexBounds {
    Eigen::VectorXd lo, hi;
};

bool bbox_overlaps(const SimplexBounds& s, const Box& cell) {
    for (Eigen::Index j = 0; j < cell.lo.size(); ++j)
        if (s.hi(j) < cell.lo(j) || s.lo(j) > cell.hi(j)) return false;
    return true;
}

struct TreeBuilder {
    int depth;
    std::mt19937_64& rng;
    PartitionTree tree;

    int build(const Box& box, int level) {
        int self = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (level == depth) {
            tree.nodes[static_cast<std::size_t>(self)].cell =
                static_cast<int>(tree.cells.size());
            PartitionCell cell;
            cell.box = box;
            tree.cells.push_back(std::move(cell));
            return self;
        }
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(box.lo.size()) - 1);
        int d = pick(rng);
        double mid = 0.5 * (box.lo(d) + box.hi(d));
        Box lbox = box, rbox = box;
        lbox.hi(d) = mid;
        rbox.lo(d) = mid;
        tree.nodes[static_cast<std::size_t>(self)].split_dim = d;
        tree.nodes[static_cast<std::size_t>(self)].split_value = mid;
        int l = build(lbox, level + 1);
        int r = build(rbox, level + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = l;
        tree.nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

}  // namespace

PartitionForest build_partition_forest(const Eigen::MatrixXd& X_side,
                                       const BoundaryGeometry& b, int side,
                                       const Box& box, long n_total, int depth,
                                       const DensityForestParams& params) {
    if (params.num_trees <= 0) throw DensityError("num_trees must be > 0");
    if (depth <= 0) throw DensityError("depth must be > 0");
    if (params.mc_samples <= 0) throw DensityError("mc_samples must be > 0");
    const long m = X_side.rows();
    if (m < 1) throw DensityError("side has no observations");

    std::vector<SimplexBounds> bounds;
    bounds.reserve(b.simplices.size());
    for (const Eigen::MatrixXd& S : b.simplices)
        bounds.push_back({S.colwise().minCoeff().transpose(),
                          S.colwise().maxCoeff().transpose()});

    const bool want = side != 0;
    PartitionForest f;
    f.enclosing = box;
    f.n_side = m;
    f.n_total = n_total;
    f.trees.reserve(static_cast<std::size_t>(params.num_trees));
    const Eigen::Index d = X_side.cols();
    // Expected leaf width per coordinate; used to jitter each tree's box so
    // cell walls do not coincide across trees (a shared dyadic grid would
    // leave every tree with the same degenerate sliver cells along the
    // boundary).
    Eigen::VectorXd leaf_w =
        (box.hi - box.lo) * std::pow(2.0, -static_cast<double>(depth) / d);
    for (int t = 0; t < params.num_trees; ++t) {
        auto rng = substream(params.seed, {0xde5174u, static_cast<std::uint64_t>(t)});
        Box tbox = box;
        std::uniform_real_distribution<double> ju(0.0, 1.0);
        for (Eigen::Index j = 0; j < d; ++j) {
            tbox.lo(j) -= ju(rng) * leaf_w(j);
            tbox.hi(j) += ju(rng) * leaf_w(j);
        }
        TreeBuilder tb{depth, rng, {}};
        tb.build(tbox, 0);
        PartitionTree& tree = tb.tree;
        for (long i = 0; i < m; ++i) {
            int c = tree.cell_of(X_side.row(i).transpose());
            tree.cells[static_cast<std::size_t>(c)].mass += 1.0 / m;
        }
        for (std::size_t c = 0; c < tree.cells.size(); ++c) {
            PartitionCell& cell = tree.cells[c];
            bool straddles = false;
            for (const SimplexBounds& sb : bounds)
                if (bbox_overlaps(sb, cell.box)) { straddles = true; break; }
            if (!straddles) {
                // Membership is constant on cells the boundary cannot touch.
                Eigen::VectorXd center = 0.5 * (cell.box.lo + cell.box.hi);
                cell.eff_volume =
                    b.membership(center) == want ? cell.box.volume() : 0.0;
                continue;
            }
            auto crng = substream(params.seed,
                                  {0xce11u, static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(c)});
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            long inside = 0;
            Eigen::VectorXd x(d);
            for (int s = 0; s < params.mc_samples; ++s) {
                for (Eigen::Index j = 0; j < d; ++j)
                    x(j) = cell.box.lo(j) +
                           unif(crng) * (cell.box.hi(j) - cell.box.lo(j));
                if (b.membership(x) == want) ++inside;
            }
            cell.eff_volume = cell.box.volume() *
                              static_cast<double>(inside) / params.mc_samples;
        }
        f.trees.push_back(std::move(tree));
    }
    return f;
}

double rf_density(const PartitionForest& f, const Eigen::VectorXd& x0) {
    // Queries are boundary projections of held-out points and can land just
    // outside the training sample's padded bounding box; clamp them in.
    Eigen::VectorXd q = x0.cwiseMax(f.enclosing.lo).cwiseMin(f.enclosing.hi);
    double acc = 0.0;
    long used = 0;
    for (const PartitionTree& tree : f.trees) {
        const PartitionCell& cell =
            tree.cells[static_cast<std::size_t>(tree.cell_of(q))];
        // Cells whose effective volume vanishes carry no information about
        // the density on this side; leave them out of the average.
        if (cell.eff_volume <= 0.0) continue;
        acc += cell.mass / cell.eff_volume;
        ++used;
    }
    if (used == 0) return 0.0;
    return acc / static_cast<double>(used) * static_cast<double>(f.n_side) /
           static_cast<double>(f.n_total);
}

std::vector<int> estimate_lambda(const Dataset& train, const BoundaryGeometry& b,
                                 const std::vector<Eigen::VectorXd>& query_points,
                                 const DensityForestParams& params) {
    if (train.treated.size() != static_cast<std::size_t>(train.n()))
        throw DensityError("estimate_lambda: side labels missing");
    std::vector<int> t_rows, c_rows;
    for (Eigen::Index i = 0; i < train.n(); ++i)
        (train.treated[static_cast<std::size_t>(i)] ? t_rows : c_rows)
            .push_back(static_cast<int>(i));
    if (t_rows.empty() || c_rows.empty())
        throw DensityError("estimate_lambda: a side is empty");

    auto subset = [&](const std::vector<int>& rows) {
        Eigen::MatrixXd X(rows.size(), train.d());
        for (std::size_t i = 0; i < rows.size(); ++i)
            X.row(static_cast<Eigen::Index>(i)) = train.X.row(rows[i]);
        return X;
    };
    Eigen::MatrixXd Xt = subset(t_rows), Xc = subset(c_rows);
    Box box = enclosing_box(train.X);
    int depth = params.depth > 0 ? params.depth
                                 : depth_rule(train.n(), static_cast<int>(train.d()));
    DensityForestParams pt = params, pc = params;
    pt.seed = substream(params.seed, {0x1a3bdau, 1})();
    pc.seed = substream(params.seed, {0x1a3bdau, 0})();
    PartitionForest ft =
        build_partition_forest(Xt, b, 1, box, train.n(), depth, pt);
    PartitionForest fc =
        build_partition_forest(Xc, b, 0, box, train.n(), depth, pc);

    std::vector<int> lambda;
    lambda.reserve(query_points.size());
    for (const Eigen::VectorXd& q : query_points) {
        double diff = rf_density(ft, q) - rf_density(fc, q);
        lambda.push_back(diff >= 0.0 ? 1 : 0);
    }
    return lambda;
}

}  // namespace rdb
