#include "rdb/forest_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rdb {

int Tree::leaf_of(const Eigen::VectorXd& x) const {
    int node = 0;
    while (nodes[node].split_dim >= 0) {
        const TreeNode& nd = nodes[node];
        node = x(nd.split_dim) <= nd.split_value ? nd.left : nd.right;
    }
    return node;
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& Y;
    const ForestParams& params;
    int try_count;
    std::mt19937_64& rng;
    Tree tree;

    // CART variance-reduction split among try_count random coordinates.
    // Returns false if no admissible split improves on the parent node.
    bool find_split(const std::vector<int>& idx, int& dim, double& value) {
        const int n = static_cast<int>(idx.size());
        double sum = 0.0;
        for (int i : idx) sum += Y(i);
        double parent = sum * sum / n;
        double best_gain = 1e-10 * (1.0 + std::abs(parent));
        bool found = false;

        std::vector<int> dims(static_cast<std::size_t>(X.cols()));
        std::iota(dims.begin(), dims.end(), 0);
        std::shuffle(dims.begin(), dims.end(), rng);
        int tries = std::min<int>(try_count, static_cast<int>(dims.size()));

        std::vector<std::pair<double, double>> vals(idx.size());
        for (int t = 0; t < tries; ++t) {
            int d = dims[static_cast<std::size_t>(t)];
            for (std::size_t i = 0; i < idx.size(); ++i)
                vals[i] = {X(idx[i], d), Y(idx[i])};
            std::sort(vals.begin(), vals.end());
            double left_sum = 0.0;
            for (int i = 0; i + 1 < n; ++i) {
                left_sum += vals[static_cast<std::size_t>(i)].second;
                int nl = i + 1, nr = n - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                double a = vals[static_cast<std::size_t>(i)].first;
                double b = vals[static_cast<std::size_t>(i + 1)].first;
                if (a == b) continue;
                double right_sum = sum - left_sum;
                double gain = left_sum * left_sum / nl +
                              right_sum * right_sum / nr - parent;
                if (gain > best_gain) {
                    best_gain = gain;
                    dim = d;
                    value = 0.5 * (a + b);
                    found = true;
                }
            }
        }
        return found;
    }

    int build(std::vector<int> idx) {
        int self = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        int dim = -1;
        double value = 0.0;
        if (static_cast<int>(idx.size()) >= 2 * params.min_leaf &&
            find_split(idx, dim, value)) {
            std::vector<int> left, right;
            for (int i : idx)
                (X(i, dim) <= value ? left : right).push_back(i);
            tree.nodes[static_cast<std::size_t>(self)].split_dim = dim;
            tree.nodes[static_cast<std::size_t>(self)].split_value = value;
            int l = build(std::move(left));
            int r = build(std::move(right));
            tree.nodes[static_cast<std::size_t>(self)].left = l;
            tree.nodes[static_cast<std::size_t>(self)].right = r;
        }
        return self;
    }
};

}  // namespace

HonestForest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                        const ForestParams& params) {
    const int n = static_cast<int>(X.rows());
    if (n < 2 * params.min_leaf)
        throw ForestError("fit_forest: need at least 2*min_leaf observations");
    HonestForest f;
    f.X = X;
    f.Y = Y;
    f.params = params;
    int try_count = params.split_try_count > 0
                        ? params.split_try_count
                        : static_cast<int>(std::ceil(std::sqrt(
                              static_cast<double>(X.cols()))));
    int sub = std::max(2, static_cast<int>(std::lround(
                              params.subsample_fraction * n)));
    f.trees.reserve(static_cast<std::size_t>(params.num_trees));
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    for (int t = 0; t < params.num_trees; ++t) {
        auto rng = substream(params.seed, {0xf02e57u, static_cast<std::uint64_t>(t)});
        std::vector<int> perm = all;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> build_idx(perm.begin(), perm.begin() + sub / 2);
        std::vector<int> honest_idx(perm.begin() + sub / 2, perm.begin() + sub);
        TreeBuilder tb{X, Y, params, try_count, rng, {}};
        tb.build(std::move(build_idx));
        // Honest half: leaf membership only, never seen by the splitter.
        for (int i : honest_idx) {
            int leaf = tb.tree.leaf_of(X.row(i).transpose());
            tb.tree.nodes[static_cast<std::size_t>(leaf)].honest_idx.push_back(i);
        }
        f.trees.push_back(std::move(tb.tree));
    }
    return f;
}

Eigen::VectorXd forest_weights(const HonestForest& f, const Eigen::VectorXd& x0,
                               const std::vector<int>& scope) {
    if (scope.empty()) throw ForestError("forest_weights: empty scope");
    const Eigen::Index n = f.X.rows();
    std::vector<char> in_scope(static_cast<std::size_t>(n), 0);
    for (int i : scope) in_scope[static_cast<std::size_t>(i)] = 1;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    int contributing = 0;
    std::vector<int> members;
    for (const Tree& tree : f.trees) {
        int leaf = tree.leaf_of(x0);
        members.clear();
        for (int i : tree.nodes[static_cast<std::size_t>(leaf)].honest_idx)
            if (in_scope[static_cast<std::size_t>(i)]) members.push_back(i);
        if (members.empty()) continue;
        ++contributing;
        double u = 1.0 / static_cast<double>(members.size());
        for (int i : members) w(i) += u;
    }
    if (contributing == 0)
        throw ForestError("forest_weights: empty neighborhood at query point");
    w /= w.sum();
    return w;
}

LlfPrediction llf_predict(const HonestForest& f, const Eigen::VectorXd& x0,
                          double lambda) {
    std::vector<int> scope(static_cast<std::size_t>(f.X.rows()));
    std::iota(scope.begin(), scope.end(), 0);
    Eigen::VectorXd w = forest_weights(f, x0, scope);

    if (lambda < 0.0) {
        double mean = w.dot(f.Y);
        double var = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            var += w(i) * (f.Y(i) - mean) * (f.Y(i) - mean);
        lambda = f.params.ridge_fraction * var;
    }

    const Eigen::Index d = f.X.cols();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d + 1, d + 1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd z(d + 1);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) == 0.0) continue;
        z(0) = 1.0;
        z.tail(d) = f.X.row(i).transpose() - x0;
        M.noalias() += w(i) * z * z.transpose();
        v.noalias() += w(i) * f.Y(i) * z;
    }
    // Ridge penalty on slopes only; the intercept stays unpenalized.
    for (Eigen::Index j = 1; j <= d; ++j) M(j, j) += lambda;

    Eigen::LDLT<Eigen::MatrixXd> solver(M);
    Eigen::VectorXd beta = solver.solve(v);
    if (!beta.allFinite() || (M * beta - v).norm() > 1e-6 * (1.0 + v.norm()))
        throw ForestError("llf_predict: singular local system");
    LlfPrediction out;
    out.value = beta(0);
    out.effective_weight_count = 1.0 / w.squaredNorm();
    return out;
}

std::vector<int> estimate_gamma(const Dataset& train,
                                const std::vector<Eigen::VectorXd>& query_points,
                                const ForestParams& params) {
    if (train.treated.size() != static_cast<std::size_t>(train.n()))
        throw ForestError("estimate_gamma: treatment labels missing");
    std::vector<int> t_rows, c_rows;
    for (Eigen::Index i = 0; i < train.n(); ++i)
        (train.treated[static_cast<std::size_t>(i)] ? t_rows : c_rows)
            .push_back(static_cast<int>(i));
    if (static_cast<int>(t_rows.size()) < 2 * params.min_leaf ||
        static_cast<int>(c_rows.size()) < 2 * params.min_leaf)
        throw ForestError("estimate_gamma: a side has too few observations");

    auto subset = [&](const std::vector<int>& rows) {
        Eigen::MatrixXd X(rows.size(), train.d());
        Eigen::VectorXd Y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X.row(static_cast<Eigen::Index>(i)) = train.X.row(rows[i]);
            Y(static_cast<Eigen::Index>(i)) = train.Y(rows[i]);
        }
        return std::make_pair(X, Y);
    };
    auto [Xt, Yt] = subset(t_rows);
    auto [Xc, Yc] = subset(c_rows);
    ForestParams pt = params, pc = params;
    pt.seed = substream(params.seed, {0x7242edu, 1})();
    pc.seed = substream(params.seed, {0x7242edu, 0})();
    HonestForest ft = fit_forest(Xt, Yt, pt);
    HonestForest fc = fit_forest(Xc, Yc, pc);

    std::vector<int> gamma;
    gamma.reserve(query_points.size());
    for (const Eigen::VectorXd& q : query_points) {
        double diff = llf_predict(ft, q).value - llf_predict(fc, q).value;
        gamma.push_back(diff >= 0.0 ? 1 : 0);
    }
    return gamma;
}

}  // namespace rdb
