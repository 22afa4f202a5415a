#include "rdb/geometry.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace rdb {

bool HalfspaceRule::contains(const Vector& x) const {
    for (Eigen::Index i = 0; i < normals.rows(); ++i) {
        if (normals.row(i).dot(x) < offsets(i)) return false;
    }
    return true;
}

bool PolygonRule::contains(const Vector& x) const {
    const Eigen::Index m = vertices.rows();
    // Boundary counted inside: check segment membership first.
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Vector2d a = vertices.row(i);
        Eigen::Vector2d b = vertices.row((i + 1) % m);
        Eigen::Vector2d p(x(0), x(1));
        Eigen::Vector2d ab = b - a, ap = p - a;
        double cross = ab.x() * ap.y() - ab.y() * ap.x();
        if (std::abs(cross) < 1e-12 * (1.0 + ab.norm())) {
            double t = ab.squaredNorm() > 0 ? ap.dot(ab) / ab.squaredNorm() : 0.0;
            if (t >= -1e-12 && t <= 1.0 + 1e-12 &&
                (a + t * ab - p).norm() < 1e-9)
                return true;
        }
    }
    // Even-odd ray cast along +x.
    bool inside = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Vector2d a = vertices.row(i);
        Eigen::Vector2d b = vertices.row((i + 1) % m);
        if ((a.y() > x(1)) != (b.y() > x(1))) {
            double t = (x(1) - a.y()) / (b.y() - a.y());
            double xc = a.x() + t * (b.x() - a.x());
            if (xc > x(0)) inside = !inside;
        }
    }
    return inside;
}

void BoundaryGeometry::validate() const {
    if (simplices.empty()) throw GeometryError("boundary is empty");
    if (dimension < 2) throw GeometryError("dimension must be >= 2");
    if (!membership) throw GeometryError("membership rule not set");
    for (std::size_t s = 0; s < simplices.size(); ++s) {
        const Matrix& S = simplices[s];
        if (S.rows() != dimension || S.cols() != dimension)
            throw GeometryError("simplex " + std::to_string(s) +
                                " has wrong shape");
        // Affine independence: edge vectors from vertex 0 must have full rank.
        Matrix E(dimension - 1, dimension);
        for (int i = 1; i < dimension; ++i)
            E.row(i - 1) = S.row(i) - S.row(0);
        Eigen::FullPivLU<Matrix> lu(E);
        if (lu.rank() < dimension - 1)
            throw GeometryError("simplex " + std::to_string(s) +
                                " is degenerate");
        for (int i = 0; i < dimension; ++i) {
            if (!membership(S.row(i).transpose()))
                throw GeometryError(
                    "membership is false at a boundary vertex (region must "
                    "be closed)");
        }
    }
}

namespace {

// Projection onto the convex hull of the given vertex rows, by recursion on
// faces: project onto the affine hull; if all barycentric coordinates are
// nonnegative we are done, otherwise drop each vertex with a negative
// coordinate and take the closest facet projection.
Vector project_to_hull(const Vector& x, const Matrix& verts) {
    const Eigen::Index k = verts.rows();
    if (k == 1) return verts.row(0).transpose();

    Matrix E(k - 1, verts.cols());
    for (Eigen::Index i = 1; i < k; ++i)
        E.row(i - 1) = verts.row(i) - verts.row(0);
    Vector d = x - verts.row(0).transpose();
    // Coefficients t of the affine-hull projection: E E' t = E d.
    Eigen::MatrixXd G = E * E.transpose();
    Vector t = G.ldlt().solve(E * d);

    double tsum = t.sum();
    bool interior = tsum <= 1.0 + 1e-12;
    for (Eigen::Index i = 0; i < t.size(); ++i)
        if (t(i) < -1e-12) interior = false;
    if (interior) return verts.row(0).transpose() + E.transpose() * t;

    double best = std::numeric_limits<double>::infinity();
    Vector best_p;
    for (Eigen::Index drop = 0; drop < k; ++drop) {
        Matrix face(k - 1, verts.cols());
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < k; ++i)
            if (i != drop) face.row(r++) = verts.row(i);
        Vector p = project_to_hull(x, face);
        double dist = (x - p).norm();
        if (dist < best) {
            best = dist;
            best_p = p;
        }
    }
    return best_p;
}

}  // namespace

Vector project_to_simplex(const Vector& x, const Matrix& simplex) {
    return project_to_hull(x, simplex);
}

SignedProjection project_point(const Vector& x, const BoundaryGeometry& b) {
    if (b.simplices.empty()) throw GeometryError("boundary is empty");
    if (!x.allFinite()) throw GeometryError("point has non-finite entries");
    double best = std::numeric_limits<double>::infinity();
    Vector best_p;
    // Ties broken by lowest simplex index: strict improvement only.
    for (const Matrix& S : b.simplices) {
        Vector p = project_to_simplex(x, S);
        double dist = (x - p).norm();
        if (dist < best) {
            best = dist;
            best_p = p;
        }
    }
    SignedProjection out;
    out.gamma = best_p;
    bool treated = b.membership(x);
    out.g = treated ? best : -best;
    out.delta = out.g >= 0.0 ? 1 : 0;
    return out;
}

double signed_distance(const Vector& x, const BoundaryGeometry& b) {
    return project_point(x, b).g;
}

Vector nearest_boundary_point(const Vector& x, const BoundaryGeometry& b) {
    return project_point(x, b).gamma;
}

std::vector<SignedProjection> project_dataset(const Matrix& X,
                                              const BoundaryGeometry& b) {
    std::vector<SignedProjection> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out.push_back(project_point(X.row(i).transpose(), b));
    return out;
}

BoundaryGeometry quadrant_boundary() {
    BoundaryGeometry b;
    b.dimension = 2;
    Matrix s1(2, 2), s2(2, 2);
    s1 << 0, 0, 1, 0;  // {x2 = 0, x1 in [0,1]}
    s2 << 0, 0, 0, 1;  // {x1 = 0, x2 in [0,1]}
    b.simplices = {s1, s2};
    auto rule = std::make_shared<HalfspaceRule>();
    rule->normals = Matrix::Identity(2, 2);
    rule->offsets = Vector::Zero(2);
    b.membership = [rule](const Vector& x) { return rule->contains(x); };
    return b;
}

}  // namespace rdb
