#pragma once

// Treatment boundary representation and signed-distance projection.
//
// The boundary is a set of (d-1)-simplices in R^d (segments when d = 2).
// The sign of the distance comes from a user-supplied membership rule for
// the treated region, which must contain the boundary itself (closed set).

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rdb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Convex region given by halfspaces: x is inside iff normal'x >= offset
// for every row.
struct HalfspaceRule {
    Matrix normals;       // m x d
    Vector offsets;       // m
    bool contains(const Vector& x) const;
};

// Simple polygon membership for d = 2, even-odd rule, boundary counted
// inside.
struct PolygonRule {
    Matrix vertices;      // m x 2, in order
    bool contains(const Vector& x) const;
};

struct BoundaryGeometry {
    // simplices[s] is a d x d matrix, one vertex per row.
    std::vector<Matrix> simplices;
    std::function<bool(const Vector&)> membership;
    int dimension = 0;

    void validate() const;
};

struct SignedProjection {
    double g = 0.0;       // signed distance, + on the treated side
    Vector gamma;         // nearest boundary point
    int delta = 1;        // 1(g >= 0)
};

// Exact Euclidean projection of x onto a single simplex (vertices as rows).
Vector project_to_simplex(const Vector& x, const Matrix& simplex);

SignedProjection project_point(const Vector& x, const BoundaryGeometry& b);

double signed_distance(const Vector& x, const BoundaryGeometry& b);

Vector nearest_boundary_point(const Vector& x, const BoundaryGeometry& b);

std::vector<SignedProjection> project_dataset(const Matrix& X,
                                              const BoundaryGeometry& b);

// The quadrant rule of the simulation DGPs: treated iff x1 >= 0 and
// x2 >= 0, boundary segments {x2 = 0, x1 in [0,1]} and {x1 = 0, x2 in [0,1]}.
BoundaryGeometry quadrant_boundary();

}  // namespace rdb
