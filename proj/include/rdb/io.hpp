#pragma once

// File ingestion: headered CSV data tables and boundary geometry files.
//
// Boundary file format (text, '#' comments):
//   dim 2
//   simplex x11 x12 x21 x22        # d*d coordinates, one simplex per line
//   membership halfspace           # or: membership polygon
//   halfspace n1 n2 offset         # treated iff n'x >= offset for all rows
//   vertex x1 x2                   # polygon vertices in order (d = 2 only)

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdb/geometry.hpp"

namespace rdb {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;

    int column_index(const std::string& name) const; // -1 if missing
};

CsvTable read_csv(const std::string& path);

BoundaryGeometry read_boundary_file(const std::string& path);

}  // namespace rdb
