#include "rdb/io.hpp"

#include <fstream>
#include <memory>
#include <sstream>

namespace rdb {

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty data file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    CsvTable table;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
    }
    const std::size_t ncol = table.columns.size();
    if (ncol == 0) throw IoError("no columns in data file: " + path);

    std::vector<double> buf;
    long rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                buf.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("non-numeric cell '" + cell + "' at data row " +
                              std::to_string(rows + 1));
            }
            ++c;
        }
        if (c != ncol)
            throw IoError("row " + std::to_string(rows + 1) + " has " +
                          std::to_string(c) + " cells, expected " +
                          std::to_string(ncol));
        ++rows;
    }
    table.values.resize(rows, static_cast<Eigen::Index>(ncol));
    for (long r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ncol; ++c)
            table.values(r, static_cast<Eigen::Index>(c)) =
                buf[static_cast<std::size_t>(r) * ncol + c];
    return table;
}

BoundaryGeometry read_boundary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open boundary file: " + path);

    BoundaryGeometry b;
    std::string membership_kind;
    std::vector<std::vector<double>> halfspaces;
    std::vector<std::vector<double>> poly_vertices;
    std::vector<std::vector<double>> raw_simplices;

    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        auto read_nums = [&](std::vector<double>& out) {
            double v;
            while (ss >> v) out.push_back(v);
        };
        if (key == "dim") {
            if (!(ss >> b.dimension))
                throw IoError("boundary file line " + std::to_string(lineno) +
                              ": bad dim");
        } else if (key == "simplex") {
            raw_simplices.emplace_back();
            read_nums(raw_simplices.back());
        } else if (key == "membership") {
            ss >> membership_kind;
        } else if (key == "halfspace") {
            halfspaces.emplace_back();
            read_nums(halfspaces.back());
        } else if (key == "vertex") {
            poly_vertices.emplace_back();
            read_nums(poly_vertices.back());
        } else {
            throw IoError("boundary file line " + std::to_string(lineno) +
                          ": unknown keyword '" + key + "'");
        }
    }
    if (b.dimension < 2) throw IoError("boundary file: missing or bad 'dim'");
    const int d = b.dimension;
    for (const auto& row : raw_simplices) {
        if (static_cast<int>(row.size()) != d * d)
            throw IoError("boundary file: simplex needs d*d coordinates");
        Eigen::MatrixXd S(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                S(i, j) = row[static_cast<std::size_t>(i * d + j)];
        b.simplices.push_back(S);
    }

    if (membership_kind == "halfspace") {
        if (halfspaces.empty())
            throw IoError("boundary file: halfspace membership needs rows");
        auto rule = std::make_shared<HalfspaceRule>();
        rule->normals.resize(static_cast<Eigen::Index>(halfspaces.size()), d);
        rule->offsets.resize(static_cast<Eigen::Index>(halfspaces.size()));
        for (std::size_t i = 0; i < halfspaces.size(); ++i) {
            if (static_cast<int>(halfspaces[i].size()) != d + 1)
                throw IoError("boundary file: halfspace row needs d+1 values");
            for (int j = 0; j < d; ++j)
                rule->normals(static_cast<Eigen::Index>(i), j) =
                    halfspaces[i][static_cast<std::size_t>(j)];
            rule->offsets(static_cast<Eigen::Index>(i)) =
                halfspaces[i][static_cast<std::size_t>(d)];
        }
        b.membership = [rule](const Eigen::VectorXd& x) {
            return rule->contains(x);
        };
    } else if (membership_kind == "polygon") {
        if (d != 2) throw IoError("boundary file: polygon membership needs dim 2");
        if (poly_vertices.size() < 3)
            throw IoError("boundary file: polygon needs >= 3 vertices");
        auto rule = std::make_shared<PolygonRule>();
        rule->vertices.resize(static_cast<Eigen::Index>(poly_vertices.size()), 2);
        for (std::size_t i = 0; i < poly_vertices.size(); ++i) {
            if (poly_vertices[i].size() != 2)
                throw IoError("boundary file: polygon vertex needs 2 values");
            rule->vertices(static_cast<Eigen::Index>(i), 0) = poly_vertices[i][0];
            rule->vertices(static_cast<Eigen::Index>(i), 1) = poly_vertices[i][1];
        }
        b.membership = [rule](const Eigen::VectorXd& x) {
            return rule->contains(x);
        };
    } else {
        throw IoError("boundary file: membership must be 'halfspace' or 'polygon'");
    }

    b.validate();
    return b;
}

}  // namespace rdb
