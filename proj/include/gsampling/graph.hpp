#pragma once

#include "gsampling/random.hpp"
#include "gsampling/types.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

namespace gsampling {

/// Undirected weighted graph stored as a dense symmetric adjacency matrix.
///
/// Invariants (checked on construction): n >= 1, square, symmetric within
/// 1e-12, exactly zero diagonal, non-negative weights.
class Graph {
public:
    explicit Graph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
        if (adjacency_.rows() < 1) {
            throw std::invalid_argument("Graph: need at least one node");
        }
        if (adjacency_.rows() != adjacency_.cols()) {
            throw DimensionError("Graph: adjacency must be square");
        }
        if (!adjacency_.allFinite()) {
            throw std::invalid_argument("Graph: adjacency has non-finite entries");
        }
        if (detail::max_asymmetry(adjacency_) > 1e-12) {
            throw std::invalid_argument("Graph: adjacency is not symmetric");
        }
        if ((adjacency_.array() < 0.0).any()) {
            throw std::invalid_argument("Graph: negative edge weight");
        }
        for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
            if (adjacency_(i, i) != 0.0) {
                throw std::invalid_argument("Graph: self-loop at node " + std::to_string(i));
            }
        }
    }

    std::size_t n() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
    const Matrix& adjacency() const noexcept { return adjacency_; }

    /// Number of unordered node pairs with a nonzero weight.
    std::size_t edge_count() const {
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
            for (Eigen::Index i = 0; i < j; ++i) {
                if (adjacency_(i, j) != 0.0) ++count;
            }
        }
        return count;
    }

private:
    Matrix adjacency_;
};

/// G(n, p) with unit weights. Pairs (i, j), i < j, are visited row by row and
/// each consumes exactly one uniform draw, so the graph is a pure function of
/// (n, p, seed).
inline Graph generate_erdos_renyi(std::size_t n, double p, Seed seed) {
    if (n < 1) throw std::invalid_argument("generate_erdos_renyi: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("generate_erdos_renyi: p must lie in [0, 1]");
    }
    Rng rng(seed);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                a(ii, jj) = 1.0;
                a(jj, ii) = 1.0;
            }
        }
    }
    return Graph(std::move(a));
}

/// L = D - A.
inline Matrix laplacian(const Graph& g) {
    const Matrix& a = g.adjacency();
    Matrix l = -a;
    l.diagonal() = a.rowwise().sum();
    return l;
}

/// Reads a Matrix Market coordinate file as an undirected graph.
///
/// Accepts `real`, `integer` and `pattern` fields with `symmetric` or
/// `general` symmetry. Pattern entries get weight 1. Diagonal entries are
/// dropped. General files are symmetrized as (A + A^T) / 2; duplicate
/// coordinates in a general file are summed before symmetrizing.
inline Graph load_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(1, "empty file");
    ++line_no;
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (banner != "%%MatrixMarket") throw ParseError(line_no, "missing %%MatrixMarket banner");
    if (object != "matrix" || format != "coordinate") {
        throw ParseError(line_no, "only 'matrix coordinate' files are supported");
    }
    const bool pattern = field == "pattern";
    if (!pattern && field != "real" && field != "integer") {
        throw ParseError(line_no, "unsupported field '" + field + "'");
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") {
        throw ParseError(line_no, "unsupported symmetry '" + symmetry + "'");
    }

    // Size line: first non-comment, non-blank line.
    long long rows = 0, cols = 0, nnz = 0;
    for (;;) {
        if (!std::getline(in, line)) throw ParseError(line_no + 1, "missing size line");
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
            throw ParseError(line_no, "malformed size line");
        }
        break;
    }
    if (rows != cols) {
        throw DimensionError("matrix is " + std::to_string(rows) + "x" + std::to_string(cols) +
                             ", adjacency must be square");
    }
    if (rows < 1) throw ParseError(line_no, "matrix has no rows");

    Matrix a = Matrix::Zero(rows, cols);
    long long read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (read == nnz) throw ParseError(line_no, "more entries than declared");
        std::istringstream entry(line);
        long long i = 0, j = 0;
        double value = 1.0;
        if (!(entry >> i >> j)) throw ParseError(line_no, "malformed entry");
        if (!pattern && !(entry >> value)) throw ParseError(line_no, "missing value");
        if (i < 1 || i > rows || j < 1 || j > cols) {
            throw ParseError(line_no, "index out of range");
        }
        if (!std::isfinite(value)) throw ParseError(line_no, "non-finite value");
        if (value < 0.0) throw ParseError(line_no, "negative edge weight");
        ++read;
        if (i == j) continue;
        if (symmetric) {
            a(i - 1, j - 1) = value;
            a(j - 1, i - 1) = value;
        } else {
            a(i - 1, j - 1) += value;
        }
    }
    if (read != nnz) {
        throw ParseError(line_no, "expected " + std::to_string(nnz) + " entries, found " +
                                      std::to_string(read));
    }
    if (!symmetric) a = detail::symmetrized(a);
    return Graph(std::move(a));
}

/// Writes the upper triangle as a `real symmetric` Matrix Market file.
inline void save_matrix_market(const Graph& g, std::ostream& out) {
    const Matrix& a = g.adjacency();
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << g.n() << ' ' << g.n() << ' ' << g.edge_count() << '\n';
    out.precision(17);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
            if (a(i, j) != 0.0) out << (i + 1) << ' ' << (j + 1) << ' ' << a(i, j) << '\n';
        }
    }
}

}  // namespace gsampling
