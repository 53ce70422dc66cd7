#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsampling {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// 0-based node id.
using NodeIndex = std::size_t;
/// Sampling set in selection order; entries are distinct.
using NodeSet = std::vector<NodeIndex>;

/// Malformed input file. Carries the 1-based line number of the offending line
/// (0 when the problem is not tied to a line, e.g. a missing file).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear system too ill-conditioned to trust (reciprocal condition below 1e-14).
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double max_asymmetry(const Matrix& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

}  // namespace detail

}  // namespace gsampling
