#pragma once

#include "gsampling/graph.hpp"
#include "gsampling/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace gsampling {

/// Which graph matrix a basis was derived from. Determines the eigenvalue
/// order: adjacency bases are sorted descending (largest eigenvalue is the
/// lowest "frequency"), Laplacian bases ascending.
enum class BasisSource { adjacency, laplacian };

inline std::string_view to_string(BasisSource s) {
    return s == BasisSource::adjacency ? "adjacency" : "laplacian";
}

inline BasisSource parse_basis_source(std::string_view s) {
    if (s == "adjacency") return BasisSource::adjacency;
    if (s == "laplacian") return BasisSource::laplacian;
    throw std::invalid_argument("unknown basis source '" + std::string(s) + "'");
}

/// Full orthonormal eigenbasis V of a symmetric matrix (columns are
/// eigenvectors) with matching eigenvalues, ordered per `source`.
struct SpectralBasis {
    Matrix v;
    Vector eigenvalues;
    BasisSource source = BasisSource::adjacency;
};

/// The k retained columns U = V[:, support] of a SpectralBasis.
struct BandlimitedBasis {
    Matrix u;
    std::vector<std::size_t> support;

    std::size_t n() const noexcept { return static_cast<std::size_t>(u.rows()); }
    std::size_t k() const noexcept { return static_cast<std::size_t>(u.cols()); }
};

namespace detail {

/// Cyclic Jacobi on a dense symmetric matrix. On return `a` is (numerically)
/// diagonal and `v` holds the accumulated rotations, so input = v diag(a) v^T.
/// Sweeps stop once every off-diagonal |a_ij| <= 1e-12 * ||input||_F.
inline void jacobi_diagonalize(Matrix& a, Matrix& v, int max_sweeps = 100) {
    const Eigen::Index n = a.rows();
    v.setIdentity(n, n);
    const double threshold = 1e-12 * a.norm();
    if (n < 2 || threshold == 0.0) return;

    double* A = a.data();
    double* V = v.data();
    auto at = [n](double* base, Eigen::Index i, Eigen::Index j) -> double& { return base[i + j * n]; };

    auto max_off = [&] {
        double m = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < j; ++i) m = std::max(m, std::abs(at(A, i, j)));
        }
        return m;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (max_off() <= threshold) return;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = at(A, p, q);
                if (std::abs(apq) <= threshold) continue;
                const double app = at(A, p, p);
                const double aqq = at(A, q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                double* cp = A + p * n;
                double* cq = A + q * n;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = cp[k];
                    const double akq = cq[k];
                    cp[k] = c * akp - s * akq;
                    cq[k] = s * akp + c * akq;
                }
                cp[p] = app - t * apq;
                cq[q] = aqq + t * apq;
                cp[q] = 0.0;
                cq[p] = 0.0;
                // Mirror the updated columns into rows p and q.
                for (Eigen::Index k = 0; k < n; ++k) {
                    at(A, p, k) = cp[k];
                    at(A, q, k) = cq[k];
                }

                double* vp = V + p * n;
                double* vq = V + q * n;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = vp[k];
                    const double vkq = vq[k];
                    vp[k] = c * vkp - s * vkq;
                    vq[k] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (max_off() > threshold) {
        throw std::runtime_error("eig_symmetric: Jacobi did not converge in " +
                                 std::to_string(max_sweeps) + " sweeps");
    }
}

}  // namespace detail

/// Eigendecomposition of a real symmetric matrix, m = V diag(lambda) V^T.
///
/// Each eigenvector is sign-normalized so its largest-magnitude entry (first
/// one on ties) is positive. Columns are ordered descending by eigenvalue for
/// BasisSource::adjacency and ascending for BasisSource::laplacian; exactly
/// equal eigenvalues are ordered by lexicographic comparison of the
/// normalized eigenvectors. The output is a deterministic function of m.
inline SpectralBasis eig_symmetric(const Matrix& m, BasisSource source = BasisSource::adjacency) {
    if (m.rows() != m.cols()) throw DimensionError("eig_symmetric: matrix must be square");
    if (m.rows() == 0) throw DimensionError("eig_symmetric: empty matrix");
    if (!m.allFinite()) throw std::invalid_argument("eig_symmetric: non-finite entries");
    if (detail::max_asymmetry(m) > 1e-10) {
        throw std::invalid_argument("eig_symmetric: matrix is not symmetric");
    }

    Matrix a = detail::symmetrized(m);
    Matrix v;
    detail::jacobi_diagonalize(a, v);
    const Eigen::Index n = m.rows();

    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v(i, j)) > best) {
                best = std::abs(v(i, j));
                imax = i;
            }
        }
        if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Vector lambda = a.diagonal();
    const bool descending = source == BasisSource::adjacency;
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (lambda(x) != lambda(y)) return descending ? lambda(x) > lambda(y) : lambda(x) < lambda(y);
        const auto vx = v.col(x);
        const auto vy = v.col(y);
        return std::lexicographical_compare(vx.begin(), vx.end(), vy.begin(), vy.end());
    });

    SpectralBasis out;
    out.source = source;
    out.v.resize(n, n);
    out.eigenvalues.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto src = order[static_cast<std::size_t>(j)];
        out.v.col(j) = v.col(src);
        out.eigenvalues(j) = lambda(src);
    }
    return out;
}

/// Basis of the graph's adjacency or Laplacian matrix.
inline SpectralBasis graph_basis(const Graph& g, BasisSource source) {
    return eig_symmetric(source == BasisSource::adjacency ? g.adjacency() : laplacian(g), source);
}

/// First k columns of V in the basis' sort order.
inline BandlimitedBasis bandlimit(const SpectralBasis& basis, std::size_t k) {
    const auto n = static_cast<std::size_t>(basis.v.cols());
    if (k < 1 || k > n) {
        throw std::out_of_range("bandlimit: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(n) + "]");
    }
    BandlimitedBasis out;
    out.u = basis.v.leftCols(static_cast<Eigen::Index>(k));
    out.support.resize(k);
    std::iota(out.support.begin(), out.support.end(), std::size_t{0});
    return out;
}

}  // namespace gsampling
