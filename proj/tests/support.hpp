#pragma once

#include "gsampling/graph.hpp"
#include "gsampling/signal_model.hpp"
#include "gsampling/spectral.hpp"

#include <Eigen/LU>

namespace gsampling::testing {

/// ER graph, adjacency basis truncated to k, random covariance.
inline SignalModel random_model(std::size_t n, std::size_t k, double sigma2, Seed seed, double p = 0.2) {
    const Graph g = generate_erdos_renyi(n, p, derive_seed(seed, {1}));
    return SignalModel(bandlimit(graph_basis(g, BasisSource::adjacency), k), random_psd_covariance(k, derive_seed(seed, {2})),
                       sigma2);
}

/// (P^-1 + sigma^-2 U_S^T U_S)^-1 by explicit LU inverses.
inline Matrix oracle_covariance(const NodeSet& s, const Matrix& u, const Matrix& p, double sigma2) {
    Matrix info = p.fullPivLu().inverse();
    for (NodeIndex j : s) {
        const Vector r = u.row(static_cast<Eigen::Index>(j)).transpose();
        info += r * r.transpose() / sigma2;
    }
    return info.fullPivLu().inverse();
}

inline double oracle_mse(const NodeSet& s, const SignalModel& m) {
    return oracle_covariance(s, m.u(), m.p(), m.sigma2()).trace();
}

}  // namespace gsampling::testing
