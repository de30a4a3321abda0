// Empirical feature moments of a reference/test window pair and the
// per-node quadratic loss they induce.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "ockg/kernel.hpp"

namespace ockg {

// For one node: second moments of the feature map over each window and the
// first moment over the test window, every sum normalized by its own
// window length.
struct NodeMoments {
    Eigen::MatrixXd ref_second;   // (1/n) sum over ref window of phi phi^T
    Eigen::MatrixXd test_second;  // (1/n) sum over test window of phi phi^T
    Eigen::VectorXd test_first;   // (1/n) sum over test window of phi
};

inline NodeMoments compute_node_moments(const Eigen::MatrixXd& ref_window,
                                        const Eigen::MatrixXd& test_window,
                                        const Dictionary& dict) {
    if (ref_window.rows() < 1 || test_window.rows() < 1)
        throw std::invalid_argument("compute_node_moments: empty window");
    const Eigen::MatrixXd phi_ref = feature_matrix(ref_window, dict);
    const Eigen::MatrixXd phi_test = feature_matrix(test_window, dict);
    NodeMoments m;
    m.ref_second = phi_ref.transpose() * phi_ref / static_cast<double>(phi_ref.rows());
    m.test_second = phi_test.transpose() * phi_test / static_cast<double>(phi_test.rows());
    m.test_first = phi_test.colwise().sum().transpose() / static_cast<double>(phi_test.rows());
    return m;
}

using Moments = std::vector<NodeMoments>;

// Windows are given per node (each an n x d matrix of observations).
inline Moments compute_moments(const std::vector<Eigen::MatrixXd>& ref_windows,
                               const std::vector<Eigen::MatrixXd>& test_windows,
                               const Dictionary& dict) {
    if (ref_windows.size() != test_windows.size())
        throw std::invalid_argument("compute_moments: window count mismatch");
    Moments out;
    out.reserve(ref_windows.size());
    for (std::size_t v = 0; v < ref_windows.size(); ++v)
        out.push_back(compute_node_moments(ref_windows[v], test_windows[v], dict));
    return out;
}

// (1-alpha)/2 theta^T H theta + alpha/2 theta^T H' theta - h'^T theta,
// with no graph-size normalization.
inline double node_loss(const Eigen::VectorXd& theta, const NodeMoments& m, double alpha) {
    if (theta.size() != m.ref_second.rows() || theta.size() != m.test_first.size())
        throw std::invalid_argument("node_loss: shape mismatch");
    const double quad_ref = theta.dot(m.ref_second * theta);
    const double quad_test = theta.dot(m.test_second * theta);
    return 0.5 * (1.0 - alpha) * quad_ref + 0.5 * alpha * quad_test - m.test_first.dot(theta);
}

}  // namespace ockg
