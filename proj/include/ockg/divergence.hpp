// Pearson-divergence approximation from fitted parameters and the
// node-level / global change scores built from both divergence directions.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "ockg/moments.hpp"

namespace ockg {

// Empirical Pearson divergence of the window pair behind `m`, evaluated at
// a fitted parameter: -loss(theta) - 1/2. Deliberately free of any
// graph-size normalization, so the value is comparable across graph sizes
// and matches the single-stream estimator when the graph is ignored.
inline double pe_divergence(const Eigen::VectorXd& theta, const NodeMoments& m, double alpha) {
    return -node_loss(theta, m, alpha) - 0.5;
}

// Divergences can come out negative; the score clamps their two-direction
// sum at zero.
inline double node_score(double pe_forward, double pe_backward) {
    return std::max(pe_forward + pe_backward, 0.0);
}

inline double global_score(const Eigen::VectorXd& node_scores) { return node_scores.sum(); }

// Scores of one evaluation step. `time` counts observations consumed, so
// the first full comparison happens at time 2n and a change at tau is
// expected to peak near tau + n.
struct ScorePoint {
    long time = 0;
    double global = 0.0;
    Eigen::VectorXd node_scores;
    Eigen::VectorXd pe_forward;
    Eigen::VectorXd pe_backward;
    bool solver_converged = true;
};

using ScoreSeries = std::vector<ScorePoint>;

inline ScorePoint make_score_point(long time, const Eigen::VectorXd& pe_fwd,
                                   const Eigen::VectorXd& pe_bwd) {
    if (pe_fwd.size() != pe_bwd.size())
        throw std::invalid_argument("make_score_point: direction size mismatch");
    ScorePoint p;
    p.time = time;
    p.pe_forward = pe_fwd;
    p.pe_backward = pe_bwd;
    p.node_scores = (pe_fwd + pe_bwd).cwiseMax(0.0);
    p.global = p.node_scores.sum();
    return p;
}

}  // namespace ockg
