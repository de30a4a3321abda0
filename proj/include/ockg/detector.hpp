// The online detector loop: sliding windows over synchronized node
// streams, coherence-gated dictionary updates, warm-started solves in both
// divergence directions, scoring, alarm and affected-node identification.
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ockg/divergence.hpp"
#include "ockg/graph.hpp"
#include "ockg/kernel.hpp"
#include "ockg/solver.hpp"

namespace ockg {

// Hyperparameters and dictionary of one divergence direction.
struct DirectionConfig {
    double alpha = 0.1;
    double sigma = 1.0;
    double lambda = 0.1;
    double gamma = 0.1;
    Dictionary dict;
};

struct DetectorOptions {
    int window = 2;      // n, per-direction sample size
    int stride = 1;      // score every `stride` observations once warmed up
    double tol = 0.0;    // solver stopping tolerance (0 -> default)
    int max_cycles = 0;  // solver cycle cap (0 -> default)
    double eta = std::numeric_limits<double>::infinity();       // global alarm threshold
    double eta_node = std::numeric_limits<double>::infinity();  // per-node threshold
    // When set, scores are only computed for times inside [first, second].
    std::optional<std::pair<long, long>> score_window;
};

struct DetectionResult {
    std::optional<long> tau_hat;
    std::vector<int> affected;
    ScoreSeries series;
    int nonconverged_points = 0;
};

// S_t >= eta raises the alarm; affected nodes are those with S_{v,t} > eta_v.
inline std::optional<std::pair<long, std::vector<int>>> check_alarm(const ScorePoint& p,
                                                                    double eta, double eta_node) {
    if (!(p.global >= eta)) return std::nullopt;
    std::vector<int> affected;
    for (Eigen::Index v = 0; v < p.node_scores.size(); ++v)
        if (p.node_scores[v] > eta_node) affected.push_back(static_cast<int>(v));
    return std::make_pair(p.time, std::move(affected));
}

class Detector {
  public:
    Detector(Graph graph, DetectorOptions opt, DirectionConfig forward, DirectionConfig backward)
        : graph_(std::move(graph)),
          opt_(opt),
          dirs_{Direction{std::move(forward)}, Direction{std::move(backward)}} {
        if (opt_.window < 2) throw std::invalid_argument("Detector: window must be at least 2");
        if (opt_.stride < 1) throw std::invalid_argument("Detector: stride must be at least 1");
        const int n_nodes = graph_.node_count();
        dim_ = dirs_[0].cfg.dict.dim();
        if (dirs_[1].cfg.dict.dim() != dim_)
            throw std::invalid_argument("Detector: dictionaries disagree on dimension");
        for (auto& d : dirs_) {
            validate_direction(d.cfg);
            d.cfg.dict.set_sigma(d.cfg.sigma);
            d.theta = Eigen::MatrixXd::Zero(n_nodes, d.cfg.dict.size());
        }
        buffers_.assign(n_nodes, Eigen::MatrixXd(2 * opt_.window, dim_));
    }

    long time() const { return time_; }
    const Graph& graph() const { return graph_; }
    const Dictionary& forward_dictionary() const { return dirs_[0].cfg.dict; }
    const Dictionary& backward_dictionary() const { return dirs_[1].cfg.dict; }

    // Feeds one observation per node. Returns a score point when the
    // buffers are full and the stride/window gates let this step score.
    std::optional<ScorePoint> step(const Eigen::MatrixXd& obs) {
        const int n_nodes = graph_.node_count();
        if (obs.rows() != n_nodes || obs.cols() != dim_)
            throw std::invalid_argument("Detector::step: observation shape mismatch");

        const long slot = time_ % (2 * opt_.window);
        for (int v = 0; v < n_nodes; ++v) buffers_[v].row(slot) = obs.row(v);
        ++time_;

        // Every direction sees every new observation; its parameter block
        // follows the dictionary (fresh centers start at zero).
        for (auto& d : dirs_) {
            for (int v = 0; v < n_nodes; ++v) {
                const auto up = d.cfg.dict.update(obs.row(v).transpose());
                if (up.inserted) append_zero_column(d.theta);
                if (up.evicted >= 0) remove_column(d.theta, up.evicted);
            }
        }

        if (time_ < 2 * opt_.window) return std::nullopt;
        if ((time_ - 2 * opt_.window) % opt_.stride != 0) return std::nullopt;
        if (opt_.score_window &&
            (time_ < opt_.score_window->first || time_ > opt_.score_window->second))
            return std::nullopt;
        return score();
    }

    DetectionResult run(const std::vector<Eigen::MatrixXd>& stream) {
        DetectionResult res;
        for (const auto& obs : stream) {
            auto p = step(obs);
            if (!p) continue;
            if (!p->solver_converged) ++res.nonconverged_points;
            if (!res.tau_hat) {
                if (auto alarm = check_alarm(*p, opt_.eta, opt_.eta_node)) {
                    res.tau_hat = alarm->first;
                    res.affected = std::move(alarm->second);
                }
            }
            res.series.push_back(std::move(*p));
        }
        return res;
    }

    // Reference (older) and test (newer) halves of node v's buffer, oldest
    // observation first. Only valid once 2n observations have been seen.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> windows(int v) const {
        if (time_ < 2 * opt_.window) throw std::logic_error("Detector::windows: buffers not full");
        const int n = opt_.window;
        Eigen::MatrixXd ordered(2 * n, dim_);
        for (int i = 0; i < 2 * n; ++i)
            ordered.row(i) = buffers_.at(v).row((time_ + i) % (2 * n));
        return {ordered.topRows(n), ordered.bottomRows(n)};
    }

  private:
    struct Direction {
        DirectionConfig cfg;
        Eigen::MatrixXd theta;
    };

    static void validate_direction(const DirectionConfig& c) {
        SolverConfig probe{c.alpha, c.lambda, c.gamma, 0.0, 0};
        probe.validate();
        if (!(c.sigma > 0.0)) throw std::invalid_argument("Detector: sigma must be positive");
    }

    static void append_zero_column(Eigen::MatrixXd& m) {
        m.conservativeResize(Eigen::NoChange, m.cols() + 1);
        m.col(m.cols() - 1).setZero();
    }

    static void remove_column(Eigen::MatrixXd& m, int c) {
        const Eigen::Index cols = m.cols();
        for (Eigen::Index j = c; j + 1 < cols; ++j) m.col(j) = m.col(j + 1);
        m.conservativeResize(Eigen::NoChange, cols - 1);
    }

    ScorePoint score() {
        const int n_nodes = graph_.node_count();
        std::vector<Eigen::MatrixXd> ref(n_nodes), test(n_nodes);
        for (int v = 0; v < n_nodes; ++v) std::tie(ref[v], test[v]) = windows(v);

        Eigen::VectorXd pe[2];
        bool converged = true;
        for (int k = 0; k < 2; ++k) {
            auto& d = dirs_[k];
            // Forward compares (older, newer); backward swaps the roles.
            const auto& from = (k == 0) ? ref : test;
            const auto& to = (k == 0) ? test : ref;
            const Moments mom = compute_moments(from, to, d.cfg.dict);
            SolverConfig scfg{d.cfg.alpha, d.cfg.lambda, d.cfg.gamma, opt_.tol, opt_.max_cycles};
            const SolveOutcome so = cbcgd_solve(d.theta, mom, graph_, scfg);
            converged = converged && so.converged;
            pe[k].resize(n_nodes);
            for (int v = 0; v < n_nodes; ++v)
                pe[k][v] = pe_divergence(d.theta.row(v).transpose(), mom[v], d.cfg.alpha);
        }
        ScorePoint p = make_score_point(time_, pe[0], pe[1]);
        p.solver_converged = converged;
        return p;
    }

    Graph graph_;
    DetectorOptions opt_;
    int dim_ = 0;
    long time_ = 0;
    std::vector<Eigen::MatrixXd> buffers_;  // per node, circular, 2n rows
    Direction dirs_[2];                     // forward, backward
};

}  // namespace ockg
