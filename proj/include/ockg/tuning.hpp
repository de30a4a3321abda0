// Hyperparameter grids and the cross-validated selection of
// (sigma, lambda, gamma) for one divergence direction.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ockg/graph.hpp"
#include "ockg/kernel.hpp"
#include "ockg/moments.hpp"
#include "ockg/rng.hpp"
#include "ockg/solver.hpp"

namespace ockg {

struct GridSpec {
    std::vector<double> sigmas;
    std::vector<double> lambdas;
    std::vector<double> gammas;
    int folds = 5;
};

// Per-node bandwidths by the median heuristic, then a five-point sigma grid
// spanning their min/median/max; lambda candidates scaled by the inverse
// mean degree; gamma candidates fixed.
inline GridSpec build_grids(const std::vector<Eigen::MatrixXd>& calibration, const Graph& g,
                            int folds = 5) {
    if (calibration.size() != static_cast<std::size_t>(g.node_count()))
        throw std::invalid_argument("build_grids: one calibration block per node expected");
    std::vector<double> per_node;
    per_node.reserve(calibration.size());
    for (const auto& block : calibration) per_node.push_back(median_heuristic(block));
    std::sort(per_node.begin(), per_node.end());
    const double lo = per_node.front();
    const double hi = per_node.back();
    const std::size_t m = per_node.size();
    const double med = (m % 2 == 1) ? per_node[m / 2]
                                    : 0.5 * (per_node[m / 2 - 1] + per_node[m / 2]);

    GridSpec grids;
    grids.folds = folds;
    grids.sigmas = {lo, 0.5 * (lo + med), med, 0.5 * (med + hi), hi};
    grids.gammas = {1e-5, 1e-3, 0.1, 1.0};
    const double dbar = g.mean_degree();
    const double scale = dbar > 0.0 ? 1.0 / dbar : 1.0;
    grids.lambdas = {1e-3 * scale, 1e-2 * scale, 0.1 * scale, 1.0 * scale, 10.0 * scale};
    return grids;
}

// Shuffle 0..n-1 and deal round-robin into `folds` disjoint index sets.
inline std::vector<std::vector<int>> random_partition(int n, int folds, Rng& rng) {
    if (folds < 2) throw std::invalid_argument("random_partition: need at least 2 folds");
    if (n < folds) throw std::invalid_argument("random_partition: more folds than samples");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(0, i)]);
    std::vector<std::vector<int>> parts(folds);
    for (int i = 0; i < n; ++i) parts[i % folds].push_back(idx[i]);
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return parts;
}

struct GridPoint {
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<double> fold_losses;
    double mean_loss = 0.0;
};

struct TuneResult {
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<GridPoint> table;
};

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
    return out;
}

}  // namespace detail

// Cross-validated grid search. For each sigma and fold, moments are built
// on the fold's complement, the joint problem is solved for every
// (lambda, gamma), and the mean per-node loss on the held-out fold ranks
// the candidates. Ties break toward smaller gamma, then lambda, then sigma.
inline TuneResult tune(const std::vector<Eigen::MatrixXd>& ref_block,
                       const std::vector<Eigen::MatrixXd>& test_block, const Graph& g,
                       const Dictionary& dict, const GridSpec& grids, double alpha, Rng& rng,
                       double tol = 0.0, int max_cycles = 0) {
    const int n_nodes = g.node_count();
    if (ref_block.size() != static_cast<std::size_t>(n_nodes) ||
        test_block.size() != static_cast<std::size_t>(n_nodes))
        throw std::invalid_argument("tune: one block per node expected");
    const int n = static_cast<int>(ref_block.at(0).rows());
    for (const auto& b : ref_block)
        if (b.rows() != n) throw std::invalid_argument("tune: ragged reference block");
    for (const auto& b : test_block)
        if (b.rows() != n) throw std::invalid_argument("tune: ragged test block");
    if (grids.sigmas.empty() || grids.lambdas.empty() || grids.gammas.empty())
        throw std::invalid_argument("tune: empty grid");
    if (n < 2 * grids.folds) throw std::invalid_argument("tune: folds too small to form moments");

    const auto parts = random_partition(n, grids.folds, rng);
    const int n_combo = static_cast<int>(grids.lambdas.size() * grids.gammas.size());

    TuneResult result;
    result.table.reserve(grids.sigmas.size() * n_combo);
    for (double sigma : grids.sigmas) {
        Dictionary d = dict;
        d.set_sigma(sigma);
        std::vector<GridPoint> pts(n_combo);
        {
            int c = 0;
            for (double lambda : grids.lambdas)
                for (double gamma : grids.gammas) {
                    pts[c].sigma = sigma;
                    pts[c].lambda = lambda;
                    pts[c].gamma = gamma;
                    ++c;
                }
        }
        for (int r = 0; r < grids.folds; ++r) {
            std::vector<int> train;
            train.reserve(n - parts[r].size());
            for (int i = 0; i < n; ++i)
                if (!std::binary_search(parts[r].begin(), parts[r].end(), i)) train.push_back(i);

            std::vector<Eigen::MatrixXd> ref_train(n_nodes), test_train(n_nodes);
            std::vector<Eigen::MatrixXd> ref_hold(n_nodes), test_hold(n_nodes);
            for (int v = 0; v < n_nodes; ++v) {
                ref_train[v] = detail::take_rows(ref_block[v], train);
                test_train[v] = detail::take_rows(test_block[v], train);
                ref_hold[v] = detail::take_rows(ref_block[v], parts[r]);
                test_hold[v] = detail::take_rows(test_block[v], parts[r]);
            }
            const Moments train_mom = compute_moments(ref_train, test_train, d);
            const Moments hold_mom = compute_moments(ref_hold, test_hold, d);

            // Consecutive (lambda, gamma) candidates share the warm start;
            // the problem is strictly convex, so the minimizer is unique.
            Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n_nodes, d.size());
            for (int c = 0; c < n_combo; ++c) {
                SolverConfig scfg{alpha, pts[c].lambda, pts[c].gamma, tol, max_cycles};
                cbcgd_solve(theta, train_mom, g, scfg);
                double held = 0.0;
                for (int v = 0; v < n_nodes; ++v)
                    held += node_loss(theta.row(v).transpose(), hold_mom[v], alpha);
                pts[c].fold_losses.push_back(held / n_nodes);
            }
        }
        for (auto& p : pts) {
            double s = 0.0;
            for (double x : p.fold_losses) s += x;
            p.mean_loss = s / p.fold_losses.size();
            result.table.push_back(std::move(p));
        }
    }

    const GridPoint* best = nullptr;
    for (const auto& p : result.table) {
        if (!best || p.mean_loss < best->mean_loss ||
            (p.mean_loss == best->mean_loss &&
             std::tie(p.gamma, p.lambda, p.sigma) < std::tie(best->gamma, best->lambda, best->sigma)))
            best = &p;
    }
    result.sigma = best->sigma;
    result.lambda = best->lambda;
    result.gamma = best->gamma;
    return result;
}

}  // namespace ockg
