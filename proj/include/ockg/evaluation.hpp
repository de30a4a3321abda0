// Run-level metrics: peak-based detection delay, ROC/AUC of the node
// scores around the change, run success, and Monte-Carlo aggregation.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "ockg/divergence.hpp"
#include "ockg/errors.hpp"

namespace ockg {

// Index into `series` of the maximal global score among points with time in
// [lo, hi]; ties go to the earliest time. Returns -1 when no point qualifies.
inline long peak_index(const ScoreSeries& series, long lo, long hi) {
    long best = -1;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& p = series[i];
        if (p.time < lo || p.time > hi) continue;
        if (best < 0 || p.global > series[best].global) best = static_cast<long>(i);
    }
    return best;
}

// Peak time within [tau, tau+2n] minus tau.
inline long detection_delay(const ScoreSeries& series, long tau, int window) {
    const long idx = peak_index(series, tau, tau + 2 * long(window));
    if (idx < 0) throw data_error("detection_delay: no score points cover [tau, tau+2n]");
    return series[idx].time - tau;
}

// Success means the global argmax over everything that was scored falls
// inside [tau, tau+2n].
inline bool run_success(const ScoreSeries& series, long tau, int window) {
    if (series.empty()) throw data_error("run_success: empty score series");
    long best = 0;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].global > series[best].global) best = static_cast<long>(i);
    const long t = series[best].time;
    return t >= tau && t <= tau + 2 * long(window);
}

// Score point whose time is closest to `target` (earlier wins ties).
inline const ScorePoint& nearest_point(const ScoreSeries& series, long target) {
    if (series.empty()) throw data_error("nearest_point: empty score series");
    std::size_t best = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const long cur = std::abs(series[i].time - target);
        const long ref = std::abs(series[best].time - target);
        if (cur < ref) best = i;
    }
    return series[best];
}

struct RocResult {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), threshold sweep
    double auc = 0.0;
};

// Threshold-sweep ROC plus the rank-average (Mann-Whitney) AUC, which
// handles the heavy score ties produced by clamping.
inline RocResult roc_auc(const Eigen::VectorXd& scores, const std::vector<char>& positive) {
    const Eigen::Index n = scores.size();
    if (static_cast<Eigen::Index>(positive.size()) != n)
        throw std::invalid_argument("roc_auc: label size mismatch");
    long np = 0;
    for (char c : positive) np += c ? 1 : 0;
    const long nn = n - np;
    if (np == 0 || nn == 0)
        throw std::invalid_argument("roc_auc: need both affected and unaffected nodes");

    std::vector<int> order(n);
    for (Eigen::Index i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores[a] > scores[b]; });

    RocResult out;
    out.points.emplace_back(0.0, 0.0);
    double rank_sum_pos = 0.0;  // average ranks, rank 1 = smallest score
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long tie_tp = 0, tie_fp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (positive[order[j]]) ++tie_tp;
            else ++tie_fp;
            ++j;
        }
        // Descending positions i..j-1 correspond to ascending ranks n-j+1..n-i.
        const double avg_rank = 0.5 * (double(n - j + 1) + double(n - i));
        rank_sum_pos += avg_rank * tie_tp;
        tp += tie_tp;
        fp += tie_fp;
        out.points.emplace_back(double(fp) / nn, double(tp) / np);
        i = j;
    }
    out.auc = (rank_sum_pos - 0.5 * double(np) * double(np + 1)) / (double(np) * double(nn));
    return out;
}

struct InstanceMetrics {
    long delay = 0;
    double auc = 0.0;
    bool success = false;
    long peak_time = 0;
    double peak_score = 0.0;
    RocResult roc;
};

// Metrics of one run: delay from the peak near tau, ROC of the node scores
// at the scored time nearest tau+n, and the run-level success flag.
inline InstanceMetrics evaluate_instance(const ScoreSeries& series,
                                         const std::vector<int>& affected, int n_nodes, long tau,
                                         int window) {
    InstanceMetrics m;
    m.delay = detection_delay(series, tau, window);
    m.success = run_success(series, tau, window);
    const long idx = peak_index(series, tau, tau + 2 * long(window));
    m.peak_time = series[idx].time;
    m.peak_score = series[idx].global;
    const ScorePoint& at = nearest_point(series, tau + window);
    std::vector<char> labels(n_nodes, 0);
    for (int v : affected) labels.at(v) = 1;
    m.roc = roc_auc(at.node_scores, labels);
    m.auc = m.roc.auc;
    return m;
}

struct AggregateReport {
    int instances = 0;
    double delay_mean = 0.0, delay_std = 0.0;
    double auc_mean = 0.0, auc_std = 0.0;
    double precision = 0.0;  // fraction of successful runs
    // Mean ROC on a fixed false-positive grid: (fpr, tpr mean, tpr std).
    std::vector<std::array<double, 3>> roc_grid;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    const double n = double(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

// Step interpolation of a threshold-sweep ROC at a given false-positive rate.
inline double tpr_at(const RocResult& roc, double fpr) {
    double best = 0.0;
    for (const auto& [f, t] : roc.points)
        if (f <= fpr) best = std::max(best, t);
    return best;
}

}  // namespace detail

inline AggregateReport aggregate(const std::vector<InstanceMetrics>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no instances");
    AggregateReport rep;
    rep.instances = static_cast<int>(runs.size());
    std::vector<double> delays, aucs;
    int successes = 0;
    for (const auto& r : runs) {
        delays.push_back(double(r.delay));
        aucs.push_back(r.auc);
        successes += r.success ? 1 : 0;
    }
    std::tie(rep.delay_mean, rep.delay_std) = detail::mean_std(delays);
    std::tie(rep.auc_mean, rep.auc_std) = detail::mean_std(aucs);
    rep.precision = double(successes) / rep.instances;
    for (int k = 0; k <= 50; ++k) {
        const double fpr = k / 50.0;
        std::vector<double> tprs;
        tprs.reserve(runs.size());
        for (const auto& r : runs) tprs.push_back(detail::tpr_at(r.roc, fpr));
        const auto [m, s] = detail::mean_std(tprs);
        rep.roc_grid.push_back({fpr, m, s});
    }
    return rep;
}

}  // namespace ockg
