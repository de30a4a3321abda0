// Gaussian kernel, feature maps over a shared dictionary, the median
// heuristic, and coherence-gated online dictionary maintenance.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ockg/errors.hpp"

namespace ockg {

// K(x, y) = exp(-||x - y||^2 / (2 sigma^2)), values in (0, 1].
inline double gaussian_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) {
    if (x.size() != y.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

// Median of all pairwise Euclidean distances. Points are rows.
inline double median_heuristic(const Eigen::MatrixXd& points) {
    const Eigen::Index m = points.rows();
    if (m < 2) throw std::invalid_argument("median_heuristic: need at least 2 points");
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            dist.push_back((points.row(i) - points.row(j)).norm());
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
    double med = dist[mid];
    if (dist.size() % 2 == 0) {
        auto lower = std::max_element(dist.begin(), dist.begin() + mid);
        med = 0.5 * (med + *lower);
    }
    if (!(med > 0.0)) throw numeric_error("median_heuristic: degenerate sample (zero median distance)");
    return med;
}

// Ordered kernel-center set shared by all nodes. A candidate enters only if
// its coherence (max kernel value against current centers) stays at or
// below mu0; past the capacity, the most redundant center is dropped.
class Dictionary {
  public:
    Dictionary(int dim, double sigma, double mu0, int capacity)
        : sigma_(sigma), mu0_(mu0), capacity_(capacity), centers_(0, dim) {
        if (dim <= 0) throw std::invalid_argument("Dictionary: dimension must be positive");
        if (!(sigma > 0.0)) throw std::invalid_argument("Dictionary: sigma must be positive");
        if (!(mu0 > 0.0 && mu0 < 1.0)) throw std::invalid_argument("Dictionary: mu0 must lie in (0,1)");
        if (capacity < 1) throw std::invalid_argument("Dictionary: capacity must be at least 1");
    }

    // Scan points (rows) in order: keep the first, then admit a point only
    // when its coherence is at or below mu0; stop admitting at capacity.
    static Dictionary from_points(const Eigen::MatrixXd& points, double sigma, double mu0,
                                  int capacity) {
        if (points.rows() < 1) throw std::invalid_argument("Dictionary: empty point set");
        Dictionary d(static_cast<int>(points.cols()), sigma, mu0, capacity);
        d.append(points.row(0).transpose());
        for (Eigen::Index i = 1; i < points.rows() && d.size() < capacity; ++i) {
            const Eigen::VectorXd x = points.row(i).transpose();
            if (d.coherence(x) <= mu0) d.append(x);
        }
        return d;
    }

    // Adopt rows verbatim as the center set (deserialization path; the
    // rows already passed the coherence rule when first admitted).
    static Dictionary from_centers(const Eigen::MatrixXd& centers, double sigma, double mu0,
                                   int capacity) {
        if (centers.rows() < 1) throw std::invalid_argument("Dictionary: empty center set");
        if (centers.rows() > capacity)
            throw std::invalid_argument("Dictionary: more centers than capacity");
        Dictionary d(static_cast<int>(centers.cols()), sigma, mu0, capacity);
        for (Eigen::Index l = 0; l < centers.rows(); ++l) d.append(centers.row(l).transpose());
        return d;
    }

    struct Update {
        bool inserted = false;
        int evicted = -1;  // index in the post-insert ordering, -1 if none
    };

    Update update(const Eigen::VectorXd& x) {
        if (x.size() != dim()) throw std::invalid_argument("Dictionary::update: dimension mismatch");
        Update res;
        if (coherence(x) > mu0_) return res;
        append(x);
        res.inserted = true;
        if (size() > capacity_) {
            res.evicted = most_redundant();
            remove(res.evicted);
        }
        return res;
    }

    // max_l K(center_l, x); zero for an empty dictionary.
    double coherence(const Eigen::VectorXd& x) const {
        if (x.size() != dim()) throw std::invalid_argument("Dictionary::coherence: dimension mismatch");
        double best = 0.0;
        for (Eigen::Index l = 0; l < centers_.rows(); ++l) {
            const double k =
                std::exp(-(centers_.row(l).transpose() - x).squaredNorm() / (2.0 * sigma_ * sigma_));
            best = std::max(best, k);
        }
        return best;
    }

    int size() const { return static_cast<int>(centers_.rows()); }
    int dim() const { return static_cast<int>(centers_.cols()); }
    double sigma() const { return sigma_; }
    double mu0() const { return mu0_; }
    int capacity() const { return capacity_; }
    const Eigen::MatrixXd& centers() const { return centers_; }
    long insertion_stamp(int l) const { return stamps_.at(l); }

    void set_sigma(double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("Dictionary: sigma must be positive");
        sigma_ = sigma;
    }

  private:
    void append(const Eigen::VectorXd& x) {
        centers_.conservativeResize(centers_.rows() + 1, Eigen::NoChange);
        centers_.row(centers_.rows() - 1) = x.transpose();
        stamps_.push_back(next_stamp_++);
    }

    void remove(int l) {
        const Eigen::Index rows = centers_.rows();
        for (Eigen::Index r = l; r + 1 < rows; ++r) centers_.row(r) = centers_.row(r + 1);
        centers_.conservativeResize(rows - 1, Eigen::NoChange);
        stamps_.erase(stamps_.begin() + l);
    }

    // Center with the highest coherence against the other centers; ties go
    // to the oldest insertion.
    int most_redundant() const {
        const int L = size();
        int arg = 0;
        double best = -1.0;
        for (int l = 0; l < L; ++l) {
            double coh = 0.0;
            for (int m = 0; m < L; ++m) {
                if (m == l) continue;
                const double k = std::exp(-(centers_.row(l) - centers_.row(m)).squaredNorm() /
                                          (2.0 * sigma_ * sigma_));
                coh = std::max(coh, k);
            }
            if (coh > best || (coh == best && stamps_[l] < stamps_[arg])) {
                best = coh;
                arg = l;
            }
        }
        return arg;
    }

    double sigma_;
    double mu0_;
    int capacity_;
    Eigen::MatrixXd centers_;  // L x d, row per center
    std::vector<long> stamps_;
    long next_stamp_ = 0;
};

// phi(x): kernel evaluations against every center, in center order.
inline Eigen::VectorXd feature_map(const Eigen::VectorXd& x, const Dictionary& dict) {
    if (x.size() != dict.dim()) throw std::invalid_argument("feature_map: dimension mismatch");
    const auto& c = dict.centers();
    Eigen::VectorXd phi(c.rows());
    const double denom = 2.0 * dict.sigma() * dict.sigma();
    for (Eigen::Index l = 0; l < c.rows(); ++l)
        phi[l] = std::exp(-(c.row(l).transpose() - x).squaredNorm() / denom);
    return phi;
}

// Feature map of every row of `points`: an m x L matrix.
inline Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& points, const Dictionary& dict) {
    if (points.cols() != dict.dim()) throw std::invalid_argument("feature_matrix: dimension mismatch");
    const auto& c = dict.centers();
    const double denom = 2.0 * dict.sigma() * dict.sigma();
    // ||x - c||^2 = ||x||^2 + ||c||^2 - 2 x.c
    Eigen::VectorXd pn = points.rowwise().squaredNorm();
    Eigen::VectorXd cn = c.rowwise().squaredNorm();
    Eigen::MatrixXd sq = (-2.0 * points * c.transpose());
    sq.colwise() += pn;
    sq.rowwise() += cn.transpose();
    return (-sq.cwiseMax(0.0) / denom).array().exp();
}

}  // namespace ockg
