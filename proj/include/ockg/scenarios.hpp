// Synthetic stream generators over random graphs: four change-point
// scenarios with moment-matched pre/post laws where the construction
// allows it.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ockg/errors.hpp"
#include "ockg/graph.hpp"
#include "ockg/rng.hpp"

namespace ockg {

enum class Scenario { Ia, Ib, IIa, IIb };

inline std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Ia: return "Ia";
        case Scenario::Ib: return "Ib";
        case Scenario::IIa: return "IIa";
        case Scenario::IIb: return "IIb";
    }
    throw std::invalid_argument("scenario_name: bad enum");
}

inline Scenario scenario_from_name(const std::string& s) {
    if (s == "Ia") return Scenario::Ia;
    if (s == "Ib") return Scenario::Ib;
    if (s == "IIa") return Scenario::IIa;
    if (s == "IIb") return Scenario::IIb;
    throw data_error("unknown scenario id: " + s);
}

inline int scenario_dim(Scenario s) {
    switch (s) {
        case Scenario::Ia:
        case Scenario::Ib: return 2;
        case Scenario::IIa: return 3;
        case Scenario::IIb: return 1;
    }
    throw std::invalid_argument("scenario_dim: bad enum");
}

struct ScenarioSpec {
    Scenario kind = Scenario::IIa;
    long tau = 0;     // index of the first post-change observation; tau >= length means no change
    long length = 0;  // stream length T
    int window = 2;   // detector window n; used to validate the evaluation margins
    std::uint64_t seed = 0;
    std::vector<int> cluster_sizes = {20, 20, 20, 20};  // block-model scenarios
    double p_in = 0.5;
    double p_out = 0.01;
    int ba_nodes = 100;  // preferential-attachment scenarios
    int ball_radius = 4;

    static ScenarioSpec defaults(Scenario kind, int window, std::uint64_t seed) {
        ScenarioSpec s;
        s.kind = kind;
        s.window = window;
        s.seed = seed;
        switch (kind) {
            case Scenario::Ia: s.length = 4000; s.tau = 2000; break;
            case Scenario::Ib: s.length = 1000; s.tau = 500; break;
            case Scenario::IIa: s.length = 2000; s.tau = 1000; break;
            case Scenario::IIb: s.length = 4000; s.tau = 2000; break;
        }
        return s;
    }

    int node_count() const {
        if (kind == Scenario::Ia || kind == Scenario::Ib) {
            int n = 0;
            for (int c : cluster_sizes) n += c;
            return n;
        }
        return ba_nodes;
    }

    void validate() const {
        if (window < 2) throw data_error("scenario: window must be at least 2");
        if (length < 4 * long(window)) throw data_error("scenario: stream too short for the window");
        const bool null_run = tau >= length;
        if (!null_run && (tau < 2 * long(window) || tau > length - 2 * long(window)))
            throw data_error("scenario: change time must leave 2n margins (or lie past the end)");
        if (kind == Scenario::Ib && cluster_sizes.size() != 4)
            throw data_error("scenario Ib: exactly 4 clusters expected");
    }
};

inline Graph scenario_graph(const ScenarioSpec& spec, Rng& rng) {
    if (spec.kind == Scenario::Ia || spec.kind == Scenario::Ib)
        return sample_sbm(spec.cluster_sizes, spec.p_in, spec.p_out, rng);
    return sample_barabasi_albert(spec.ba_nodes, rng);
}

// One generating law per node and regime.
struct Law {
    enum Kind { BivariateGaussian, CopulaUniform, TrivariateGaussian, ScalarGaussian, ScalarUniform };
    Kind kind = ScalarGaussian;
    double rho = 0.0;                                 // correlation of the first two coordinates
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();   // leading entries used as needed

    bool operator==(const Law&) const = default;
};

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline Eigen::VectorXd sample_law(const Law& law, Rng& rng) {
    static const double kHalfWidth = std::sqrt(3.0);  // U(-sqrt 3, sqrt 3) has unit variance
    switch (law.kind) {
        case Law::BivariateGaussian: {
            const double z1 = rng.normal(), z2 = rng.normal();
            Eigen::VectorXd x(2);
            x[0] = law.mean[0] + z1;
            x[1] = law.mean[1] + law.rho * z1 + std::sqrt(1.0 - law.rho * law.rho) * z2;
            return x;
        }
        case Law::CopulaUniform: {
            const double z1 = rng.normal(), z2 = rng.normal();
            const double y1 = z1;
            const double y2 = law.rho * z1 + std::sqrt(1.0 - law.rho * law.rho) * z2;
            Eigen::VectorXd x(2);
            x[0] = kHalfWidth * (2.0 * standard_normal_cdf(y1) - 1.0);
            x[1] = kHalfWidth * (2.0 * standard_normal_cdf(y2) - 1.0);
            return x;
        }
        case Law::TrivariateGaussian: {
            const double z1 = rng.normal(), z2 = rng.normal(), z3 = rng.normal();
            Eigen::VectorXd x(3);
            x[0] = law.mean[0] + z1;
            x[1] = law.mean[1] + law.rho * z1 + std::sqrt(1.0 - law.rho * law.rho) * z2;
            x[2] = law.mean[2] + z3;
            return x;
        }
        case Law::ScalarGaussian: {
            Eigen::VectorXd x(1);
            x[0] = rng.normal();
            return x;
        }
        case Law::ScalarUniform: {
            Eigen::VectorXd x(1);
            x[0] = rng.uniform(-kHalfWidth, kHalfWidth);
            return x;
        }
    }
    throw std::invalid_argument("sample_law: bad enum");
}

// Pre/post laws for every node plus the affected set, with all random
// choices (affected cluster / ball seed) drawn from `rng`.
struct InstanceLaws {
    std::vector<Law> pre;
    std::vector<Law> post;
    std::vector<int> affected;
};

inline InstanceLaws instance_laws(const ScenarioSpec& spec, const Graph& g, Rng& rng) {
    spec.validate();
    const int n = g.node_count();
    if (n != spec.node_count()) throw data_error("instance_laws: graph does not match the spec");
    InstanceLaws out;
    out.pre.resize(n);
    out.post.resize(n);

    switch (spec.kind) {
        case Scenario::Ia: {
            const Law pre{Law::BivariateGaussian, 0.8, Eigen::Vector3d::Zero()};
            const Law post{Law::CopulaUniform, 0.8, Eigen::Vector3d::Zero()};
            std::fill(out.pre.begin(), out.pre.end(), pre);
            std::fill(out.post.begin(), out.post.end(), pre);
            out.affected = select_affected_cluster(spec.cluster_sizes, rng);
            for (int v : out.affected) out.post[v] = post;
            break;
        }
        case Scenario::Ib: {
            // Per-cluster schema: correlation flip / decorrelation / mean shift.
            const double r = 0.8;
            const Law pre_rows[4] = {{Law::BivariateGaussian, r, Eigen::Vector3d::Zero()},
                                     {Law::BivariateGaussian, r, Eigen::Vector3d::Zero()},
                                     {Law::BivariateGaussian, -r, Eigen::Vector3d::Zero()},
                                     {Law::BivariateGaussian, r, Eigen::Vector3d::Zero()}};
            const Law post_rows[4] = {{Law::BivariateGaussian, -r, Eigen::Vector3d::Zero()},
                                      {Law::BivariateGaussian, 0.0, Eigen::Vector3d::Zero()},
                                      {Law::BivariateGaussian, 0.0, Eigen::Vector3d::Zero()},
                                      {Law::BivariateGaussian, r, Eigen::Vector3d(1.0, 1.0, 0.0)}};
            const int c1 = rng.uniform_int(0, 3);
            int c2 = rng.uniform_int(0, 2);
            if (c2 >= c1) ++c2;
            for (int c = 0; c < 4; ++c) {
                const bool selected = (c == c1 || c == c2);
                for (int v : cluster_members(spec.cluster_sizes, c)) {
                    out.pre[v] = pre_rows[c];
                    out.post[v] = selected ? post_rows[c] : pre_rows[c];
                    if (selected) out.affected.push_back(v);
                }
            }
            std::sort(out.affected.begin(), out.affected.end());
            break;
        }
        case Scenario::IIa: {
            const Law pre{Law::TrivariateGaussian, 0.8, Eigen::Vector3d::Zero()};
            const Law post{Law::TrivariateGaussian, 0.8, Eigen::Vector3d(1.0, 0.0, 0.0)};
            std::fill(out.pre.begin(), out.pre.end(), pre);
            std::fill(out.post.begin(), out.post.end(), pre);
            out.affected = select_affected_ball(g, spec.ball_radius, rng);
            for (int v : out.affected) out.post[v] = post;
            break;
        }
        case Scenario::IIb: {
            const Law pre{Law::ScalarGaussian, 0.0, Eigen::Vector3d::Zero()};
            const Law post{Law::ScalarUniform, 0.0, Eigen::Vector3d::Zero()};
            std::fill(out.pre.begin(), out.pre.end(), pre);
            std::fill(out.post.begin(), out.post.end(), pre);
            out.affected = select_affected_ball(g, spec.ball_radius, rng);
            for (int v : out.affected) out.post[v] = post;
            break;
        }
    }
    return out;
}

struct ScenarioInstance {
    std::vector<Eigen::MatrixXd> stream;  // length T, each N x d
    std::vector<int> affected;
};

inline ScenarioInstance generate_instance(const ScenarioSpec& spec, const Graph& g, Rng& rng) {
    const InstanceLaws laws = instance_laws(spec, g, rng);
    const int n = g.node_count();
    const int d = scenario_dim(spec.kind);
    ScenarioInstance inst;
    inst.affected = laws.affected;
    inst.stream.reserve(spec.length);
    for (long t = 0; t < spec.length; ++t) {
        Eigen::MatrixXd obs(n, d);
        const bool post = t >= spec.tau;
        for (int v = 0; v < n; ++v)
            obs.row(v) = sample_law(post ? laws.post[v] : laws.pre[v], rng).transpose();
        inst.stream.push_back(std::move(obs));
    }
    return inst;
}

}  // namespace ockg
