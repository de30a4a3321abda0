#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "ockg/evaluation.hpp"
#include "ockg/scenarios.hpp"

using namespace ockg;

namespace {

constexpr int kMonteCarlo = 100000;

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::abs((double(i) + 1.0) / n - f));
        d = std::max(d, std::abs(double(i) / n - f));
    }
    return d;
}

struct MomentStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

MomentStats empirical_moments(const Law& law, int draws, Rng& rng) {
    Eigen::VectorXd first = sample_law(law, rng);
    const int d = static_cast<int>(first.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    mean += first;
    second += first * first.transpose();
    for (int i = 1; i < draws; ++i) {
        const Eigen::VectorXd x = sample_law(law, rng);
        mean += x;
        second += x * x.transpose();
    }
    mean /= double(draws);
    second /= double(draws);
    return {mean, second - mean * mean.transpose()};
}

ScorePoint point_at(long t, double global) {
    ScorePoint p;
    p.time = t;
    p.global = global;
    p.node_scores = Eigen::VectorXd::Constant(1, global);
    p.pe_forward = p.node_scores;
    p.pe_backward = Eigen::VectorXd::Zero(1);
    return p;
}

}  // namespace

TEST_CASE("scenario defaults match the experimental protocol") {
    CHECK(ScenarioSpec::defaults(Scenario::Ia, 125, 1).length == 4000);
    CHECK(ScenarioSpec::defaults(Scenario::Ia, 125, 1).tau == 2000);
    CHECK(ScenarioSpec::defaults(Scenario::Ib, 25, 1).length == 1000);
    CHECK(ScenarioSpec::defaults(Scenario::Ib, 25, 1).tau == 500);
    CHECK(ScenarioSpec::defaults(Scenario::IIa, 100, 1).tau == 1000);
    CHECK(ScenarioSpec::defaults(Scenario::IIb, 125, 1).tau == 2000);
    CHECK(scenario_dim(Scenario::Ia) == 2);
    CHECK(scenario_dim(Scenario::IIa) == 3);
    CHECK(scenario_dim(Scenario::IIb) == 1);

    ScenarioSpec bad = ScenarioSpec::defaults(Scenario::IIa, 100, 1);
    bad.tau = 150;  // inside the 2n margin
    CHECK_THROWS_AS(bad.validate(), data_error);
    bad.tau = bad.length;  // change-free sentinel is allowed
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("copula marginals are uniform with matched first two moments") {
    Rng rng(101);
    const Law copula{Law::CopulaUniform, 0.8, Eigen::Vector3d::Zero()};
    const double half = std::sqrt(3.0);

    std::vector<double> first, second;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd sec = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < kMonteCarlo; ++i) {
        const Eigen::VectorXd x = sample_law(copula, rng);
        first.push_back(x[0]);
        second.push_back(x[1]);
        mean += x;
        sec += x * x.transpose();
    }
    mean /= double(kMonteCarlo);
    sec /= double(kMonteCarlo);
    const Eigen::MatrixXd cov = sec - mean * mean.transpose();

    // Uniformity at the 1% level (asymptotic critical value 1.628/sqrt(n)).
    auto unif_cdf = [&](double x) { return std::clamp((x + half) / (2.0 * half), 0.0, 1.0); };
    const double crit = 1.628 / std::sqrt(double(kMonteCarlo));
    CHECK(ks_statistic(first, unif_cdf) < crit);
    CHECK(ks_statistic(second, unif_cdf) < crit);

    CHECK(std::abs(cov(0, 0) - 1.0) < 0.02);
    CHECK(std::abs(cov(1, 1) - 1.0) < 0.02);
    CHECK(std::abs(cov(0, 1) - 0.8) < 0.02);
    CHECK(std::abs(mean[0]) < 0.02);
    CHECK(std::abs(mean[1]) < 0.02);
}

TEST_CASE("pre/post moments of the copula switch stay within 0.02") {
    Rng rng(103);
    const Law pre{Law::BivariateGaussian, 0.8, Eigen::Vector3d::Zero()};
    const Law post{Law::CopulaUniform, 0.8, Eigen::Vector3d::Zero()};
    const MomentStats a = empirical_moments(pre, kMonteCarlo, rng);
    const MomentStats b = empirical_moments(post, kMonteCarlo, rng);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 0.02);
    CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("cluster schema drives the block-model scenarios") {
    Rng graph_rng(7);
    ScenarioSpec spec = ScenarioSpec::defaults(Scenario::Ib, 25, 7);
    const Graph g = scenario_graph(spec, graph_rng);

    // Find an instance whose selection includes the first cluster.
    bool found = false;
    for (std::uint64_t seed = 0; seed < 20 && !found; ++seed) {
        Rng rng(seed);
        const InstanceLaws laws = instance_laws(spec, g, rng);
        const bool has_c1 =
            std::find(laws.affected.begin(), laws.affected.end(), 0) != laws.affected.end();
        if (!has_c1) continue;
        found = true;
        CHECK(laws.pre[0].rho == 0.8);
        CHECK(laws.post[0].rho == -0.8);  // correlation flip row
        // Unselected clusters keep their law through the change.
        const std::set<int> affected(laws.affected.begin(), laws.affected.end());
        CHECK(affected.size() == 40);
        for (int v = 0; v < g.node_count(); ++v)
            if (!affected.count(v)) CHECK(laws.pre[v] == laws.post[v]);
        // Third cluster's pre-change law is anticorrelated by the schema.
        CHECK(laws.pre[45].rho == -0.8);
    }
    REQUIRE(found);

    Rng mc(11);
    const MomentStats s =
        empirical_moments(Law{Law::BivariateGaussian, -0.8, Eigen::Vector3d::Zero()}, kMonteCarlo,
                          mc);
    CHECK(std::abs(s.cov(0, 1) + 0.8) < 0.02);
}

TEST_CASE("mean-shift scenario moves only the first coordinate of affected nodes") {
    Rng graph_rng(13);
    ScenarioSpec spec = ScenarioSpec::defaults(Scenario::IIa, 100, 13);
    const Graph g = scenario_graph(spec, graph_rng);
    Rng rng(1);
    const InstanceLaws laws = instance_laws(spec, g, rng);
    REQUIRE(!laws.affected.empty());

    const std::set<int> affected(laws.affected.begin(), laws.affected.end());
    for (int v = 0; v < g.node_count(); ++v) {
        if (affected.count(v)) {
            CHECK(laws.post[v].mean[0] == 1.0);
            CHECK(laws.post[v].mean[1] == 0.0);
        } else {
            CHECK(laws.pre[v] == laws.post[v]);
        }
    }

    Rng mc(3);
    const MomentStats s = empirical_moments(
        Law{Law::TrivariateGaussian, 0.8, Eigen::Vector3d(1.0, 0.0, 0.0)}, kMonteCarlo, mc);
    CHECK(std::abs(s.mean[0] - 1.0) < 0.02);
    CHECK(std::abs(s.cov(0, 1) - 0.8) < 0.02);
    CHECK(std::abs(s.cov(2, 0)) < 0.02);
}

TEST_CASE("law-change scenario swaps a unit normal for a matched uniform") {
    Rng rng(17);
    const Law unif{Law::ScalarUniform, 0.0, Eigen::Vector3d::Zero()};
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < kMonteCarlo; ++i) {
        const double x = sample_law(unif, rng)[0];
        m1 += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m1 /= kMonteCarlo;
    m2 /= kMonteCarlo;
    m4 /= kMonteCarlo;
    const double var = m2 - m1 * m1;
    CHECK(std::abs(var - 1.0) < 0.02);          // moments matched to the unit normal
    const double kurt = m4 / (var * var);
    CHECK(std::abs(kurt - 1.8) < 0.05);         // flat law, far from the normal's 3
}

TEST_CASE("streams are reproducible and change exactly at tau") {
    ScenarioSpec spec = ScenarioSpec::defaults(Scenario::IIb, 2, 5);
    spec.length = 24;
    spec.tau = 12;
    spec.window = 2;
    Rng graph_rng(5);
    const Graph g = scenario_graph(spec, graph_rng);

    Rng r1(9), r2(9);
    const ScenarioInstance a = generate_instance(spec, g, r1);
    const ScenarioInstance b = generate_instance(spec, g, r2);
    REQUIRE(a.stream.size() == 24);
    CHECK(a.affected == b.affected);
    for (std::size_t t = 0; t < a.stream.size(); ++t) CHECK(a.stream[t] == b.stream[t]);

    // The affected set is a connected ball around its seed.
    CHECK(!a.affected.empty());
}

TEST_CASE("detection_delay finds the peak inside the evaluation window") {
    const long tau = 100;
    const int n = 10;
    ScoreSeries series;
    for (long t = 80; t <= 130; ++t) series.push_back(point_at(t, t == tau + n ? 5.0 : 0.1));
    CHECK(detection_delay(series, tau, n) == n);

    // Ties resolve to the earliest time.
    ScoreSeries flat;
    for (long t = 100; t <= 120; ++t) flat.push_back(point_at(t, 1.0));
    CHECK(detection_delay(flat, tau, n) == 0);

    ScoreSeries out_of_window;
    out_of_window.push_back(point_at(10, 1.0));
    CHECK_THROWS_AS(detection_delay(out_of_window, tau, n), data_error);
}

TEST_CASE("run_success requires the global argmax near the change") {
    const long tau = 100;
    const int n = 10;
    ScoreSeries good;
    for (long t = 50; t <= 130; ++t) good.push_back(point_at(t, t == tau + n ? 5.0 : 0.1));
    CHECK(run_success(good, tau, n));

    ScoreSeries bad;
    for (long t = 50; t <= 130; ++t) bad.push_back(point_at(t, t == 60 ? 5.0 : 0.1));
    CHECK_FALSE(run_success(bad, tau, n));
}

TEST_CASE("roc_auc handles separation, ties, and random data") {
    SECTION("perfect separation") {
        Eigen::VectorXd s(6);
        s << 5, 4, 3, 1, 0.5, 0;
        const std::vector<char> y{1, 1, 1, 0, 0, 0};
        auto r = roc_auc(s, y);
        CHECK(r.auc == 1.0);
        CHECK(r.points.front() == std::pair<double, double>{0.0, 0.0});
        CHECK(r.points.back() == std::pair<double, double>{1.0, 1.0});
    }
    SECTION("all-equal scores give one half by rank averaging") {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(8);
        const std::vector<char> y{1, 0, 1, 0, 1, 0, 1, 0};
        CHECK(roc_auc(s, y).auc == 0.5);
    }
    SECTION("matches the pairwise count oracle") {
        Rng rng(23);
        for (int rep = 0; rep < 20; ++rep) {
            const int n = rng.uniform_int(5, 40);
            Eigen::VectorXd s(n);
            std::vector<char> y(n);
            int pos = 0;
            for (int i = 0; i < n; ++i) {
                s[i] = std::round(rng.uniform(0.0, 4.0));  // force ties
                y[i] = rng.uniform() < 0.4 ? 1 : 0;
                pos += y[i];
            }
            if (pos == 0 || pos == n) continue;
            double wins = 0.0;
            long pairs = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (y[i] && !y[j]) {
                        ++pairs;
                        if (s[i] > s[j]) wins += 1.0;
                        else if (s[i] == s[j]) wins += 0.5;
                    }
            CHECK(roc_auc(s, y).auc == Catch::Approx(wins / double(pairs)).epsilon(1e-12));
        }
    }
    SECTION("degenerate labelings are rejected") {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(3);
        CHECK_THROWS_AS(roc_auc(s, std::vector<char>{1, 1, 1}), std::invalid_argument);
        CHECK_THROWS_AS(roc_auc(s, std::vector<char>{0, 0, 0}), std::invalid_argument);
    }
}

TEST_CASE("aggregate reports sample statistics and precision") {
    InstanceMetrics a;
    a.delay = 10;
    a.auc = 0.9;
    a.success = true;
    a.roc.points = {{0.0, 0.0}, {0.0, 0.9}, {1.0, 1.0}};
    InstanceMetrics b = a;
    b.delay = 14;
    b.auc = 1.0;
    b.success = false;

    SECTION("single instance has zero spread") {
        AggregateReport r = aggregate({a});
        CHECK(r.delay_mean == 10.0);
        CHECK(r.delay_std == 0.0);
        CHECK(r.auc_std == 0.0);
        CHECK(r.precision == 1.0);
    }
    SECTION("two instances") {
        AggregateReport r = aggregate({a, b});
        CHECK(r.auc_mean == Catch::Approx(0.95));
        CHECK(r.delay_mean == Catch::Approx(12.0));
        // Sample standard deviation recomputed by hand: sqrt(8) and sqrt(0.005).
        CHECK(r.delay_std == Catch::Approx(std::sqrt(8.0)));
        CHECK(r.auc_std == Catch::Approx(std::sqrt(0.005)));
        CHECK(r.precision == 0.5);
        REQUIRE(r.roc_grid.size() == 51);
        CHECK(r.roc_grid[0][0] == 0.0);
        CHECK(r.roc_grid[0][1] == Catch::Approx(0.9));  // both curves reach 0.9 at fpr 0
        CHECK(r.roc_grid[50][1] == 1.0);
    }
}
