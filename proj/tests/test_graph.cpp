#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "ockg/graph.hpp"

using namespace ockg;

TEST_CASE("build_graph computes symmetric degrees") {
    Graph g(2, {{0, 1, 1.0}});
    CHECK(g.degree(0) == 1.0);
    CHECK(g.degree(1) == 1.0);
    CHECK(g.edge_count() == 1);

    Graph tri(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    for (int v = 0; v < 3; ++v) CHECK(tri.degree(v) == 2.0);
    CHECK(tri.mean_degree() == 2.0);
}

TEST_CASE("build_graph rejects malformed input") {
    CHECK_THROWS_AS(Graph(2, {{0, 0, 1.0}}), std::invalid_argument);   // self-loop
    CHECK_THROWS_AS(Graph(2, {{0, 1, 0.0}}), std::invalid_argument);   // non-positive weight
    CHECK_THROWS_AS(Graph(2, {{0, 1, -2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Graph(2, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);  // duplicate
    CHECK_THROWS_AS(Graph(2, {{0, 2, 1.0}}), std::invalid_argument);   // out of range
}

TEST_CASE("laplacian matches its definition") {
    const double w = 2.5;
    Graph g(2, {{0, 1, w}});
    Eigen::MatrixXd lap = g.laplacian();
    CHECK(lap(0, 0) == w);
    CHECK(lap(1, 1) == w);
    CHECK(lap(0, 1) == -w);
    CHECK(lap(1, 0) == -w);

    Graph tri(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    Eigen::MatrixXd lt = tri.laplacian();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(lt(i, j) == (i == j ? 2.0 : -1.0));

    Graph empty(3, {});
    CHECK(empty.laplacian().isZero(0.0));
}

TEST_CASE("laplacian row sums vanish exactly on generated graphs") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Graph ba = sample_barabasi_albert(40, rng);
        CHECK((ba.laplacian() * Eigen::VectorXd::Ones(40)).isZero(0.0));
        Graph sbm = sample_sbm({5, 5}, 0.8, 0.2, rng);
        CHECK((sbm.laplacian() * Eigen::VectorXd::Ones(10)).isZero(0.0));
    }
}

TEST_CASE("laplacian quadratic form matches the weighted edge sum") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(2, 12);
        std::vector<Edge> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.uniform() < 0.4) edges.push_back({u, v, rng.uniform(0.1, 3.0)});
        Graph g(n, edges);
        Eigen::MatrixXd lap = g.laplacian();
        CHECK((lap * Eigen::VectorXd::Ones(n)).isZero(1e-12));

        Eigen::VectorXd x = rng.normal_vector(n);
        double quad = x.dot(lap * x);
        double edge_sum = 0.0;
        for (const Edge& e : g.edges()) edge_sum += e.w * (x[e.u] - x[e.v]) * (x[e.u] - x[e.v]);
        CHECK(quad == Catch::Approx(edge_sum).epsilon(1e-10).margin(1e-12));
    }
}

TEST_CASE("sample_sbm honors the block structure") {
    SECTION("degenerate disconnected limit is rejected") {
        Rng rng(1);
        CHECK_THROWS_AS(sample_sbm({3, 3}, 1.0, 0.0, rng), numeric_error);
        Rng rng2(2);
        CHECK_THROWS_AS(sample_sbm({3, 3}, 0.0, 0.0, rng2), numeric_error);
    }

    SECTION("intra-cluster edge count matches the binomial mean") {
        // Monte-Carlo oracle: mean intra edges per 20-cluster should be
        // p_in * C(20,2) = 95 within +-3 over 1000 draws.
        Rng rng(42);
        const std::vector<int> sizes{20, 20, 20, 20};
        double total = 0.0;
        long samples = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            Graph g = sample_sbm(sizes, 0.5, 0.01, rng);
            for (int c = 0; c < 4; ++c) {
                const auto members = cluster_members(sizes, c);
                const std::set<int> in(members.begin(), members.end());
                long count = 0;
                for (const Edge& e : g.edges())
                    if (in.count(e.u) && in.count(e.v)) ++count;
                total += double(count);
                ++samples;
            }
        }
        const double mean = total / double(samples);
        CHECK(mean > 92.0);
        CHECK(mean < 98.0);
    }

    SECTION("empty cluster list is rejected") {
        Rng rng(3);
        CHECK_THROWS_AS(sample_sbm({}, 0.5, 0.5, rng), std::invalid_argument);
    }
}

TEST_CASE("sample_barabasi_albert yields connected trees") {
    Rng rng(5);
    Graph g2 = sample_barabasi_albert(2, rng);
    CHECK(g2.edge_count() == 1);
    CHECK(g2.degree(0) == 1.0);

    for (int rep = 0; rep < 10; ++rep) {
        Graph g = sample_barabasi_albert(100, rng);
        CHECK(g.edge_count() == 99);
        CHECK(g.connected());
    }
    CHECK_THROWS_AS(sample_barabasi_albert(1, rng), std::invalid_argument);
}

TEST_CASE("sample_barabasi_albert produces heavy-tailed degrees") {
    Rng rng(99);
    int exceed = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Graph g = sample_barabasi_albert(100, rng);
        double dmax = 0.0;
        for (int v = 0; v < 100; ++v) dmax = std::max(dmax, g.degree(v));
        if (dmax > 10.0) ++exceed;
    }
    CHECK(exceed >= 90);
}

TEST_CASE("generators are deterministic under a fixed seed") {
    Rng a(123), b(123);
    Graph ga = sample_barabasi_albert(50, a);
    Graph gb = sample_barabasi_albert(50, b);
    REQUIRE(ga.edge_count() == gb.edge_count());
    for (std::size_t i = 0; i < ga.edges().size(); ++i) {
        CHECK(ga.edges()[i].u == gb.edges()[i].u);
        CHECK(ga.edges()[i].v == gb.edges()[i].v);
    }

    Rng c(123), d(123);
    const std::vector<int> sizes{4, 4};
    Graph gc = sample_sbm(sizes, 0.9, 0.2, c);
    Graph gd = sample_sbm(sizes, 0.9, 0.2, d);
    REQUIRE(gc.edge_count() == gd.edge_count());
}

TEST_CASE("select_affected_cluster returns whole clusters") {
    Rng rng(11);
    const std::vector<int> one{5};
    CHECK(select_affected_cluster(one, rng) == std::vector<int>{0, 1, 2, 3, 4});

    const std::vector<int> sizes{20, 20, 20, 20};
    const auto c = select_affected_cluster(sizes, rng);
    CHECK(c.size() == 20);

    Rng r1(77), r2(77);
    CHECK(select_affected_cluster(sizes, r1) == select_affected_cluster(sizes, r2));
}

TEST_CASE("affected balls follow hop distance") {
    // Star: center 0 with 5 leaves.
    Graph star(6, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {0, 5, 1}});
    CHECK(ball_around(star, 0, 1).size() == 6);

    Graph path(6, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}});
    CHECK(ball_around(path, 0, 4) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("ball seeds are drawn proportionally to degree") {
    // Star with 5 leaves: center holds half the total degree.
    Graph star(6, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {0, 5, 1}});
    Rng rng(2024);
    int center = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (sample_node_by_degree(star, rng) == 0) ++center;
    const double freq = double(center) / draws;
    CHECK(freq > 0.47);
    CHECK(freq < 0.53);
}
