// File formats: edge-list graphs, observation stream CSV, score CSV,
// dictionary and result JSON, plus the config digest used to stamp outputs.
#pragma once

#include <Eigen/Dense>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ockg/divergence.hpp"
#include "ockg/errors.hpp"
#include "ockg/graph.hpp"
#include "ockg/kernel.hpp"
#include "ockg/scenarios.hpp"

namespace ockg {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline std::string version_string() {
#ifdef OCKG_VERSION
    return OCKG_VERSION;
#else
    return "v0.0.0";
#endif
}

// FNV-1a over the canonical (key-sorted) JSON dump.
inline std::string config_digest(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

inline void stamp(json& j, const json& config) {
    j["schema"] = kSchemaVersion;
    j["version"] = version_string();
    j["config_digest"] = config_digest(config);
}

namespace detail {

inline std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open for reading: " + path.string());
    return in;
}

inline std::vector<double> split_csv_row(const std::string& line, const std::string& where) {
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
        try {
            vals.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw data_error("non-numeric field in " + where);
        }
    }
    return vals;
}

}  // namespace detail

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw data_error("bad JSON in " + path.string() + ": " + ex.what());
    }
    return j;
}

// --- graph: one "u v w" line per edge ---

inline void write_graph(const std::filesystem::path& path, const Graph& g) {
    auto out = detail::open_out(path);
    for (const Edge& e : g.edges())
        out << e.u << ' ' << e.v << ' ' << detail::fmt_double(e.w) << '\n';
}

inline Graph read_graph(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::vector<Edge> edges;
    int n = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Edge e;
        if (!(ss >> e.u >> e.v >> e.w)) throw data_error("bad edge line in " + path.string());
        n = std::max(n, std::max(e.u, e.v) + 1);
        edges.push_back(e);
    }
    if (edges.empty()) throw data_error("no edges in " + path.string());
    try {
        return Graph(n, std::move(edges));
    } catch (const std::invalid_argument& ex) {
        throw data_error(std::string("invalid graph in ") + path.string() + ": " + ex.what());
    }
}

// --- observation streams: header "t,node,x0,...", rows sorted by (t, node) ---

inline void write_stream_csv(const std::filesystem::path& path,
                             const std::vector<Eigen::MatrixXd>& stream) {
    if (stream.empty()) throw std::invalid_argument("write_stream_csv: empty stream");
    auto out = detail::open_out(path);
    const Eigen::Index d = stream.front().cols();
    out << "t,node";
    for (Eigen::Index k = 0; k < d; ++k) out << ",x" << k;
    out << '\n';
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const auto& obs = stream[t];
        for (Eigen::Index v = 0; v < obs.rows(); ++v) {
            out << t << ',' << v;
            for (Eigen::Index k = 0; k < d; ++k) out << ',' << detail::fmt_double(obs(v, k));
            out << '\n';
        }
    }
}

inline std::vector<Eigen::MatrixXd> read_stream_csv(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty stream file: " + path.string());
    int d = 0;
    {
        std::stringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ',')) cols.push_back(col);
        if (cols.size() < 3 || cols[0] != "t" || cols[1] != "node")
            throw data_error("bad stream header in " + path.string());
        d = static_cast<int>(cols.size()) - 2;
    }
    struct Row {
        long t;
        int v;
        Eigen::VectorXd x;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto vals = detail::split_csv_row(line, path.string());
        if (static_cast<int>(vals.size()) != d + 2)
            throw data_error("bad stream row width in " + path.string());
        Row r{static_cast<long>(vals[0]), static_cast<int>(vals[1]), Eigen::VectorXd(d)};
        for (int k = 0; k < d; ++k) r.x[k] = vals[k + 2];
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw data_error("stream has no data rows: " + path.string());
    int n_nodes = 0;
    for (const auto& r : rows) n_nodes = std::max(n_nodes, r.v + 1);
    if (rows.size() % n_nodes != 0)
        throw data_error("stream is missing node rows: " + path.string());
    const long t_len = static_cast<long>(rows.size()) / n_nodes;
    std::vector<Eigen::MatrixXd> stream(t_len, Eigen::MatrixXd(n_nodes, d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const long want_t = static_cast<long>(i) / n_nodes;
        const int want_v = static_cast<int>(i % n_nodes);
        if (r.t != want_t || r.v != want_v)
            throw data_error("stream rows must be sorted by (t, node) with no gaps: " +
                             path.string());
        stream[r.t].row(r.v) = r.x.transpose();
    }
    return stream;
}

// --- score series: "t,S,S_0..,PEf_0..,PEb_0.." ---

inline void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& series,
                             int n_nodes) {
    auto out = detail::open_out(path);
    out << "t,S";
    for (int v = 0; v < n_nodes; ++v) out << ",S_" << v;
    for (int v = 0; v < n_nodes; ++v) out << ",PEf_" << v;
    for (int v = 0; v < n_nodes; ++v) out << ",PEb_" << v;
    out << '\n';
    for (const auto& p : series) {
        out << p.time << ',' << detail::fmt_double(p.global);
        for (int v = 0; v < n_nodes; ++v) out << ',' << detail::fmt_double(p.node_scores[v]);
        for (int v = 0; v < n_nodes; ++v) out << ',' << detail::fmt_double(p.pe_forward[v]);
        for (int v = 0; v < n_nodes; ++v) out << ',' << detail::fmt_double(p.pe_backward[v]);
        out << '\n';
    }
}

inline ScoreSeries read_scores_csv(const std::filesystem::path& path, int* n_nodes_out = nullptr) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty score file: " + path.string());
    int n_cols = 1;
    for (char c : line) n_cols += (c == ',') ? 1 : 0;
    if ((n_cols - 2) % 3 != 0 || n_cols < 5)
        throw data_error("bad score header in " + path.string());
    const int n_nodes = (n_cols - 2) / 3;
    if (n_nodes_out) *n_nodes_out = n_nodes;
    ScoreSeries series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto vals = detail::split_csv_row(line, path.string());
        if (static_cast<int>(vals.size()) != n_cols)
            throw data_error("bad score row width in " + path.string());
        ScorePoint p;
        p.time = static_cast<long>(vals[0]);
        p.global = vals[1];
        p.node_scores.resize(n_nodes);
        p.pe_forward.resize(n_nodes);
        p.pe_backward.resize(n_nodes);
        for (int v = 0; v < n_nodes; ++v) {
            p.node_scores[v] = vals[2 + v];
            p.pe_forward[v] = vals[2 + n_nodes + v];
            p.pe_backward[v] = vals[2 + 2 * n_nodes + v];
        }
        series.push_back(std::move(p));
    }
    return series;
}

// --- dictionary JSON ---

inline json dictionary_to_json(const Dictionary& d) {
    json centers = json::array();
    for (int l = 0; l < d.size(); ++l) {
        json row = json::array();
        for (int k = 0; k < d.dim(); ++k) row.push_back(d.centers()(l, k));
        centers.push_back(std::move(row));
    }
    return json{{"sigma", d.sigma()},
                {"mu0", d.mu0()},
                {"capacity", d.capacity()},
                {"centers", std::move(centers)}};
}

inline Dictionary dictionary_from_json(const json& j) {
    try {
        const auto& centers = j.at("centers");
        if (centers.empty()) throw data_error("dictionary JSON has no centers");
        const int dim = static_cast<int>(centers.at(0).size());
        Eigen::MatrixXd pts(centers.size(), dim);
        for (std::size_t l = 0; l < centers.size(); ++l)
            for (int k = 0; k < dim; ++k)
                pts(static_cast<Eigen::Index>(l), k) = centers.at(l).at(k).get<double>();
        return Dictionary::from_centers(pts, j.at("sigma").get<double>(), j.at("mu0").get<double>(),
                                        j.at("capacity").get<int>());
    } catch (const json::exception& ex) {
        throw data_error(std::string("bad dictionary JSON: ") + ex.what());
    }
}

// --- ground truth ---

inline json truth_to_json(long tau, const std::vector<int>& affected) {
    return json{{"schema", kSchemaVersion}, {"tau", tau}, {"C", affected}};
}

// --- scenario specs ---

inline json spec_to_json(const ScenarioSpec& s) {
    json j{{"schema", kSchemaVersion}, {"scenario", scenario_name(s.kind)}, {"tau", s.tau},
           {"length", s.length},       {"n", s.window},                    {"seed", s.seed}};
    if (s.kind == Scenario::Ia || s.kind == Scenario::Ib)
        j["graph"] = {{"model", "sbm"},
                      {"cluster_sizes", s.cluster_sizes},
                      {"p_in", s.p_in},
                      {"p_out", s.p_out}};
    else
        j["graph"] = {{"model", "ba"}, {"nodes", s.ba_nodes}, {"ball_radius", s.ball_radius}};
    return j;
}

inline ScenarioSpec spec_from_json(const json& j) {
    try {
        ScenarioSpec s;
        s.kind = scenario_from_name(j.at("scenario").get<std::string>());
        s.tau = j.at("tau").get<long>();
        s.length = j.at("length").get<long>();
        s.window = j.at("n").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        const auto& g = j.at("graph");
        if (g.at("model") == "sbm") {
            s.cluster_sizes = g.at("cluster_sizes").get<std::vector<int>>();
            s.p_in = g.at("p_in").get<double>();
            s.p_out = g.at("p_out").get<double>();
        } else {
            s.ba_nodes = g.at("nodes").get<int>();
            if (g.contains("ball_radius")) s.ball_radius = g.at("ball_radius").get<int>();
        }
        return s;
    } catch (const json::exception& ex) {
        throw data_error(std::string("bad scenario spec: ") + ex.what());
    }
}

}  // namespace ockg
