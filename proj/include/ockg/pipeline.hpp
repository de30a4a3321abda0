// End-to-end pipelines shared by the command-line tool and the test
// harness: calibration and per-direction tuning on a change-free prefix,
// full detector runs, and the Monte-Carlo reproduction driver.
#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ockg/detector.hpp"
#include "ockg/evaluation.hpp"
#include "ockg/io.hpp"
#include "ockg/scenarios.hpp"
#include "ockg/tuning.hpp"

namespace ockg {

// Seed sub-stream ids shared by the generation and reproduction paths, so
// a standalone `generate` emits the same bytes as the full driver.
namespace seeds {
inline constexpr std::uint64_t kGraph = 11;
inline std::uint64_t instance(int i) { return 100 + std::uint64_t(i); }
inline std::uint64_t tuning(bool pool, int i) { return (pool ? 300 : 200) + std::uint64_t(i); }
}  // namespace seeds

struct RunSettings {
    int window = 2;  // n
    double alpha = 0.1;
    int stride = 1;
    double tol = 0.0;
    int max_cycles = 0;
    double mu0 = 0.1;
    int capacity = 50;
    int folds = 5;
    double eta = std::numeric_limits<double>::infinity();
    double eta_node = std::numeric_limits<double>::infinity();
    bool pool = false;  // drop all edges: independent per-node estimation
    bool crop = false;  // score only inside [tau-2n, tau+2n]

    json to_json() const {
        return json{{"n", window},     {"alpha", alpha},       {"stride", stride},
                    {"tol", tol},      {"max_cycles", max_cycles}, {"mu0", mu0},
                    {"capacity", capacity}, {"folds", folds},   {"pool", pool},
                    {"crop", crop}};
    }
};

struct TunedDirection {
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    Dictionary dict;
    TuneResult detail;
};

struct Tuning {
    GridSpec grids;
    TunedDirection forward;
    TunedDirection backward;
};

namespace detail {

// Node-major calibration blocks: rows [t0, t0+len) of each node's stream.
inline std::vector<Eigen::MatrixXd> node_blocks(const std::vector<Eigen::MatrixXd>& stream,
                                                long t0, long len) {
    const int n_nodes = static_cast<int>(stream.at(0).rows());
    const int d = static_cast<int>(stream.at(0).cols());
    std::vector<Eigen::MatrixXd> blocks(n_nodes, Eigen::MatrixXd(len, d));
    for (long t = 0; t < len; ++t)
        for (int v = 0; v < n_nodes; ++v) blocks[v].row(t) = stream[t0 + t].row(v);
    return blocks;
}

}  // namespace detail

// Tunes both divergence directions on the first 2n observations of the
// stream (the caller guarantees this prefix is change-free). The shared
// dictionary is built from the same prefix with the middle bandwidth of
// the grid; each direction then keeps a copy at its tuned bandwidth.
inline Tuning tune_from_stream(const std::vector<Eigen::MatrixXd>& stream, const Graph& g,
                               const RunSettings& s, std::uint64_t seed) {
    if (static_cast<long>(stream.size()) < 2 * s.window)
        throw data_error("tune_from_stream: stream shorter than the 2n calibration prefix");
    const int n_nodes = static_cast<int>(stream.at(0).rows());
    if (n_nodes != g.node_count()) throw data_error("tune_from_stream: stream/graph node mismatch");
    const int d = static_cast<int>(stream.at(0).cols());

    const auto calib = detail::node_blocks(stream, 0, 2 * s.window);
    const auto ref = detail::node_blocks(stream, 0, s.window);
    const auto test = detail::node_blocks(stream, s.window, s.window);

    const GridSpec grids = build_grids(calib, g, s.folds);

    Eigen::MatrixXd pool_points(2 * s.window * n_nodes, d);
    {
        Eigen::Index r = 0;
        for (long t = 0; t < 2 * s.window; ++t)
            for (int v = 0; v < n_nodes; ++v) pool_points.row(r++) = stream[t].row(v);
    }
    const double sigma_init = grids.sigmas[grids.sigmas.size() / 2];
    const Dictionary dict = Dictionary::from_points(pool_points, sigma_init, s.mu0, s.capacity);

    Rng rng_fwd(derive_seed(seed, 1));
    Rng rng_bwd(derive_seed(seed, 2));
    TuneResult fwd = tune(ref, test, g, dict, grids, s.alpha, rng_fwd, s.tol, s.max_cycles);
    TuneResult bwd = tune(test, ref, g, dict, grids, s.alpha, rng_bwd, s.tol, s.max_cycles);

    auto pack = [&](TuneResult&& r) {
        Dictionary dcopy = dict;
        dcopy.set_sigma(r.sigma);
        return TunedDirection{r.sigma, r.lambda, r.gamma, std::move(dcopy), std::move(r)};
    };
    return Tuning{grids, pack(std::move(fwd)), pack(std::move(bwd))};
}

inline json tuning_to_json(const Tuning& tn, const RunSettings& s) {
    auto dir_json = [](const TunedDirection& d) {
        json entries = json::array();
        for (const auto& p : d.detail.table)
            entries.push_back(json{{"sigma", p.sigma},
                                   {"lambda", p.lambda},
                                   {"gamma", p.gamma},
                                   {"fold_losses", p.fold_losses},
                                   {"mean_loss", p.mean_loss}});
        return json{{"selected", {{"sigma", d.sigma}, {"lambda", d.lambda}, {"gamma", d.gamma}}},
                    {"entries", std::move(entries)},
                    {"dictionary", dictionary_to_json(d.dict)}};
    };
    json j{{"alpha", s.alpha},
           {"n", s.window},
           {"folds", s.folds},
           {"grids",
            {{"sigmas", tn.grids.sigmas}, {"lambdas", tn.grids.lambdas}, {"gammas", tn.grids.gammas}}},
           {"forward", dir_json(tn.forward)},
           {"backward", dir_json(tn.backward)}};
    stamp(j, s.to_json());
    return j;
}

inline Tuning tuning_from_json(const json& j) {
    auto dir_from = [](const json& dj) {
        TunedDirection d{dj.at("selected").at("sigma").get<double>(),
                         dj.at("selected").at("lambda").get<double>(),
                         dj.at("selected").at("gamma").get<double>(),
                         dictionary_from_json(dj.at("dictionary")),
                         {}};
        d.detail.sigma = d.sigma;
        d.detail.lambda = d.lambda;
        d.detail.gamma = d.gamma;
        return d;
    };
    try {
        Tuning tn{GridSpec{}, dir_from(j.at("forward")), dir_from(j.at("backward"))};
        tn.grids.sigmas = j.at("grids").at("sigmas").get<std::vector<double>>();
        tn.grids.lambdas = j.at("grids").at("lambdas").get<std::vector<double>>();
        tn.grids.gammas = j.at("grids").at("gammas").get<std::vector<double>>();
        tn.grids.folds = j.at("folds").get<int>();
        return tn;
    } catch (const json::exception& ex) {
        throw data_error(std::string("bad tuning report: ") + ex.what());
    }
}

// Runs the detector over the full stream. With `crop`, scoring is limited
// to [tau-2n, tau+2n]; tau must then be supplied.
inline DetectionResult run_detector(const std::vector<Eigen::MatrixXd>& stream, const Graph& g,
                                    const Tuning& tn, const RunSettings& s,
                                    std::optional<long> tau = std::nullopt) {
    DetectorOptions opt;
    opt.window = s.window;
    opt.stride = s.stride;
    opt.tol = s.tol;
    opt.max_cycles = s.max_cycles;
    opt.eta = s.eta;
    opt.eta_node = s.eta_node;
    if (s.crop) {
        if (!tau) throw data_error("run_detector: crop requested without a change time");
        opt.score_window = std::make_pair(*tau - 2 * long(s.window), *tau + 2 * long(s.window));
    }
    const Graph run_graph = s.pool ? g.edgeless_copy() : g;
    Detector det(run_graph, opt,
                 DirectionConfig{s.alpha, tn.forward.sigma, tn.forward.lambda, tn.forward.gamma,
                                 tn.forward.dict},
                 DirectionConfig{s.alpha, tn.backward.sigma, tn.backward.lambda,
                                 tn.backward.gamma, tn.backward.dict});
    return det.run(stream);
}

inline json detection_to_json(const DetectionResult& res, const json& config) {
    json j{{"tau_hat", nullptr}, {"affected", res.affected},
           {"score_points", res.series.size()}, {"nonconverged_points", res.nonconverged_points}};
    if (res.tau_hat) j["tau_hat"] = *res.tau_hat;
    stamp(j, config);
    return j;
}

// --- Monte-Carlo reproduction driver ---

struct ReproConfig {
    Scenario experiment = Scenario::IIa;
    RunSettings settings;      // `pool` ignored; both variants always run
    int instances = 10;
    std::uint64_t seed = 0;
    int jobs = 0;              // 0 -> hardware concurrency
    bool null_run = false;     // generate change-free streams instead
    bool with_pool = true;
    std::string out_dir;       // empty -> keep everything in memory

    json to_json() const {
        json j = settings.to_json();
        j["experiment"] = scenario_name(experiment);
        j["instances"] = instances;
        j["seed"] = seed;
        j["null_run"] = null_run;
        j["with_pool"] = with_pool;
        return j;
    }
};

namespace detail {

inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline std::string index_tag(int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", i);
    return buf;
}

}  // namespace detail

struct ReproInstance {
    InstanceMetrics ockg;
    InstanceMetrics pool;
    double null_median_global = 0.0;  // null runs only
    double null_max_global = 0.0;
};

struct ReproOutcome {
    json report;
    std::vector<ReproInstance> per_instance;
};

inline ReproOutcome run_repro(const ReproConfig& cfg) {
    ScenarioSpec spec = ScenarioSpec::defaults(cfg.experiment, cfg.settings.window, cfg.seed);
    const long eval_tau = spec.tau;  // crop anchor, also for null runs
    if (cfg.null_run) spec.tau = spec.length;
    spec.validate();

    Rng graph_rng(derive_seed(cfg.seed, seeds::kGraph));
    const Graph graph = scenario_graph(spec, graph_rng);

    const bool writing = !cfg.out_dir.empty();
    namespace fs = std::filesystem;
    if (writing) {
        fs::create_directories(cfg.out_dir);
        write_graph(fs::path(cfg.out_dir) / "graph.txt", graph);
        json sidecar{{"schema", kSchemaVersion}, {"n", graph.node_count()}};
        if (cfg.experiment == Scenario::Ia || cfg.experiment == Scenario::Ib)
            sidecar["clusters"] = spec.cluster_sizes;
        write_json(fs::path(cfg.out_dir) / "graph.json", sidecar);
    }

    std::vector<ReproInstance> results(cfg.instances);
    detail::parallel_for(cfg.instances, cfg.jobs, [&](int i) {
        Rng gen(derive_seed(cfg.seed, seeds::instance(i)));
        const ScenarioInstance inst = generate_instance(spec, graph, gen);

        auto run_variant = [&](bool pool) {
            RunSettings s = cfg.settings;
            s.pool = pool;
            const Graph tune_graph = pool ? graph.edgeless_copy() : graph;
            const Tuning tn =
                tune_from_stream(inst.stream, tune_graph, s, derive_seed(cfg.seed, seeds::tuning(pool, i)));
            const DetectionResult det = run_detector(inst.stream, graph, tn, s, eval_tau);
            if (writing) {
                const std::string tag = detail::index_tag(i);
                const std::string kind = pool ? "pool" : "ockg";
                write_json(fs::path(cfg.out_dir) / ("tuning_" + kind + "_" + tag + ".json"),
                           tuning_to_json(tn, s));
                write_scores_csv(fs::path(cfg.out_dir) / ("scores_" + kind + "_" + tag + ".csv"),
                                 det.series, graph.node_count());
                write_json(fs::path(cfg.out_dir) / ("result_" + kind + "_" + tag + ".json"),
                           detection_to_json(det, cfg.to_json()));
            }
            return det;
        };

        if (writing) {
            const std::string tag = detail::index_tag(i);
            write_stream_csv(fs::path(cfg.out_dir) / ("stream_" + tag + ".csv"), inst.stream);
            write_json(fs::path(cfg.out_dir) / ("truth_" + tag + ".json"),
                       truth_to_json(cfg.null_run ? -1 : spec.tau, inst.affected));
        }

        const DetectionResult det_ockg = run_variant(false);
        if (cfg.null_run) {
            std::vector<double> globals;
            for (const auto& p : det_ockg.series) globals.push_back(p.global);
            std::sort(globals.begin(), globals.end());
            if (!globals.empty()) {
                results[i].null_median_global = globals[globals.size() / 2];
                results[i].null_max_global = globals.back();
            }
        } else {
            results[i].ockg = evaluate_instance(det_ockg.series, inst.affected,
                                                graph.node_count(), spec.tau, cfg.settings.window);
            if (cfg.with_pool) {
                const DetectionResult det_pool = run_variant(true);
                results[i].pool = evaluate_instance(det_pool.series, inst.affected,
                                                    graph.node_count(), spec.tau,
                                                    cfg.settings.window);
            }
        }
    });

    json report;
    stamp(report, cfg.to_json());
    report["experiment"] = scenario_name(cfg.experiment);
    report["instances"] = cfg.instances;
    report["seed"] = cfg.seed;
    report["graph_nodes"] = graph.node_count();
    report["graph_edges"] = graph.edge_count();
    report["tau"] = cfg.null_run ? json(nullptr) : json(spec.tau);
    report["length"] = spec.length;

    auto agg_json = [](const AggregateReport& a) {
        return json{{"delay_mean", a.delay_mean},   {"delay_std", a.delay_std},
                    {"auc_mean", a.auc_mean},       {"auc_std", a.auc_std},
                    {"precision", a.precision},     {"instances", a.instances}};
    };
    auto inst_json = [](const InstanceMetrics& m) {
        return json{{"delay", m.delay},         {"auc", m.auc},
                    {"success", m.success},     {"peak_time", m.peak_time},
                    {"peak_score", m.peak_score}};
    };

    if (cfg.null_run) {
        json rows = json::array();
        for (const auto& r : results)
            rows.push_back(json{{"median_global", r.null_median_global},
                                {"max_global", r.null_max_global}});
        report["null"] = {{"instances", std::move(rows)}};
    } else {
        std::vector<InstanceMetrics> mo, mp;
        for (const auto& r : results) {
            mo.push_back(r.ockg);
            if (cfg.with_pool) mp.push_back(r.pool);
        }
        json ockg_rows = json::array();
        for (const auto& m : mo) ockg_rows.push_back(inst_json(m));
        report["ockg"] = {{"aggregate", agg_json(aggregate(mo))}, {"instances", std::move(ockg_rows)}};
        if (cfg.with_pool) {
            json pool_rows = json::array();
            for (const auto& m : mp) pool_rows.push_back(inst_json(m));
            report["pool"] = {{"aggregate", agg_json(aggregate(mp))},
                              {"instances", std::move(pool_rows)}};
        }
    }

    if (writing) {
        write_json(std::filesystem::path(cfg.out_dir) / "report.json", report);
        if (!cfg.null_run) {
            std::vector<InstanceMetrics> mo;
            for (const auto& r : results) mo.push_back(r.ockg);
            const AggregateReport agg = aggregate(mo);
            auto out = detail::open_out(std::filesystem::path(cfg.out_dir) / "roc_ockg.csv");
            out << "fpr,tpr_mean,tpr_std\n";
            for (const auto& row : agg.roc_grid)
                out << detail::fmt_double(row[0]) << ',' << detail::fmt_double(row[1]) << ','
                    << detail::fmt_double(row[2]) << '\n';
        }
    }
    return ReproOutcome{std::move(report), std::move(results)};
}

}  // namespace ockg
