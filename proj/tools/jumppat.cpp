// Command-line front end for the jump-channel statistics library. Every
// command is a pure function of its configuration and seed; outputs are CSV,
// DOT and JSON files written into the --out directory.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "jumppat/clustering.hpp"
#include "jumppat/run_config.hpp"
#include "jumppat/statistics.hpp"

namespace fs = std::filesystem;
using namespace jumppat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCap = 4;

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

void require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("stochastic commands require --seed");
}

std::string symbols_to_text(const ChannelProcess<Complex>& p, const std::vector<int>& symbols) {
    std::string text;
    for (int s : symbols) text += p.symbols[static_cast<std::size_t>(s)];
    return text;
}

// ---- stats ------------------------------------------------------------------

int cmd_stats(const RunConfig& cfg) {
    if (cfg.mode != "float") throw ConfigError("stats runs in float mode");
    ChannelProcess<Complex> p = build_channel_process(build_model<Complex>(cfg.model), cfg.tol);
    fs::path dir = out_dir(cfg);

    std::string single = "symbol,probability\n";
    for (std::size_t k = 0; k < p.symbols.size(); ++k)
        single += p.symbols[k] + "," +
                  format_csv_double(single_outcome(p, static_cast<int>(k))) + "\n";
    write_text_file(dir / "single_outcome.csv", single);

    for (int order = 1; order <= cfg.order; ++order) {
        JointDistribution dist = full_distribution(p, order, cfg.cap, cfg.threads);
        std::ostringstream os;
        write_distribution_csv(os, dist);
        write_text_file(dir / ("distribution_" + std::to_string(order) + ".csv"), os.str());
    }

    std::string summary;
    summary += "activity," + format_csv_double(p.activity) + "\n";
    if (cfg.model.chain) {
        // particle current through the chain, gamma * P(E)
        double gamma = parse_rational(cfg.model.gamma).get_d();
        summary += "current," + format_csv_double(gamma * single_outcome(p, "E")) + "\n";
    }

    std::string two = "k1,kN,N,direct,spectral,abs_diff\n";
    std::string spectral_note;
    try {
        SpectralTwoPoint spectral(p);
        for (int order = 2; order <= cfg.mi_max; ++order)
            for (std::size_t a = 0; a < p.symbols.size(); ++a)
                for (std::size_t b = 0; b < p.symbols.size(); ++b) {
                    double direct = two_point(p, static_cast<int>(a), static_cast<int>(b), order);
                    double via_spec =
                        spectral.probability(static_cast<int>(a), static_cast<int>(b), order);
                    two += p.symbols[a] + "," + p.symbols[b] + "," + std::to_string(order) + "," +
                           format_csv_double(direct) + "," + format_csv_double(via_spec) + "," +
                           format_csv_double(std::abs(direct - via_spec)) + "\n";
                }
    } catch (const NumericError& e) {
        spectral_note = e.what();
        for (int order = 2; order <= cfg.mi_max; ++order)
            for (std::size_t a = 0; a < p.symbols.size(); ++a)
                for (std::size_t b = 0; b < p.symbols.size(); ++b) {
                    double direct = two_point(p, static_cast<int>(a), static_cast<int>(b), order);
                    two += p.symbols[a] + "," + p.symbols[b] + "," + std::to_string(order) + "," +
                           format_csv_double(direct) + ",,\n";
                }
    }
    write_text_file(dir / "two_point.csv", two);
    if (!spectral_note.empty()) summary += "spectral_route,unavailable: " + spectral_note + "\n";

    std::string mi = "N,mutual_information_nats\n";
    for (int order = 2; order <= cfg.mi_max; ++order)
        mi += std::to_string(order) + "," + format_csv_double(mutual_information(p, order)) + "\n";
    write_text_file(dir / "mi.csv", mi);
    write_text_file(dir / "summary.txt", summary);
    return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.mode != "float") throw ConfigError("simulate runs in float mode");
    require_seed(cfg);
    ChannelProcess<Complex> p = build_channel_process(build_model<Complex>(cfg.model), cfg.tol);
    fs::path dir = out_dir(cfg);

    std::optional<CMatrix> initial;
    if (cfg.initial) initial = load_matrix<Complex>(*cfg.initial);

    auto records = simulate_ensemble(p, cfg.trajectories, cfg.steps, *cfg.seed, cfg.burn_in,
                                     initial ? &*initial : nullptr, cfg.dump_states, cfg.threads);
    std::string lines;
    for (const auto& rec : records) lines += symbols_to_text(p, rec.symbols) + "\n";
    write_text_file(dir / "trajectories.txt", lines);

    if (cfg.dump_states) {
        for (std::size_t i = 0; i < records.size(); ++i)
            for (std::size_t t = 0; t < records[i].states.size(); ++t)
                save_matrix(dir / ("state_t" + std::to_string(i) + "_s" + std::to_string(t) +
                                   ".json"),
                            records[i].states[t]);
    }
    return kExitOk;
}

// ---- patterns ---------------------------------------------------------------

int cmd_patterns(const RunConfig& cfg) {
    if (cfg.mode != "exact")
        throw ConfigError("patterns requires exact mode (--mode exact)");
    require_seed(cfg);
    ChannelProcess<ExactComplex> p =
        build_channel_process(build_model<ExactComplex>(cfg.model), cfg.tol);
    fs::path dir = out_dir(cfg);

    ClassifyOptions opts;
    opts.detect.max_steps = cfg.pattern_steps;
    opts.detect.trajectories = cfg.pattern_trajectories;
    opts.detect.seed = *cfg.seed;
    opts.detect.denom_bit_cap = cfg.denom_bit_cap;
    opts.detect.approx_labels = cfg.approx_labels;
    opts.detect.tol_match = cfg.tol.tol_match;
    opts.detect.threads = cfg.threads;
    opts.close.max_states = cfg.max_states;
    opts.close.denom_bit_cap = cfg.denom_bit_cap;
    opts.recur_fraction = cfg.recur_fraction;

    ClassificationReport report = classify_recurrence(p, opts);

    std::string text;
    text += "classification: " + std::string(to_string(report.kind)) + "\n";
    text += "renewal: " + std::string(report.renewal.renewal ? "true" : "false") + "\n";
    text += "revisit_fraction: " + format_csv_double(report.revisit_fraction) + "\n";
    text += "distinct_states: " + std::to_string(report.evidence.merged.size()) + "\n";
    if (!report.graph.nodes.empty()) {
        text += "graph_nodes: " + std::to_string(report.graph.nodes.size()) + "\n";
        text += "graph_edges: " + std::to_string(report.graph.edges.size()) + "\n";
    }
    if (report.closure && !report.closure->failure.empty())
        text += "closure_failure: " + report.closure->failure + "\n";
    write_text_file(dir / "classification.txt", text);
    std::cout << text;

    for (std::size_t i = 0; i < report.evidence.trajectories.size(); ++i) {
        const TrajectoryLabels& traj = report.evidence.trajectories[i];
        std::string csv = "step,label\n";
        for (std::size_t t = 0; t < traj.labels.size(); ++t)
            csv += std::to_string(t) + "," + std::to_string(traj.labels[t]) + "\n";
        write_text_file(dir / ("labels_t" + std::to_string(i) + ".csv"), csv);
        if (cfg.approx_labels) {
            std::string acsv = "step,label\n";
            for (std::size_t t = 0; t < traj.approx_labels.size(); ++t)
                acsv += std::to_string(t) + "," + std::to_string(traj.approx_labels[t]) + "\n";
            write_text_file(dir / ("approx_labels_t" + std::to_string(i) + ".csv"), acsv);
        }
    }

    if (!report.graph.nodes.empty())
        write_text_file(dir / "pattern.dot", export_graph(report.graph));
    return kExitOk;
}

// ---- cluster ----------------------------------------------------------------

int cmd_cluster(const RunConfig& cfg) {
    if (cfg.mode != "float") throw ConfigError("cluster runs in float mode");
    require_seed(cfg);
    ChannelProcess<Complex> p = build_channel_process(build_model<Complex>(cfg.model), cfg.tol);
    fs::path dir = out_dir(cfg);

    auto records = std::vector<TrajectoryRecord<Complex>>{
        simulate(p, cfg.samples, *cfg.seed, cfg.cluster_burn_in)};
    auto [samples, transitions] = collect_samples(records);

    ClusterOptions opts;
    opts.metric = cfg.metric == "trace" ? ClusterMetric::trace : ClusterMetric::probability;
    opts.cap = cfg.cap;
    opts.threads = cfg.threads;
    ClusterAnalysis analysis(p, samples, cfg.horizon, opts);

    std::string quality = "n_clusters,max_intra_distance\n";
    for (int nc : cfg.n_clusters) {
        ClusterModel model = analysis.cut(nc);
        quality += std::to_string(nc) + "," + format_csv_double(model.max_intra()) + "\n";

        std::string assign = "state_index,cluster_id\n";
        for (std::size_t i = 0; i < model.assignment.size(); ++i)
            assign += std::to_string(i) + "," + std::to_string(model.assignment[i]) + "\n";
        write_text_file(dir / ("assignment_nc" + std::to_string(nc) + ".csv"), assign);

        std::string dist = "cluster";
        for (int c = 1; c <= nc; ++c) dist += "," + std::to_string(c);
        dist += "\n";
        for (int a = 1; a <= nc; ++a) {
            dist += std::to_string(a);
            for (int b = 1; b <= nc; ++b)
                dist += "," + format_csv_double(model.distance_between(a, b));
            dist += "\n";
        }
        write_text_file(dir / ("distance_nc" + std::to_string(nc) + ".csv"), dist);

        PatternGraph graph = cluster_graph(model, transitions, p.symbols, cfg.weight_min);
        write_text_file(dir / ("graph_nc" + std::to_string(nc) + ".dot"), export_graph(graph));
    }
    write_text_file(dir / "quality.csv", quality);
    return kExitOk;
}

// ---- likelihood -------------------------------------------------------------

int cmd_likelihood(const RunConfig& cfg) {
    if (cfg.sequence.empty()) throw ConfigError("likelihood requires a nonempty --string");
    std::vector<ModelConfig> candidates = cfg.candidates;
    if (candidates.empty()) candidates.push_back(cfg.model);

    struct Row {
        std::string name;
        double value;
        bool impossible;
    };
    std::vector<Row> rows;
    for (const auto& mc : candidates) {
        ChannelProcess<Complex> p = build_channel_process(build_model<Complex>(mc), cfg.tol);
        std::vector<int> seq = parse_symbols(p, cfg.sequence);
        LogLikelihood ll = log_likelihood(p, seq);
        rows.push_back({mc.display_name(), ll.value, ll.impossible});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.name < b.name;
    });

    std::string csv = "model,log_likelihood,impossible\n";
    for (const auto& row : rows) {
        std::string value = row.impossible ? "-inf" : format_csv_double(row.value);
        csv += row.name + "," + value + "," + (row.impossible ? "true" : "false") + "\n";
        std::cout << row.name << ": "
                  << (row.impossible ? std::string("impossible") : format_csv_double(row.value))
                  << "\n";
    }
    write_text_file(out_dir(cfg) / "likelihood.csv", csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jump-channel statistics of continuously monitored open quantum systems"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;

    // shared model/run flags; command-line values override the config file
    std::string chain;
    int length = 0;
    std::string gamma, kappa, hopping;
    std::string mode, out, metric, sequence, nc_list, initial;
    std::uint64_t seed = 0;
    bool have_seed = false;
    int threads = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--chain", chain, "builtin chain family: xx or xy");
        sub->add_option("--L,--length", length, "chain length");
        sub->add_option("--gamma", gamma, "injection/extraction rate (rational or decimal)");
        sub->add_option("--kappa", kappa, "pairing amplitude (xy chains)");
        sub->add_option("--hopping", hopping, "hopping amplitude");
        sub->add_option("--mode", mode, "scalar field: float or exact");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--threads", threads, "worker threads (JUMPPAT_THREADS as fallback)");
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t& v) {
                seed = v;
                have_seed = true;
            },
            "random seed (required for stochastic commands)");
    };

    CLI::App* stats = app.add_subcommand("stats", "distributions, two-point laws, mutual information");
    add_common(stats);
    int order = 0, mi_max = 0;
    stats->add_option("--order", order, "maximum joint-distribution order");
    stats->add_option("--mi-max", mi_max, "largest N for the two-point and MI sweeps");

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "stochastic post-click trajectories");
    add_common(simulate_cmd);
    std::size_t steps = 0, burn_in_flag = 0;
    int trajectories = 0;
    bool dump_states = false, have_burn_in = false;
    simulate_cmd->add_option("--steps", steps, "clicks per trajectory");
    simulate_cmd->add_option_function<std::size_t>(
        "--burn-in",
        [&](const std::size_t& v) {
            burn_in_flag = v;
            have_burn_in = true;
        },
        "clicks discarded before recording");
    simulate_cmd->add_option("--trajectories", trajectories, "ensemble size");
    simulate_cmd->add_flag("--dump-states", dump_states, "write post-click states as JSON");
    simulate_cmd->add_option("--initial", initial, "initial state file (interchange format)");

    CLI::App* patterns_cmd = app.add_subcommand("patterns", "exact pattern detection and closure");
    add_common(patterns_cmd);
    std::size_t pattern_steps = 0, max_states = 0, bit_cap = 0;
    int pattern_traj = 0;
    bool approx_labels = false;
    double tol_match = 0;
    patterns_cmd->add_option("--steps", pattern_steps, "clicks per detection trajectory");
    patterns_cmd->add_option("--trajectories", pattern_traj, "detection trajectories");
    patterns_cmd->add_option("--max-states", max_states, "closure state budget");
    patterns_cmd->add_option("--bit-cap", bit_cap, "denominator bit budget");
    patterns_cmd->add_flag("--approx-labels", approx_labels,
                           "also label the same trajectories with tolerance matching");
    patterns_cmd->add_option("--tol-match", tol_match, "trace-distance radius for approx labels");

    CLI::App* cluster_cmd = app.add_subcommand("cluster", "approximate patterns by future signatures");
    add_common(cluster_cmd);
    int horizon = 0;
    std::size_t samples = 0, cluster_burn_in = 0;
    bool have_cluster_burn_in = false;
    double weight_min = -1;
    cluster_cmd->add_option("--horizon", horizon, "signature horizon n");
    cluster_cmd->add_option("--samples", samples, "post-burn-in samples");
    cluster_cmd->add_option_function<std::size_t>(
        "--burn-in",
        [&](const std::size_t& v) {
            cluster_burn_in = v;
            have_cluster_burn_in = true;
        },
        "clicks discarded before sampling");
    cluster_cmd->add_option("--nc", nc_list, "comma-separated cluster counts, e.g. 12,32");
    cluster_cmd->add_option("--metric", metric, "probability or trace");
    cluster_cmd->add_option("--weight-min", weight_min, "prune cluster-graph edges below this");

    CLI::App* likelihood_cmd = app.add_subcommand("likelihood", "score a click string under models");
    add_common(likelihood_cmd);
    likelihood_cmd->add_option("--string", sequence, "click string, symbols concatenated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (!config_path.empty()) cfg = load_config(config_path);

        // flag overrides
        if (!chain.empty()) {
            cfg.model.chain = chain;
            if (cfg.model.chain != "xx" && cfg.model.chain != "xy")
                throw ConfigError("chain must be 'xx' or 'xy'");
        }
        if (length > 0) cfg.model.length = length;
        if (!gamma.empty()) cfg.model.gamma = gamma;
        if (!kappa.empty()) cfg.model.kappa = kappa;
        if (!hopping.empty()) cfg.model.hopping = hopping;
        if (!mode.empty()) cfg.mode = mode;
        if (!out.empty()) cfg.out = out;
        if (threads >= 0) cfg.threads = threads;
        if (have_seed) cfg.seed = seed;
        if (order > 0) cfg.order = order;
        if (mi_max > 0) cfg.mi_max = mi_max;
        if (steps > 0) cfg.steps = steps;
        if (have_burn_in) cfg.burn_in = burn_in_flag;
        if (trajectories > 0) cfg.trajectories = trajectories;
        if (dump_states) cfg.dump_states = true;
        if (!initial.empty()) cfg.initial = initial;
        if (pattern_steps > 0) cfg.pattern_steps = pattern_steps;
        if (pattern_traj > 0) cfg.pattern_trajectories = pattern_traj;
        if (max_states > 0) cfg.max_states = max_states;
        if (bit_cap > 0) cfg.denom_bit_cap = bit_cap;
        if (approx_labels) cfg.approx_labels = true;
        if (tol_match > 0) cfg.tol.tol_match = tol_match;
        if (horizon > 0) cfg.horizon = horizon;
        if (samples > 0) cfg.samples = samples;
        if (have_cluster_burn_in) cfg.cluster_burn_in = cluster_burn_in;
        if (!metric.empty()) cfg.metric = metric;
        if (weight_min >= 0) cfg.weight_min = weight_min;
        if (!sequence.empty()) cfg.sequence = sequence;
        if (!nc_list.empty()) {
            cfg.n_clusters.clear();
            std::stringstream ss(nc_list);
            std::string item;
            while (std::getline(ss, item, ',')) cfg.n_clusters.push_back(std::stoi(item));
            if (cfg.n_clusters.empty()) throw ConfigError("empty --nc list");
        }
        if (!cfg.model.chain && cfg.model.jumps.empty() && !cfg.model.hamiltonian)
            throw ConfigError("no model given; use --chain or a config file");

        if (app.got_subcommand(stats)) return cmd_stats(cfg);
        if (app.got_subcommand(simulate_cmd)) return cmd_simulate(cfg);
        if (app.got_subcommand(patterns_cmd)) return cmd_patterns(cfg);
        if (app.got_subcommand(cluster_cmd)) return cmd_cluster(cfg);
        if (app.got_subcommand(likelihood_cmd)) return cmd_likelihood(cfg);
        throw ConfigError("no command given");
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapExceededError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitCap;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
