#pragma once

#include <optional>

#include "jumppat/io.hpp"
#include "jumppat/model.hpp"

namespace jumppat {

// Model section of a run configuration: either a builtin boundary-driven chain
// or operator files in the interchange format. Numeric parameters are kept as
// strings so exact mode can parse them as rationals without loss.
struct JumpFileConfig {
    std::string label;
    std::string path;
    std::string rate = "1";
};

struct ModelConfig {
    std::string name;
    std::optional<std::string> chain;  // "xx" | "xy"
    int length = 1;
    std::string hopping = "1";
    std::string gamma = "1";
    std::string kappa = "0";
    std::optional<std::string> hamiltonian;  // interchange-format file
    std::vector<JumpFileConfig> jumps;
    std::vector<std::string> monitored;  // empty: monitor every channel

    std::string display_name() const {
        if (!name.empty()) return name;
        if (chain) {
            std::string s = *chain + "_L" + std::to_string(length) + "_gamma" + gamma;
            if (*chain == "xy") s += "_kappa" + kappa;
            return s;
        }
        return "custom";
    }
};

struct RunConfig {
    std::string mode = "float";  // "float" | "exact"
    std::optional<std::uint64_t> seed;
    int threads = 0;
    Tolerances tol;
    ModelConfig model;
    std::string out = ".";

    // stats
    int order = 2;
    int mi_max = 8;
    std::size_t cap = std::size_t(1) << 16;  // enumeration budget, matches statistics

    // simulate
    std::size_t steps = 1000;
    std::size_t burn_in = 0;
    int trajectories = 1;
    bool dump_states = false;
    std::optional<std::string> initial;  // interchange-format file

    // patterns
    std::size_t pattern_steps = 200;
    int pattern_trajectories = 20;
    std::size_t max_states = 10000;
    std::size_t denom_bit_cap = std::size_t(1) << 16;
    double recur_fraction = 0.9;
    bool approx_labels = false;

    // cluster
    int horizon = 6;
    std::size_t samples = 2000;
    std::size_t cluster_burn_in = 200;
    std::vector<int> n_clusters = {12, 32};
    std::string metric = "probability";
    double weight_min = 0.02;

    // likelihood
    std::string sequence;
    std::vector<ModelConfig> candidates;
};

namespace detail {

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig m;
    if (j.contains("name")) m.name = j.at("name").get<std::string>();
    if (j.contains("chain")) {
        const auto& c = j.at("chain");
        m.chain = c.at("type").get<std::string>();
        if (*m.chain != "xx" && *m.chain != "xy")
            throw ConfigError("chain type must be 'xx' or 'xy'");
        m.length = c.value("length", 1);
        if (c.contains("hopping")) m.hopping = c.at("hopping").is_string()
                                                   ? c.at("hopping").get<std::string>()
                                                   : c.at("hopping").dump();
        if (c.contains("gamma"))
            m.gamma = c.at("gamma").is_string() ? c.at("gamma").get<std::string>()
                                                : c.at("gamma").dump();
        if (c.contains("kappa"))
            m.kappa = c.at("kappa").is_string() ? c.at("kappa").get<std::string>()
                                                : c.at("kappa").dump();
    }
    if (j.contains("hamiltonian")) m.hamiltonian = j.at("hamiltonian").get<std::string>();
    if (j.contains("jumps")) {
        for (const auto& jj : j.at("jumps")) {
            JumpFileConfig f;
            f.label = jj.at("label").get<std::string>();
            f.path = jj.at("operator").get<std::string>();
            if (jj.contains("rate"))
                f.rate = jj.at("rate").is_string() ? jj.at("rate").get<std::string>()
                                                   : jj.at("rate").dump();
            m.jumps.push_back(std::move(f));
        }
    }
    if (j.contains("monitored"))
        m.monitored = j.at("monitored").get<std::vector<std::string>>();
    return m;
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        if (j.contains("mode")) cfg.mode = j.at("mode").get<std::string>();
        if (cfg.mode != "float" && cfg.mode != "exact")
            throw ConfigError("mode must be 'float' or 'exact'");
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            cfg.tol.tol_rank = t.value("tol_rank", cfg.tol.tol_rank);
            cfg.tol.cond_max = t.value("cond_max", cfg.tol.cond_max);
            cfg.tol.tol_psd = t.value("tol_psd", cfg.tol.tol_psd);
            cfg.tol.tol_match = t.value("tol_match", cfg.tol.tol_match);
        }
        if (j.contains("model")) cfg.model = detail::model_config_from_json(j.at("model"));
        if (j.contains("stats")) {
            const auto& s = j.at("stats");
            cfg.order = s.value("order", cfg.order);
            cfg.mi_max = s.value("mi_max", cfg.mi_max);
            cfg.cap = s.value("cap", cfg.cap);
        }
        if (j.contains("simulate")) {
            const auto& s = j.at("simulate");
            cfg.steps = s.value("steps", cfg.steps);
            cfg.burn_in = s.value("burn_in", cfg.burn_in);
            cfg.trajectories = s.value("trajectories", cfg.trajectories);
            cfg.dump_states = s.value("dump_states", cfg.dump_states);
            if (s.contains("initial")) cfg.initial = s.at("initial").get<std::string>();
        }
        if (j.contains("patterns")) {
            const auto& s = j.at("patterns");
            cfg.pattern_steps = s.value("max_steps", cfg.pattern_steps);
            cfg.pattern_trajectories = s.value("trajectories", cfg.pattern_trajectories);
            cfg.max_states = s.value("max_states", cfg.max_states);
            cfg.denom_bit_cap = s.value("denom_bit_cap", cfg.denom_bit_cap);
            cfg.recur_fraction = s.value("recur_fraction", cfg.recur_fraction);
            cfg.approx_labels = s.value("approx_labels", cfg.approx_labels);
        }
        if (j.contains("cluster")) {
            const auto& s = j.at("cluster");
            cfg.horizon = s.value("horizon", cfg.horizon);
            cfg.samples = s.value("samples", cfg.samples);
            cfg.cluster_burn_in = s.value("burn_in", cfg.cluster_burn_in);
            if (s.contains("n_clusters"))
                cfg.n_clusters = s.at("n_clusters").get<std::vector<int>>();
            cfg.metric = s.value("metric", cfg.metric);
            cfg.weight_min = s.value("weight_min", cfg.weight_min);
        }
        if (j.contains("likelihood")) {
            const auto& s = j.at("likelihood");
            if (s.contains("string")) cfg.sequence = s.at("string").get<std::string>();
            if (s.contains("candidates"))
                for (const auto& c : s.at("candidates"))
                    cfg.candidates.push_back(detail::model_config_from_json(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

// Materializes a model configuration in the requested scalar field. Chain
// parameters parse as exact rationals; operator files use the interchange
// format in the matching flavor.
template <class S>
OpenSystemModel<S> build_model(const ModelConfig& cfg) {
    if (cfg.chain) {
        ChainSpec<S> spec;
        spec.length = cfg.length;
        if constexpr (FieldTraits<S>::is_exact) {
            spec.hopping = parse_rational(cfg.hopping);
            spec.gamma = parse_rational(cfg.gamma);
            spec.kappa = parse_rational(cfg.kappa);
        } else {
            spec.hopping = parse_rational(cfg.hopping).get_d();
            spec.gamma = parse_rational(cfg.gamma).get_d();
            spec.kappa = parse_rational(cfg.kappa).get_d();
        }
        if (*cfg.chain == "xx" && sgn(parse_rational(cfg.kappa)) != 0)
            throw ConfigError("xx chains have no pairing term; use chain type 'xy'");
        return build_xy_chain(spec);
    }
    if (!cfg.hamiltonian || cfg.jumps.empty())
        throw ConfigError("custom models need a Hamiltonian file and at least one jump");
    OpenSystemModel<S> model;
    model.hamiltonian = load_matrix<S>(*cfg.hamiltonian);
    model.dim = model.hamiltonian.rows();
    for (const auto& f : cfg.jumps) {
        JumpChannel<S> ch;
        ch.label = f.label;
        ch.op = load_matrix<S>(f.path);
        if constexpr (FieldTraits<S>::is_exact) {
            ch.rate = parse_rational(f.rate);
        } else {
            ch.rate = parse_rational(f.rate).get_d();
        }
        model.jumps.push_back(std::move(ch));
    }
    if (cfg.monitored.empty()) {
        for (const auto& jc : model.jumps) model.monitored.push_back(jc.label);
    } else {
        model.monitored = cfg.monitored;
    }
    model.validate();
    return model;
}

}  // namespace jumppat
