#pragma once

#include <numeric>

#include "jumppat/patterns.hpp"

namespace jumppat {

// Distribution of the next `horizon` click symbols from a given state, flat in
// lexicographic tuple order. The clustering feature vector.
struct FutureSignature {
    int horizon = 0;
    std::vector<double> probs;
};

inline FutureSignature future_signature(const ChannelProcess<Complex>& p, const CMatrix& state,
                                        int horizon,
                                        std::size_t cap = kDefaultEnumerationCap) {
    if (horizon < 1) throw ConfigError("signature horizon must be at least 1");
    const std::size_t m = p.symbols.size();
    double count = std::pow(double(m), horizon);
    if (count > double(cap))
        throw CapExceededError("|M|^n exceeds the enumeration cap for signatures");
    FutureSignature sig;
    sig.horizon = horizon;
    sig.probs.assign(std::size_t(count), 0.0);
    double min_raw = 0.0;
    detail::enumerate_tuples(p, vectorize(state), 0, 0, horizon, sig.probs, min_raw);
    return sig;
}

inline std::vector<FutureSignature> future_signatures(const ChannelProcess<Complex>& p,
                                                      const std::vector<CMatrix>& states,
                                                      int horizon,
                                                      std::size_t cap = kDefaultEnumerationCap,
                                                      int threads = 0) {
    std::vector<FutureSignature> sigs(states.size());
    parallel_for(
        states.size(), [&](std::size_t i) { sigs[i] = future_signature(p, states[i], horizon, cap); },
        threads);
    return sigs;
}

// Euclidean distance between signature vectors.
inline double distance(const FutureSignature& a, const FutureSignature& b) {
    if (a.horizon != b.horizon || a.probs.size() != b.probs.size())
        throw DimensionError("signature horizon mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
        double d = a.probs[i] - b.probs[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

// Dense symmetric distance matrix; kept simple, sample counts stay desk-scale.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    std::size_t size() const { return n_; }
    double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

enum class ClusterMetric { probability, trace };

inline DistanceMatrix pairwise_signature_distances(const std::vector<FutureSignature>& sigs,
                                                   int threads = 0) {
    DistanceMatrix d(sigs.size());
    parallel_for(
        sigs.size(),
        [&](std::size_t i) {
            for (std::size_t j = i + 1; j < sigs.size(); ++j) {
                double v = distance(sigs[i], sigs[j]);
                d.at(i, j) = v;
                d.at(j, i) = v;
            }
        },
        threads);
    return d;
}

inline DistanceMatrix pairwise_trace_distances(const std::vector<CMatrix>& states,
                                               int threads = 0) {
    DistanceMatrix d(states.size());
    parallel_for(
        states.size(),
        [&](std::size_t i) {
            for (std::size_t j = i + 1; j < states.size(); ++j) {
                double v = trace_distance(states[i], states[j]);
                d.at(i, j) = v;
                d.at(j, i) = v;
            }
        },
        threads);
    return d;
}

// Single-linkage merge sequence. Kruskal ordering by (distance, i, j) realizes
// hierarchical agglomeration with ties broken by the smallest pair of lowest
// sample indices; computed once, cut at any requested cluster count.
struct Dendrogram {
    struct Merge {
        std::size_t a = 0, b = 0;  // sample indices of the linking pair
        double dist = 0.0;
    };
    std::size_t size = 0;
    std::vector<Merge> merges;

    std::vector<int> cut(std::size_t n_clusters) const {
        if (n_clusters < 1 || n_clusters > size)
            throw ConfigError("cluster count must lie between 1 and the sample count");
        std::vector<std::size_t> parent(size);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
            while (parent[x] != x) {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            return x;
        };
        const std::size_t steps = size - n_clusters;
        for (std::size_t s = 0; s < steps; ++s)
            parent[find(merges[s].a)] = find(merges[s].b);

        // cluster ids 1..N_c ordered by each cluster's lowest sample index
        std::vector<int> id_of_root(size, 0);
        std::vector<int> assignment(size, 0);
        int next = 0;
        for (std::size_t i = 0; i < size; ++i) {
            std::size_t r = find(i);
            if (id_of_root[r] == 0) id_of_root[r] = ++next;
            assignment[i] = id_of_root[r];
        }
        return assignment;
    }
};

inline Dendrogram single_linkage(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    Dendrogram out;
    out.size = n;
    if (n < 2) return out;
    struct Edge {
        double dist;
        std::uint32_t i, j;
    };
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            edges.push_back({d(i, j), static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.dist, a.i, a.j) < std::tie(b.dist, b.i, b.j);
    });

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const Edge& e : edges) {
        std::size_t ra = find(e.i), rb = find(e.j);
        if (ra == rb) continue;
        parent[ra] = rb;
        out.merges.push_back({e.i, e.j, e.dist});
        if (out.merges.size() == n - 1) break;
    }
    return out;
}

// Cluster assignments plus the averaged inter/intra-cluster distance matrix:
// off-diagonal entries average over all cross pairs, diagonal entries over
// within-cluster pairs (zero for singletons).
struct ClusterModel {
    int n_clusters = 0;
    std::vector<int> assignment;                    // sample -> cluster id, 1-based
    std::vector<std::vector<std::size_t>> members;  // per cluster, ascending indices
    std::vector<double> distances;                  // n_clusters^2, row-major

    double distance_between(int i, int j) const {
        return distances[static_cast<std::size_t>((i - 1) * n_clusters + (j - 1))];
    }
    double max_intra() const {
        double worst = 0.0;
        for (int i = 1; i <= n_clusters; ++i) worst = std::max(worst, distance_between(i, i));
        return worst;
    }
};

namespace detail {

inline ClusterModel model_from_cut(const std::vector<int>& assignment, int n_clusters,
                                   const DistanceMatrix& d) {
    ClusterModel model;
    model.n_clusters = n_clusters;
    model.assignment = assignment;
    model.members.assign(static_cast<std::size_t>(n_clusters), {});
    for (std::size_t i = 0; i < assignment.size(); ++i)
        model.members[static_cast<std::size_t>(assignment[i] - 1)].push_back(i);
    model.distances.assign(static_cast<std::size_t>(n_clusters) * n_clusters, 0.0);
    for (int a = 1; a <= n_clusters; ++a) {
        const auto& sa = model.members[static_cast<std::size_t>(a - 1)];
        for (int b = a; b <= n_clusters; ++b) {
            const auto& sb = model.members[static_cast<std::size_t>(b - 1)];
            double total = 0.0;
            std::size_t pairs = 0;
            if (a == b) {
                for (std::size_t x = 0; x < sa.size(); ++x)
                    for (std::size_t y = x + 1; y < sa.size(); ++y) {
                        total += d(sa[x], sa[y]);
                        ++pairs;
                    }
            } else {
                for (std::size_t x : sa)
                    for (std::size_t y : sb) {
                        total += d(x, y);
                        ++pairs;
                    }
            }
            double value = pairs ? total / double(pairs) : 0.0;
            model.distances[static_cast<std::size_t>((a - 1) * n_clusters + (b - 1))] = value;
            model.distances[static_cast<std::size_t>((b - 1) * n_clusters + (a - 1))] = value;
        }
    }
    return model;
}

}  // namespace detail

struct ClusterOptions {
    ClusterMetric metric = ClusterMetric::probability;
    std::size_t cap = kDefaultEnumerationCap;
    int threads = 0;
};

// Shared workspace for one sample set: signatures, the pairwise distance
// matrix and the dendrogram are built once; cuts at each requested cluster
// count are cheap replays.
class ClusterAnalysis {
public:
    ClusterAnalysis(const ChannelProcess<Complex>& p, const std::vector<CMatrix>& samples,
                    int horizon, const ClusterOptions& opts = {})
        : sample_count_(samples.size()) {
        if (samples.empty()) throw ConfigError("no samples to cluster");
        if (opts.metric == ClusterMetric::probability) {
            auto sigs = future_signatures(p, samples, horizon, opts.cap, opts.threads);
            distances_ = pairwise_signature_distances(sigs, opts.threads);
        } else {
            distances_ = pairwise_trace_distances(samples, opts.threads);
        }
        dendrogram_ = single_linkage(distances_);
    }

    std::size_t sample_count() const { return sample_count_; }
    const DistanceMatrix& distances() const { return distances_; }
    const Dendrogram& dendrogram() const { return dendrogram_; }

    ClusterModel cut(int n_clusters) const {
        return detail::model_from_cut(dendrogram_.cut(static_cast<std::size_t>(n_clusters)),
                                      n_clusters, distances_);
    }

    std::vector<std::pair<int, double>> quality_curve(const std::vector<int>& cluster_counts) const {
        std::vector<std::pair<int, double>> curve;
        for (int n : cluster_counts) curve.emplace_back(n, cut(n).max_intra());
        return curve;
    }

private:
    std::size_t sample_count_ = 0;
    DistanceMatrix distances_;
    Dendrogram dendrogram_;
};

// single-linkage agglomeration of sampled states down to n_clusters clusters
inline ClusterModel cluster(const ChannelProcess<Complex>& p, const std::vector<CMatrix>& samples,
                            int horizon, int n_clusters, const ClusterOptions& opts = {}) {
    return ClusterAnalysis(p, samples, horizon, opts).cut(n_clusters);
}

inline std::vector<std::pair<int, double>> quality_curve(const ChannelProcess<Complex>& p,
                                                         const std::vector<CMatrix>& samples,
                                                         int horizon,
                                                         const std::vector<int>& cluster_counts,
                                                         const ClusterOptions& opts = {}) {
    return ClusterAnalysis(p, samples, horizon, opts).quality_curve(cluster_counts);
}

// (state, emitted symbol, successor state) triple by sample index
struct Transition {
    std::size_t from = 0;
    int symbol = 0;
    std::size_t to = 0;
};

// Flattens trajectory records into a sample list plus successor information.
inline std::pair<std::vector<CMatrix>, std::vector<Transition>> collect_samples(
    const std::vector<TrajectoryRecord<Complex>>& records) {
    std::vector<CMatrix> samples;
    std::vector<Transition> transitions;
    for (const auto& rec : records) {
        const std::size_t base = samples.size();
        for (const auto& state : rec.states) samples.push_back(state);
        for (std::size_t t = 0; t + 1 < rec.states.size(); ++t)
            transitions.push_back({base + t, rec.symbols[t], base + t + 1});
    }
    return {std::move(samples), std::move(transitions)};
}

// Cluster-level transition graph: edge (i, k, j) weighted by the fraction of
// cluster-i samples whose k-successor lands in cluster j, pruned below
// weight_min. Node sizes track cluster populations. The edge semantics are an
// artifact convention; rendering matches the exact pattern graphs.
inline PatternGraph cluster_graph(const ClusterModel& model,
                                  const std::vector<Transition>& transitions,
                                  const std::vector<std::string>& symbols,
                                  double weight_min = 0.02) {
    PatternGraph graph;
    graph.classification = PatternGraph::Kind::open;
    for (int c = 1; c <= model.n_clusters; ++c)
        graph.nodes.push_back({c, model.members[static_cast<std::size_t>(c - 1)].size()});

    std::map<std::tuple<int, int, int>, std::size_t> counts;  // (from, symbol, to)
    std::vector<std::size_t> outgoing(static_cast<std::size_t>(model.n_clusters) + 1, 0);
    for (const auto& t : transitions) {
        int from = model.assignment[t.from];
        int to = model.assignment[t.to];
        ++counts[{from, t.symbol, to}];
        ++outgoing[static_cast<std::size_t>(from)];
    }
    for (const auto& [key, count] : counts) {
        auto [from, symbol, to] = key;
        double weight = double(count) / double(outgoing[static_cast<std::size_t>(from)]);
        if (weight < weight_min) continue;
        graph.edges.push_back({from, to, symbols[static_cast<std::size_t>(symbol)], weight});
    }
    return graph;
}

}  // namespace jumppat
