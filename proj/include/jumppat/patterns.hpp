#pragma once

#include <deque>
#include <optional>
#include <unordered_map>

#include "jumppat/trajectory.hpp"

namespace jumppat {

namespace detail {

struct GaussInt {
    mpz_class re, im;
};

inline double ratio_to_double(const mpz_class& num, const mpz_class& den) {
    mpf_class n(num, 64), d(den, 64);
    return mpf_class(n / d).get_d();
}

inline mpq_class canonical_ratio(const mpz_class& num, const mpz_class& den) {
    mpq_class q(num);
    q /= mpq_class(den);
    return q;
}

// Density matrix in vectorized form over one positive common denominator, with
// content-free Gaussian-integer numerators. The representation is canonical:
// two states are entrywise equal iff their (den, num) data match, so equality
// reduces to comparing serialized keys. For a normalized state the numerator
// trace equals the denominator.
struct ExactStateVec {
    Index dim = 0;
    std::vector<GaussInt> num;  // length dim^2, column-stacked
    mpz_class den = 1;

    static ExactStateVec from_matrix(const XMatrix& m) {
        ExactStateVec s;
        s.dim = m.rows();
        const Index d = s.dim;
        s.num.resize(static_cast<std::size_t>(d * d));
        s.den = 1;
        for (const auto& v : m.data()) {
            s.den = lcm(s.den, v.re.get_den());
            s.den = lcm(s.den, v.im.get_den());
        }
        for (Index j = 0; j < d; ++j)
            for (Index i = 0; i < d; ++i) {
                const ExactComplex& v = m(i, j);
                GaussInt& g = s.num[static_cast<std::size_t>(j * d + i)];
                g.re = v.re.get_num() * (s.den / v.re.get_den());
                g.im = v.im.get_num() * (s.den / v.im.get_den());
            }
        s.reduce();
        return s;
    }

    XMatrix to_matrix() const {
        XMatrix m(dim, dim);
        for (Index j = 0; j < dim; ++j)
            for (Index i = 0; i < dim; ++i) {
                const GaussInt& g = num[static_cast<std::size_t>(j * dim + i)];
                m(i, j) = ExactComplex(canonical_ratio(g.re, den), canonical_ratio(g.im, den));
            }
        return m;
    }

    CMatrix to_complex_matrix() const {
        CMatrix m(dim, dim);
        for (Index j = 0; j < dim; ++j)
            for (Index i = 0; i < dim; ++i) {
                const GaussInt& g = num[static_cast<std::size_t>(j * dim + i)];
                m(i, j) = Complex(ratio_to_double(g.re, den), ratio_to_double(g.im, den));
            }
        return m;
    }

    void reduce() {
        mpz_class g = den;
        for (const auto& v : num) {
            if (g == 1) break;
            g = gcd(g, v.re);
            g = gcd(g, v.im);
        }
        if (g > 1) {
            den /= g;
            for (auto& v : num) {
                v.re /= g;
                v.im /= g;
            }
        }
        if (den < 0) {
            den = -den;
            for (auto& v : num) {
                v.re = -v.re;
                v.im = -v.im;
            }
        }
    }

    std::size_t max_bits() const {
        std::size_t bits = mpz_sizeinbase(den.get_mpz_t(), 2);
        for (const auto& v : num) {
            bits = std::max(bits, mpz_sizeinbase(v.re.get_mpz_t(), 2));
            bits = std::max(bits, mpz_sizeinbase(v.im.get_mpz_t(), 2));
        }
        return bits;
    }

    std::string key() const {
        std::string out;
        auto append = [&out](const mpz_class& z) {
            const int s = sgn(z);
            out.push_back(static_cast<char>(s + 1));
            std::size_t count = 0;
            if (s != 0) {
                std::size_t bytes = (mpz_sizeinbase(z.get_mpz_t(), 2) + 7) / 8;
                std::size_t start = out.size();
                out.resize(start + bytes);
                mpz_export(out.data() + start, &count, 1, 1, 1, 0, z.get_mpz_t());
                out.resize(start + count);
            }
            out.push_back(static_cast<char>(count & 0xff));
            out.push_back(static_cast<char>((count >> 8) & 0xff));
        };
        append(den);
        for (const auto& v : num) {
            append(v.re);
            append(v.im);
        }
        return out;
    }
};

// Channel map with Gaussian-integer entries over one common denominator, plus
// the precomputed trace row so click weights cost O(d^2) instead of O(d^4).
struct ExactSuperop {
    Index dim = 0;  // Hilbert dimension d; entries form a d^2 x d^2 matrix
    std::vector<GaussInt> ent;
    std::vector<GaussInt> trace_row;  // sum of the rows hitting diagonal slots
    mpz_class den = 1;

    static ExactSuperop from_matrix(const XMatrix& m, Index dim) {
        ExactSuperop op;
        op.dim = dim;
        const Index n = m.rows();
        op.ent.resize(static_cast<std::size_t>(n * n));
        op.den = 1;
        for (const auto& v : m.data()) {
            op.den = lcm(op.den, v.re.get_den());
            op.den = lcm(op.den, v.im.get_den());
        }
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const ExactComplex& v = m(i, j);
                GaussInt& g = op.ent[static_cast<std::size_t>(i * n + j)];
                g.re = v.re.get_num() * (op.den / v.re.get_den());
                g.im = v.im.get_num() * (op.den / v.im.get_den());
            }
        op.trace_row.assign(static_cast<std::size_t>(n), GaussInt{});
        for (Index d = 0; d < dim; ++d) {
            const Index row = d * dim + d;
            for (Index j = 0; j < n; ++j) {
                op.trace_row[static_cast<std::size_t>(j)].re +=
                    op.ent[static_cast<std::size_t>(row * n + j)].re;
                op.trace_row[static_cast<std::size_t>(j)].im +=
                    op.ent[static_cast<std::size_t>(row * n + j)].im;
            }
        }
        return op;
    }

    // tr(M_k sigma); exact, and exactly real for Hermitian input
    mpq_class weight(const ExactStateVec& s) const {
        mpz_class re(0), im(0);
        for (std::size_t j = 0; j < trace_row.size(); ++j) {
            re += trace_row[j].re * s.num[j].re - trace_row[j].im * s.num[j].im;
            im += trace_row[j].re * s.num[j].im + trace_row[j].im * s.num[j].re;
        }
        if (sgn(im) != 0) throw NumericError("exact click weight has an imaginary part");
        return canonical_ratio(re, den * s.den);
    }

    // normalized successor M_k sigma / tr(M_k sigma); the operator and state
    // denominators cancel against the trace, so only integers are touched
    ExactStateVec apply_normalized(const ExactStateVec& s) const {
        const Index n = s.dim * s.dim;
        ExactStateVec out;
        out.dim = s.dim;
        out.num.assign(static_cast<std::size_t>(n), GaussInt{});
        for (Index i = 0; i < n; ++i) {
            GaussInt& acc = out.num[static_cast<std::size_t>(i)];
            const GaussInt* row = &ent[static_cast<std::size_t>(i * n)];
            for (Index j = 0; j < n; ++j) {
                const GaussInt& a = row[j];
                const GaussInt& b = s.num[static_cast<std::size_t>(j)];
                if (sgn(a.re) == 0 && sgn(a.im) == 0) continue;
                acc.re += a.re * b.re - a.im * b.im;
                acc.im += a.re * b.im + a.im * b.re;
            }
        }
        mpz_class tr_re(0), tr_im(0);
        for (Index d = 0; d < s.dim; ++d) {
            tr_re += out.num[static_cast<std::size_t>(d * s.dim + d)].re;
            tr_im += out.num[static_cast<std::size_t>(d * s.dim + d)].im;
        }
        if (sgn(tr_im) != 0) throw NumericError("exact successor state has complex trace");
        if (sgn(tr_re) <= 0)
            throw NumericError("exact successor state has non-positive trace");
        out.den = tr_re;
        out.reduce();
        return out;
    }
};

}  // namespace detail

// Canonical map from states to integer labels, assigned in first-seen order
// starting at 1. The exact store matches entries exactly (no approximation in
// the comparison); the float store matches within tol_match in trace distance
// against earlier representatives, first match winning.
template <class S>
class LabeledStateStore;

template <>
class LabeledStateStore<ExactComplex> {
public:
    std::pair<int, bool> label_of(const detail::ExactStateVec& s) {
        auto [it, inserted] = index_.try_emplace(s.key(), static_cast<int>(reps_.size()) + 1);
        if (inserted) reps_.push_back(s);
        return {it->second, inserted};
    }
    std::pair<int, bool> label_of(const XMatrix& m) {
        return label_of(detail::ExactStateVec::from_matrix(m));
    }
    int lookup(const detail::ExactStateVec& s) const {
        auto it = index_.find(s.key());
        return it == index_.end() ? 0 : it->second;
    }
    int lookup(const XMatrix& m) const { return lookup(detail::ExactStateVec::from_matrix(m)); }
    int size() const { return static_cast<int>(reps_.size()); }
    XMatrix representative(int label) const {
        return reps_[static_cast<std::size_t>(label - 1)].to_matrix();
    }
    const detail::ExactStateVec& representative_vec(int label) const {
        return reps_[static_cast<std::size_t>(label - 1)];
    }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<detail::ExactStateVec> reps_;
};

template <>
class LabeledStateStore<Complex> {
public:
    explicit LabeledStateStore(double tol_match = Tolerances{}.tol_match)
        : tol_match_(tol_match) {}
    std::pair<int, bool> label_of(const CMatrix& m) {
        for (std::size_t i = 0; i < reps_.size(); ++i)
            if (trace_distance(reps_[i], m) <= tol_match_) return {static_cast<int>(i) + 1, false};
        reps_.push_back(m);
        return {static_cast<int>(reps_.size()), true};
    }
    int size() const { return static_cast<int>(reps_.size()); }
    const CMatrix& representative(int label) const {
        return reps_[static_cast<std::size_t>(label - 1)];
    }

private:
    double tol_match_;
    std::vector<CMatrix> reps_;
};

// Labeled directed multigraph of post-click states. Each node has at most |M|
// outgoing edges; for exact closed patterns the outgoing probabilities of a
// node sum to one exactly.
struct PatternGraph {
    enum class Kind { renewal, closed, recurring, open };
    struct Node {
        int label = 0;
        std::size_t visits = 1;
    };
    struct Edge {
        int from = 0;
        int to = 0;
        std::string symbol;
        double probability = 0.0;
    };
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    Kind classification = Kind::open;
};

inline const char* to_string(PatternGraph::Kind kind) {
    switch (kind) {
        case PatternGraph::Kind::renewal: return "renewal";
        case PatternGraph::Kind::closed: return "closed";
        case PatternGraph::Kind::recurring: return "recurring";
        case PatternGraph::Kind::open: return "open";
    }
    return "open";
}

// DOT rendering with deterministic ordering: node width scales with visit
// count, edges carry the symbol as label and the probability as an attribute.
inline std::string export_graph(const PatternGraph& graph) {
    std::string out = "digraph pattern {\n";
    if (!graph.nodes.empty()) {
        out += "  rankdir=LR;\n  node [shape=circle, fixedsize=true];\n";
        std::vector<PatternGraph::Node> nodes = graph.nodes;
        std::sort(nodes.begin(), nodes.end(),
                  [](const auto& a, const auto& b) { return a.label < b.label; });
        std::size_t max_visits = 1;
        for (const auto& n : nodes) max_visits = std::max(max_visits, n.visits);
        for (const auto& n : nodes) {
            double width = 0.35 + 0.9 * std::sqrt(double(n.visits) / double(max_visits));
            char buf[96];
            std::snprintf(buf, sizeof(buf), "  n%d [label=\"%d\", width=%.3f];\n", n.label,
                          n.label, width);
            out += buf;
        }
        std::vector<PatternGraph::Edge> edges = graph.edges;
        std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
            return std::tie(a.from, a.symbol, a.to) < std::tie(b.from, b.symbol, b.to);
        });
        for (const auto& e : edges) {
            out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) +
                   " [label=\"" + e.symbol + "\", prob=" + format_csv_double(e.probability) +
                   "];\n";
        }
    }
    out += "}\n";
    return out;
}

// ---- stochastic label detection ---------------------------------------------

struct DetectOptions {
    std::size_t max_steps = 200;
    int trajectories = 20;
    std::uint64_t seed = 0;
    std::size_t denom_bit_cap = std::size_t(1) << 16;  // exact-arithmetic blowup guard
    bool approx_labels = false;   // also label through the float store (exact runs only)
    double tol_match = Tolerances{}.tol_match;
    int threads = 0;
};

struct TrajectoryLabels {
    std::vector<int> labels;         // labels[t] after t clicks; labels[0] is the start state
    std::vector<int> approx_labels;  // same trajectory under tolerance matching (optional)
    std::vector<int> symbols;
    std::optional<std::size_t> first_repeat;  // first step whose state was already labeled
    bool truncated = false;                   // denominator budget exceeded
};

template <class S>
struct DetectResult {
    std::vector<TrajectoryLabels> trajectories;
    LabeledStateStore<S> merged;             // deterministic global relabeling
    std::vector<std::size_t> merged_counts;  // occurrences per merged label
    std::vector<std::optional<Matrix<S>>> repeat_states;  // per trajectory
};

namespace detail {

struct ExactEngine {
    std::vector<ExactSuperop> maps;
    ExactStateVec initial;

    explicit ExactEngine(const ChannelProcess<ExactComplex>& p) {
        for (std::size_t k = 0; k < p.symbols.size(); ++k)
            maps.push_back(ExactSuperop::from_matrix(p.channel_matrix(static_cast<int>(k)), p.dim()));
        initial = ExactStateVec::from_matrix(p.jump_steady_state);
    }

    // exact sampling; the weights sum to one exactly, the draw is a dyadic rational
    int sample(const ExactStateVec& state, double u) const {
        mpq_class target = rational_from_double(u);
        mpq_class cumulative(0);
        for (std::size_t k = 0; k < maps.size(); ++k) {
            cumulative += maps[k].weight(state);
            if (cumulative > target) return static_cast<int>(k);
        }
        for (std::size_t k = maps.size(); k-- > 0;)
            if (sgn(maps[k].weight(state)) > 0) return static_cast<int>(k);
        throw DarkStateError("exact state assigns zero weight to every channel");
    }
};

}  // namespace detail

// Runs the post-click dynamics stochastically from the jump steady state and
// labels every visited state. Exact field: states compared entrywise exactly,
// with a bit-budget guard against runaway denominators; optionally the same
// trajectory is labeled a second time through trace-distance matching. Float
// field: tolerance matching only. Trajectories run concurrently with private
// stores, then merge into a deterministic global store.
template <class S>
DetectResult<S> detect_pattern(const ChannelProcess<S>& p, const DetectOptions& opts = {}) {
    const std::size_t count = static_cast<std::size_t>(opts.trajectories);
    DetectResult<S> result;
    result.trajectories.resize(count);
    result.repeat_states.resize(count);
    if constexpr (FieldTraits<S>::is_exact) {
        detail::ExactEngine engine(p);
        std::vector<LabeledStateStore<ExactComplex>> stores(count);
        parallel_for(
            count,
            [&](std::size_t i) {
                TrajectoryLabels& traj = result.trajectories[i];
                std::mt19937_64 rng(derive_trajectory_seed(opts.seed, i));
                std::uniform_real_distribution<double> uniform(0.0, 1.0);
                LabeledStateStore<Complex> approx(opts.tol_match);
                detail::ExactStateVec state = engine.initial;
                traj.labels.push_back(stores[i].label_of(state).first);
                if (opts.approx_labels)
                    traj.approx_labels.push_back(approx.label_of(state.to_complex_matrix()).first);
                for (std::size_t t = 1; t <= opts.max_steps; ++t) {
                    int symbol = engine.sample(state, uniform(rng));
                    state = engine.maps[static_cast<std::size_t>(symbol)].apply_normalized(state);
                    if (state.max_bits() > opts.denom_bit_cap) {
                        traj.truncated = true;
                        break;
                    }
                    auto [label, was_new] = stores[i].label_of(state);
                    traj.labels.push_back(label);
                    traj.symbols.push_back(symbol);
                    if (opts.approx_labels)
                        traj.approx_labels.push_back(
                            approx.label_of(state.to_complex_matrix()).first);
                    if (!was_new && !traj.first_repeat) {
                        traj.first_repeat = t;
                        result.repeat_states[i] = state.to_matrix();
                    }
                }
            },
            opts.threads);
        // deterministic global pass: re-canonicalize labels trajectory by trajectory
        for (std::size_t i = 0; i < count; ++i) {
            const TrajectoryLabels& traj = result.trajectories[i];
            std::vector<int> merged_of_local(static_cast<std::size_t>(stores[i].size()) + 1, 0);
            for (int local = 1; local <= stores[i].size(); ++local)
                merged_of_local[static_cast<std::size_t>(local)] =
                    result.merged.label_of(stores[i].representative_vec(local)).first;
            result.merged_counts.resize(static_cast<std::size_t>(result.merged.size()), 0);
            for (int local : traj.labels)
                ++result.merged_counts[static_cast<std::size_t>(
                                           merged_of_local[static_cast<std::size_t>(local)]) -
                                       1];
        }
    } else {
        std::vector<LabeledStateStore<Complex>> stores(count, LabeledStateStore<Complex>(opts.tol_match));
        parallel_for(
            count,
            [&](std::size_t i) {
                TrajectoryLabels& traj = result.trajectories[i];
                std::mt19937_64 rng(derive_trajectory_seed(opts.seed, i));
                CMatrix state = p.jump_steady_state;
                traj.labels.push_back(stores[i].label_of(state).first);
                for (std::size_t t = 1; t <= opts.max_steps; ++t) {
                    auto [symbol, next] = step(p, state, rng);
                    state = std::move(next);
                    auto [label, was_new] = stores[i].label_of(state);
                    traj.labels.push_back(label);
                    traj.symbols.push_back(symbol);
                    if (!was_new && !traj.first_repeat) {
                        traj.first_repeat = t;
                        result.repeat_states[i] = state;
                    }
                }
            },
            opts.threads);
        result.merged = LabeledStateStore<Complex>(opts.tol_match);
        for (std::size_t i = 0; i < count; ++i) {
            const TrajectoryLabels& traj = result.trajectories[i];
            std::vector<int> merged_of_local(static_cast<std::size_t>(stores[i].size()) + 1, 0);
            for (int local = 1; local <= stores[i].size(); ++local)
                merged_of_local[static_cast<std::size_t>(local)] =
                    result.merged.label_of(stores[i].representative(local)).first;
            result.merged_counts.resize(static_cast<std::size_t>(result.merged.size()), 0);
            for (int local : traj.labels)
                ++result.merged_counts[static_cast<std::size_t>(
                                           merged_of_local[static_cast<std::size_t>(local)]) -
                                       1];
        }
    }
    return result;
}

// ---- pattern closure --------------------------------------------------------

struct CloseOptions {
    std::size_t max_states = 10000;
    std::size_t denom_bit_cap = std::size_t(1) << 16;
};

struct CloseResult {
    PatternGraph graph;
    LabeledStateStore<ExactComplex> states;
    bool closed = false;
    std::size_t frontier_remaining = 0;
    std::string failure;  // empty when closed
};

// Breadth-first closure of the post-click dynamics from a seed state: every
// channel with nonzero exact weight is followed, successors are normalized and
// labeled, and the graph closes when no new state appears. Frontier order is
// first-in first-out with channels in model order, so labels are deterministic.
inline CloseResult close_pattern(const ChannelProcess<ExactComplex>& p, const XMatrix& seed_state,
                                 const CloseOptions& opts = {}) {
    CloseResult result;
    detail::ExactEngine engine(p);
    std::deque<int> frontier;
    std::vector<detail::ExactStateVec> reps;

    detail::ExactStateVec seed = detail::ExactStateVec::from_matrix(seed_state);
    result.states.label_of(seed);
    reps.push_back(seed);
    frontier.push_back(1);
    result.graph.nodes.push_back({1, 1});

    while (!frontier.empty()) {
        if (static_cast<std::size_t>(result.states.size()) > opts.max_states) {
            result.failure = "state budget exceeded (" + std::to_string(opts.max_states) + ")";
            break;
        }
        const int label = frontier.front();
        frontier.pop_front();
        const detail::ExactStateVec state = reps[static_cast<std::size_t>(label - 1)];
        if (state.max_bits() > opts.denom_bit_cap) {
            result.failure = "denominator budget exceeded (" +
                             std::to_string(opts.denom_bit_cap) + " bits)";
            break;
        }
        for (std::size_t k = 0; k < engine.maps.size(); ++k) {
            mpq_class w = engine.maps[k].weight(state);
            if (sgn(w) == 0) continue;
            if (sgn(w) < 0) throw NumericError("negative exact click weight");
            detail::ExactStateVec next = engine.maps[k].apply_normalized(state);
            auto [to_label, was_new] = result.states.label_of(next);
            if (was_new) {
                reps.push_back(next);
                frontier.push_back(to_label);
                result.graph.nodes.push_back({to_label, 1});
            }
            result.graph.edges.push_back(
                {label, to_label, p.symbols[k], detail::ratio_to_double(w.get_num(), w.get_den())});
        }
    }
    result.frontier_remaining = frontier.size();
    result.closed = result.failure.empty() && frontier.empty();
    result.graph.classification =
        result.closed ? PatternGraph::Kind::closed : PatternGraph::Kind::open;
    return result;
}

// Restriction of a closed graph to its terminal strongly connected components,
// the recurrent core the dynamics never leaves. Closure seeded from an early
// repeat can strictly contain the core: mixtures sampled before the trajectory
// collapses may cycle among themselves for a while, yet they escape into the
// core with positive probability per cycle, so they are transient. Nodes are
// relabeled 1..n in ascending order of their original labels.
inline PatternGraph recurrent_core(const PatternGraph& graph) {
    const std::size_t n = graph.nodes.size();
    if (n == 0) return graph;
    std::unordered_map<int, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i].label] = i;
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : graph.edges) adj[index.at(e.from)].push_back(index.at(e.to));

    // iterative Tarjan
    std::vector<int> low(n, -1), num(n, -1), comp(n, -1);
    std::vector<std::size_t> stack;
    std::vector<bool> on_stack(n, false);
    int counter = 0, components = 0;
    struct Frame {
        std::size_t v;
        std::size_t edge = 0;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (num[root] >= 0) continue;
        std::vector<Frame> call{{root}};
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge == 0) {
                num[f.v] = low[f.v] = counter++;
                stack.push_back(f.v);
                on_stack[f.v] = true;
            }
            bool descended = false;
            while (f.edge < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.edge++];
                if (num[w] < 0) {
                    call.push_back({w});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[f.v] = std::min(low[f.v], num[w]);
            }
            if (descended) continue;
            if (low[f.v] == num[f.v]) {
                while (true) {
                    std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = components;
                    if (w == f.v) break;
                }
                ++components;
            }
            std::size_t child = f.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[child]);
        }
    }

    std::vector<bool> terminal(static_cast<std::size_t>(components), true);
    for (const auto& e : graph.edges)
        if (comp[index.at(e.from)] != comp[index.at(e.to)])
            terminal[static_cast<std::size_t>(comp[index.at(e.from)])] = false;

    std::vector<int> kept_labels;
    for (std::size_t i = 0; i < n; ++i)
        if (terminal[static_cast<std::size_t>(comp[i])]) kept_labels.push_back(graph.nodes[i].label);
    std::sort(kept_labels.begin(), kept_labels.end());
    std::unordered_map<int, int> relabel;
    for (std::size_t i = 0; i < kept_labels.size(); ++i)
        relabel[kept_labels[i]] = static_cast<int>(i) + 1;

    PatternGraph core;
    core.classification = graph.classification;
    for (const auto& node : graph.nodes) {
        auto it = relabel.find(node.label);
        if (it != relabel.end()) core.nodes.push_back({it->second, node.visits});
    }
    std::sort(core.nodes.begin(), core.nodes.end(),
              [](const auto& a, const auto& b) { return a.label < b.label; });
    for (const auto& e : graph.edges) {
        auto from = relabel.find(e.from);
        auto to = relabel.find(e.to);
        if (from != relabel.end() && to != relabel.end())
            core.edges.push_back({from->second, to->second, e.symbol, e.probability});
    }
    return core;
}

// ---- renewal check ----------------------------------------------------------

template <class S>
struct RenewalReport {
    bool renewal = false;
    std::vector<Matrix<S>> reset_states;  // aligned with the symbol alphabet when renewal
};

// A process is renewal iff every channel map has rank one as a d^2 x d^2
// matrix; the normalized image is then the channel's reset state.
template <class S>
RenewalReport<S> is_renewal(const ChannelProcess<S>& p) {
    RenewalReport<S> report;
    std::vector<Matrix<S>> resets;
    for (std::size_t k = 0; k < p.symbols.size(); ++k) {
        const Matrix<S>& mk = p.channel_matrix(static_cast<int>(k));
        if constexpr (FieldTraits<S>::is_exact) {
            if (exact_rank(mk) != 1) return report;
            // any nonzero column spans the image; normalizing by the trace
            // removes the column-dependent prefactor exactly
            Index col = -1;
            for (Index j = 0; j < mk.cols() && col < 0; ++j)
                for (Index i = 0; i < mk.rows(); ++i)
                    if (!mk(i, j).is_zero()) {
                        col = j;
                        break;
                    }
            if (col < 0) return report;
            XMatrix image(mk.rows(), 1);
            for (Index i = 0; i < mk.rows(); ++i) image(i, 0) = mk(i, col);
            XMatrix op = unvectorize(image, p.dim());
            ExactComplex t = trace(op);
            if (t.is_zero()) throw NumericError("rank-one channel map has traceless image");
            for (auto& v : op.data()) v /= t;
            resets.push_back(std::move(op));
        } else {
            if (numeric_rank(mk, p.tol.tol_rank) != 1) return report;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(mk), Eigen::ComputeThinU);
            Eigen::VectorXcd u = svd.matrixU().col(0);
            CMatrix image(mk.rows(), 1);
            for (Index i = 0; i < mk.rows(); ++i) image(i, 0) = u(i);
            CMatrix op = unvectorize(image, p.dim());
            Complex t = trace(op);
            if (std::abs(t) < p.tol.tol_rank)
                throw NumericError("rank-one channel map has traceless image");
            op *= Complex(1.0) / t;
            resets.push_back(hermitize(op));
        }
    }
    report.renewal = true;
    report.reset_states = std::move(resets);
    return report;
}

// ---- classification ---------------------------------------------------------

struct ClassifyOptions {
    DetectOptions detect;
    CloseOptions close;
    double recur_fraction = 0.9;   // revisiting trajectories needed to call it recurring
    int max_closure_attempts = 3;  // distinct repeat seeds tried before giving up
};

struct ClassificationReport {
    PatternGraph::Kind kind = PatternGraph::Kind::open;
    PatternGraph graph;  // renewal or closed graph; partial closure otherwise (may be empty)
    DetectResult<ExactComplex> evidence;
    RenewalReport<ExactComplex> renewal;
    std::optional<CloseResult> closure;
    double revisit_fraction = 0.0;
};

// renewal -> closed (closure from a detected repeat) -> recurring (enough
// trajectories revisit an exact label) -> open.
inline ClassificationReport classify_recurrence(const ChannelProcess<ExactComplex>& p,
                                                const ClassifyOptions& opts = {}) {
    ClassificationReport report;
    report.renewal = is_renewal(p);
    report.evidence = detect_pattern(p, opts.detect);

    std::size_t revisits = 0;
    for (const auto& traj : report.evidence.trajectories)
        if (traj.first_repeat) ++revisits;
    report.revisit_fraction =
        report.evidence.trajectories.empty()
            ? 0.0
            : double(revisits) / double(report.evidence.trajectories.size());

    if (report.renewal.renewal) {
        report.kind = PatternGraph::Kind::renewal;
        PatternGraph& g = report.graph;
        const std::size_t m = p.symbols.size();
        // count symbol emissions: in a renewal process the state after symbol
        // k is always the reset state of channel k
        std::vector<std::size_t> symbol_counts(m, 0);
        for (const auto& traj : report.evidence.trajectories)
            for (int s : traj.symbols) ++symbol_counts[static_cast<std::size_t>(s)];
        for (std::size_t k = 0; k < m; ++k)
            g.nodes.push_back({static_cast<int>(k) + 1, std::max<std::size_t>(symbol_counts[k], 1)});
        for (std::size_t from = 0; from < m; ++from) {
            XMatrix vec = vectorize(report.renewal.reset_states[from]);
            for (std::size_t to = 0; to < m; ++to) {
                XMatrix clicked = p.channel_matrix(static_cast<int>(to)) * vec;
                ExactComplex w = trace_of_vectorized(clicked, p.dim());
                if (w.is_zero()) continue;
                g.edges.push_back({static_cast<int>(from) + 1, static_cast<int>(to) + 1,
                                   p.symbols[to], w.re.get_d()});
            }
        }
        g.classification = PatternGraph::Kind::renewal;
        return report;
    }

    // try to close from distinct detected repeat states, earliest first
    std::vector<std::string> tried;
    for (std::size_t i = 0; i < report.evidence.repeat_states.size() &&
                            static_cast<int>(tried.size()) < opts.max_closure_attempts;
         ++i) {
        if (!report.evidence.repeat_states[i]) continue;
        const XMatrix& seed = *report.evidence.repeat_states[i];
        std::string key = detail::ExactStateVec::from_matrix(seed).key();
        if (std::find(tried.begin(), tried.end(), key) != tried.end()) continue;
        tried.push_back(key);
        CloseResult closure = close_pattern(p, seed, opts.close);
        const bool closed = closure.closed;
        report.closure = std::move(closure);
        if (closed) {
            report.kind = PatternGraph::Kind::closed;
            // visits from the detection evidence, matched through exact keys,
            // then restriction to the recurrent core the dynamics settles into
            PatternGraph full = report.closure->graph;
            for (auto& node : full.nodes) {
                int merged = report.evidence.merged.lookup(
                    report.closure->states.representative_vec(node.label));
                node.visits =
                    merged > 0 ? report.evidence.merged_counts[static_cast<std::size_t>(merged - 1)]
                               : 0;
            }
            report.graph = recurrent_core(full);
            return report;
        }
    }

    if (report.revisit_fraction >= opts.recur_fraction) {
        report.kind = PatternGraph::Kind::recurring;
        if (report.closure) {
            report.graph = report.closure->graph;
            report.graph.classification = PatternGraph::Kind::recurring;
        }
        return report;
    }
    report.kind = PatternGraph::Kind::open;
    if (report.closure) report.graph = report.closure->graph;
    return report;
}

}  // namespace jumppat
