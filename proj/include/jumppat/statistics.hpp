#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "jumppat/channel_engine.hpp"
#include "jumppat/parallel.hpp"

namespace jumppat {

// Joint law of N consecutive click symbols. Probabilities are stored flat in
// lexicographic tuple order (first symbol most significant, alphabet in model
// order). Values within floating slack of zero are clamped on report; the most
// negative raw value seen is kept as a diagnostic.
struct JointDistribution {
    int order = 0;
    std::vector<std::string> symbols;
    std::vector<double> probs;
    double min_raw_probability = 0.0;

    std::size_t alphabet() const { return symbols.size(); }
    std::size_t tuple_count() const { return probs.size(); }

    std::size_t flat_index(const std::vector<int>& tuple) const {
        std::size_t idx = 0;
        for (int s : tuple) idx = idx * alphabet() + static_cast<std::size_t>(s);
        return idx;
    }
    std::vector<int> tuple_of(std::size_t flat) const {
        std::vector<int> t(static_cast<std::size_t>(order));
        for (int i = order - 1; i >= 0; --i) {
            t[static_cast<std::size_t>(i)] = static_cast<int>(flat % alphabet());
            flat /= alphabet();
        }
        return t;
    }
    std::string sequence_label(std::size_t flat) const {
        std::string s;
        for (int k : tuple_of(flat)) s += symbols[static_cast<std::size_t>(k)];
        return s;
    }
    double probability(const std::vector<int>& tuple) const { return probs[flat_index(tuple)]; }
    double probability(const std::string& word) const;  // defined after parse_symbols
    double sum() const {
        double s = 0;
        for (double p : probs) s += p;
        return s;
    }
};

// Greedy longest-match tokenizer from a concatenated label string to symbol
// indexes. Single-character alphabets (the chain's I/E) reduce to a char scan.
template <class S>
std::vector<int> parse_symbols(const ChannelProcess<S>& p, const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        int best = -1;
        std::size_t best_len = 0;
        for (std::size_t k = 0; k < p.symbols.size(); ++k) {
            const std::string& label = p.symbols[k];
            if (label.size() > best_len && text.compare(pos, label.size(), label) == 0) {
                best = static_cast<int>(k);
                best_len = label.size();
            }
        }
        if (best < 0)
            throw ConfigError("symbol string '" + text + "' leaves the monitored alphabet at position " +
                              std::to_string(pos));
        out.push_back(best);
        pos += best_len;
    }
    return out;
}

inline double JointDistribution::probability(const std::string& word) const {
    // resolves single-character alphabets only; used by tests and CSV goldens
    std::vector<int> tuple;
    for (char c : word) {
        int found = -1;
        for (std::size_t k = 0; k < symbols.size(); ++k)
            if (symbols[k] == std::string(1, c)) found = static_cast<int>(k);
        if (found < 0) throw ConfigError("unknown symbol in word");
        tuple.push_back(found);
    }
    return probability(tuple);
}

// tr{ M_{k_N} ... M_{k_1} rho } by repeated superoperator-vector products;
// the product superoperator is never formed.
template <class S>
RealOf<S> sequence_probability(const ChannelProcess<S>& p, const std::vector<int>& seq,
                               const Matrix<S>& initial) {
    if (seq.empty()) throw ConfigError("empty symbol sequence");
    Matrix<S> v = vectorize(initial);
    for (int k : seq) {
        if (k < 0 || static_cast<std::size_t>(k) >= p.symbols.size())
            throw ConfigError("symbol index out of range");
        v = p.channel_matrix(k) * v;
    }
    return FieldTraits<S>::real(trace_of_vectorized(v, p.dim()));
}

template <class S>
RealOf<S> sequence_probability(const ChannelProcess<S>& p, const std::vector<int>& seq) {
    return sequence_probability(p, seq, p.jump_steady_state);
}

namespace detail {

// Depth-first enumeration over all |M|^order tuples sharing propagated
// prefixes; results land in preassigned slots of `out`.
inline void enumerate_tuples(const ChannelProcess<Complex>& p, const CMatrix& vec, int depth,
                             std::size_t base, int order, std::vector<double>& out,
                             double& min_raw) {
    if (depth == order) {
        double raw = trace_of_vectorized(vec, p.dim()).real();
        min_raw = std::min(min_raw, raw);
        out[base] = raw < 0 ? 0.0 : raw;
        return;
    }
    const std::size_t stride = p.symbols.size();
    for (std::size_t k = 0; k < stride; ++k) {
        CMatrix next = p.channel_matrix(static_cast<int>(k)) * vec;
        enumerate_tuples(p, next, depth + 1, base * stride + k, order, out, min_raw);
    }
}

}  // namespace detail

constexpr std::size_t kDefaultEnumerationCap = std::size_t(1) << 16;

// All |M|^order tuple probabilities from the post-click steady state.
inline JointDistribution full_distribution(const ChannelProcess<Complex>& p, int order,
                                           std::size_t cap = kDefaultEnumerationCap,
                                           int threads = 0) {
    if (order < 1) throw ConfigError("distribution order must be at least 1");
    const std::size_t m = p.symbols.size();
    double count = std::pow(double(m), order);
    if (count > double(cap))
        throw CapExceededError("|M|^N = " + std::to_string(std::size_t(count)) +
                               " exceeds the enumeration cap; sample trajectories instead");
    JointDistribution dist;
    dist.order = order;
    dist.symbols = p.symbols;
    dist.probs.assign(std::size_t(count), 0.0);

    // parallel split over leading-symbol subtrees; disjoint output slices
    int split_depth = 0;
    std::size_t tasks = 1;
    while (split_depth < order && tasks < 4 * static_cast<std::size_t>(resolve_threads(threads)) &&
           tasks * m <= 1024)
        tasks *= m, ++split_depth;

    std::vector<CMatrix> prefix_vecs;
    prefix_vecs.reserve(tasks);
    CMatrix root = vectorize(p.jump_steady_state);
    // enumerate the prefixes sequentially (cheap relative to the subtrees)
    std::vector<std::pair<std::size_t, CMatrix>> frontier{{0, root}};
    for (int dpt = 0; dpt < split_depth; ++dpt) {
        std::vector<std::pair<std::size_t, CMatrix>> next;
        next.reserve(frontier.size() * m);
        for (auto& [idx, vec] : frontier)
            for (std::size_t k = 0; k < m; ++k)
                next.emplace_back(idx * m + k, p.channel_matrix(static_cast<int>(k)) * vec);
        frontier = std::move(next);
    }

    std::vector<double> min_raws(frontier.size(), 0.0);
    parallel_for(
        frontier.size(),
        [&](std::size_t t) {
            detail::enumerate_tuples(p, frontier[t].second, split_depth, frontier[t].first, order,
                                     dist.probs, min_raws[t]);
        },
        threads);
    for (double r : min_raws) dist.min_raw_probability = std::min(dist.min_raw_probability, r);
    return dist;
}

// Relative click frequency of one channel in the steady state.
inline double single_outcome(const ChannelProcess<Complex>& p, int k) {
    if (k < 0 || static_cast<std::size_t>(k) >= p.symbols.size())
        throw ConfigError("symbol index out of range");
    std::size_t jump_idx = p.model.monitored_indexes()[static_cast<std::size_t>(k)];
    CMatrix clicked = jump_superoperator(p.model.jumps[jump_idx], p.dim()).matrix *
                      vectorize(p.steady_state);
    return trace_of_vectorized(clicked, p.dim()).real() / p.activity;
}

inline double single_outcome(const ChannelProcess<Complex>& p, const std::string& label) {
    return single_outcome(p, p.symbol_index(label));
}

// Joint law of the first and the N-th click, by N-2 applications of the
// one-step map.
inline double two_point(const ChannelProcess<Complex>& p, int k1, int kn, int order) {
    if (order < 2) throw ConfigError("two_point needs N >= 2");
    CMatrix v = p.channel_matrix(k1) * vectorize(p.jump_steady_state);
    for (int i = 0; i < order - 2; ++i) v = p.total_map.matrix * v;
    v = p.channel_matrix(kn) * v;
    return trace_of_vectorized(v, p.dim()).real();
}

// Spectral route to the same quantity: the stationary eigenvalue contributes
// the product term and every other eigenprojector contributes mu^(N-2) times a
// cached coefficient, so N-sweeps cost O(1) per point after construction.
//
// When the one-step map is diagonalizable this evaluates the eigenprojector
// sum verbatim. Boundary-driven chains of three or more sites have a genuinely
// defective one-step map (an index-2 nilpotent block at eigenvalue zero), so a
// plain eigenvector sum does not exist there. The defective route below is the
// Jordan-aware equivalent: it deflates the stationary projector exactly,
// recovers the semisimple nonzero eigenstructure from the square of the
// deflated map (which annihilates the nilpotent), and keeps two correction
// terms from the zero cluster that only enter at N = 2 (its projector) and
// N = 3 (its nilpotent).
class SpectralTwoPoint {
public:
    explicit SpectralTwoPoint(const ChannelProcess<Complex>& p) : process_(&p) {
        if (!p.spectrum.has_value())
            throw NumericError("spectral route needs the one-step map spectrum");
        const std::size_t m = p.symbols.size();
        singles_.resize(m);
        for (std::size_t k = 0; k < m; ++k) singles_[k] = single_outcome(p, static_cast<int>(k));

        if (p.spectrum->diagonalizable)
            build_from_eigenpairs(*p.spectrum);
        else
            build_defective();
    }

    double probability(int k1, int kn, int order) const {
        if (order < 2) throw ConfigError("two_point needs N >= 2");
        const std::size_t a = static_cast<std::size_t>(k1);
        const std::size_t b = static_cast<std::size_t>(kn);
        Complex acc(singles_[a] * singles_[b]);
        for (std::size_t j = 0; j < eigenvalues_.size(); ++j)
            acc += std::pow(eigenvalues_[j], order - 2) * head_[b][j] * tail_[a][j];
        if (order == 2) acc += zero_projector_term_[b][a];
        if (order == 3) acc += zero_nilpotent_term_[b][a];
        return acc.real();
    }

private:
    void allocate(std::size_t n_eigs) {
        const std::size_t m = process_->symbols.size();
        head_.assign(m, std::vector<Complex>(n_eigs));
        tail_.assign(m, std::vector<Complex>(n_eigs));
        zero_projector_term_.assign(m, std::vector<Complex>(m, Complex(0)));
        zero_nilpotent_term_.assign(m, std::vector<Complex>(m, Complex(0)));
    }

    // rows <<1| M_k and columns M_k |pi>>, shared by both constructions
    std::pair<std::vector<CMatrix>, std::vector<CMatrix>> sandwich() const {
        const ChannelProcess<Complex>& p = *process_;
        CMatrix one_row = adjoint(vectorize(CMatrix::identity(p.dim())));
        CMatrix pi_vec = vectorize(p.jump_steady_state);
        std::vector<CMatrix> rows, cols;
        for (std::size_t k = 0; k < p.symbols.size(); ++k) {
            rows.push_back(one_row * p.channel_matrix(static_cast<int>(k)));
            cols.push_back(p.channel_matrix(static_cast<int>(k)) * pi_vec);
        }
        return {rows, cols};
    }

    void build_from_eigenpairs(const SpectralData& s) {
        const ChannelProcess<Complex>& p = *process_;
        const Index n = p.dim() * p.dim();

        std::size_t stationary = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
            double dist = std::abs(s.eigenvalues[j] - Complex(1.0));
            if (dist < best) {
                best = dist;
                stationary = j;
            }
        }

        auto [rows, cols] = sandwich();
        allocate(s.eigenvalues.size() - 1);
        eigenvalues_.clear();
        for (std::size_t j = 0; j < s.eigenvalues.size(); ++j)
            if (j != stationary) eigenvalues_.push_back(s.eigenvalues[j]);
        for (std::size_t k = 0; k < p.symbols.size(); ++k) {
            std::size_t slot = 0;
            for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
                if (j == stationary) continue;
                Complex h(0), t(0);
                for (Index i = 0; i < n; ++i) {
                    h += rows[k](0, i) * s.right(i, static_cast<Index>(j));
                    t += s.left(static_cast<Index>(j), i) * cols[k](i, 0);
                }
                head_[k][slot] = h;
                tail_[k][slot] = t;
                ++slot;
            }
        }
    }

    void build_defective() {
        const ChannelProcess<Complex>& p = *process_;
        const Index n = p.dim() * p.dim();
        const std::size_t m = p.symbols.size();

        // exact stationary deflation: B = M - |pi>><<1|
        CMatrix one_row = adjoint(vectorize(CMatrix::identity(p.dim())));
        CMatrix pi_vec = vectorize(p.jump_steady_state);
        CMatrix deflated = p.total_map.matrix - pi_vec * one_row;

        // the square of the deflated map is semisimple when the defect has
        // index two; its nonzero eigenspaces carry the whole memory structure
        SpectralData sq = eig(deflated * deflated, p.tol.cond_max);
        if (!sq.diagonalizable)
            throw NumericError("squared deflated map is still defective; spectral route unavailable");
        std::vector<Index> keep;
        double top = 0;
        for (const auto& nu : sq.eigenvalues) top = std::max(top, std::abs(nu));
        for (std::size_t j = 0; j < sq.eigenvalues.size(); ++j)
            if (std::abs(sq.eigenvalues[j]) > 1e-8 * std::max(top, 1.0))
                keep.push_back(static_cast<Index>(j));
        const Index r = static_cast<Index>(keep.size());

        // restrict B to the invariant subspace spanned by the kept columns
        CMatrix basis(n, r), dual(r, n);
        for (Index c = 0; c < r; ++c)
            for (Index i = 0; i < n; ++i) {
                basis(i, c) = sq.right(i, keep[static_cast<std::size_t>(c)]);
                dual(c, i) = sq.left(keep[static_cast<std::size_t>(c)], i);
            }
        CMatrix reduced = dual * deflated * basis;
        SpectralData rs = eig(reduced, p.tol.cond_max);
        if (!rs.diagonalizable)
            throw NumericError("nonzero part of the one-step map is defective; spectral route unavailable");

        eigenvalues_ = rs.eigenvalues;
        auto [rows, cols] = sandwich();
        allocate(eigenvalues_.size());
        CMatrix lift_right = basis * rs.right;  // columns u_j in the full space
        CMatrix lift_left = rs.left * dual;     // rows v_j in the full space
        for (std::size_t k = 0; k < m; ++k)
            for (Index j = 0; j < r; ++j) {
                Complex h(0), t(0);
                for (Index i = 0; i < n; ++i) {
                    h += rows[k](0, i) * lift_right(i, j);
                    t += lift_left(j, i) * cols[k](i, 0);
                }
                head_[k][static_cast<std::size_t>(j)] = h;
                tail_[k][static_cast<std::size_t>(j)] = t;
            }

        // zero-cluster corrections: projector P0 = Q - P_nonzero feeds N = 2,
        // its nilpotent B P0 feeds N = 3, and nothing survives beyond that
        CMatrix q = CMatrix::identity(n) - pi_vec * one_row;
        CMatrix p_zero = q - basis * dual;
        CMatrix nilpotent = deflated * p_zero;
        for (std::size_t ka = 0; ka < m; ++ka)
            for (std::size_t kb = 0; kb < m; ++kb) {
                zero_projector_term_[kb][ka] = (rows[kb] * p_zero * cols[ka])(0, 0);
                zero_nilpotent_term_[kb][ka] = (rows[kb] * nilpotent * cols[ka])(0, 0);
            }
    }

    const ChannelProcess<Complex>* process_;
    std::vector<double> singles_;
    std::vector<Complex> eigenvalues_;                       // non-stationary (nonzero in defective route)
    std::vector<std::vector<Complex>> head_, tail_;          // [symbol][eig]
    std::vector<std::vector<Complex>> zero_projector_term_;  // [kN][k1]
    std::vector<std::vector<Complex>> zero_nilpotent_term_;
};

inline double spectral_two_point(const ChannelProcess<Complex>& p, int k1, int kn, int order) {
    return SpectralTwoPoint(p).probability(k1, kn, order);
}

// I(k_1 : k_N) in nats, with 0 ln 0 = 0. Uses the direct two-point route.
inline double mutual_information(const ChannelProcess<Complex>& p, int order) {
    if (order < 2) throw ConfigError("mutual information needs N >= 2");
    const std::size_t m = p.symbols.size();
    std::vector<double> singles(m);
    for (std::size_t k = 0; k < m; ++k) singles[k] = single_outcome(p, static_cast<int>(k));
    double mi = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            double joint = two_point(p, static_cast<int>(a), static_cast<int>(b), order);
            if (joint <= 0) continue;
            mi += joint * std::log(joint / (singles[a] * singles[b]));
        }
    return mi;
}

// P(next | history) for every channel, via the normalized propagated state.
template <class S>
std::map<std::string, double> conditional_next(const ChannelProcess<S>& p,
                                               const std::vector<int>& history,
                                               const Matrix<S>& initial) {
    Matrix<S> v = vectorize(initial);
    for (int k : history) {
        v = p.channel_matrix(k) * v;
        RealOf<S> w = FieldTraits<S>::real(trace_of_vectorized(v, p.dim()));
        if (!(w > 0)) throw ConditioningError("conditioning on a zero-probability history");
        const S norm = FieldTraits<S>::from_real(w);
        for (auto& x : v.data()) x /= norm;
    }
    std::map<std::string, double> out;
    for (std::size_t k = 0; k < p.symbols.size(); ++k) {
        Matrix<S> clicked = p.channel_matrix(static_cast<int>(k)) * v;
        double w = FieldTraits<S>::real_to_double(
            FieldTraits<S>::real(trace_of_vectorized(clicked, p.dim())));
        out[p.symbols[k]] = w < 0 ? 0.0 : w;
    }
    return out;
}

template <class S>
std::map<std::string, double> conditional_next(const ChannelProcess<S>& p,
                                               const std::vector<int>& history) {
    return conditional_next(p, history, p.jump_steady_state);
}

struct LogLikelihood {
    double value = 0.0;      // ln P(sequence); -inf when impossible
    bool impossible = false;
};

// ln P(seq) accumulated stepwise with per-step renormalization, so arbitrarily
// long strings never underflow.
inline LogLikelihood log_likelihood(const ChannelProcess<Complex>& p, const std::vector<int>& seq,
                                    const CMatrix& initial) {
    if (seq.empty()) throw ConfigError("empty symbol sequence");
    LogLikelihood out;
    CMatrix v = vectorize(initial);
    for (int k : seq) {
        v = p.channel_matrix(k) * v;
        double w = trace_of_vectorized(v, p.dim()).real();
        if (w <= 0) {
            out.value = -std::numeric_limits<double>::infinity();
            out.impossible = true;
            return out;
        }
        out.value += std::log(w);
        const Complex inv(1.0 / w, 0.0);
        for (auto& x : v.data()) x *= inv;
    }
    return out;
}

inline LogLikelihood log_likelihood(const ChannelProcess<Complex>& p, const std::vector<int>& seq) {
    return log_likelihood(p, seq, p.jump_steady_state);
}

// ---- CSV emission ----------------------------------------------------------

// All CSV floats carry 12 significant digits so golden files stay stable above
// the library's 1e-10 tolerances.
inline std::string format_csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_distribution_csv(std::ostream& os, const JointDistribution& dist) {
    os << "sequence,probability\n";
    for (std::size_t i = 0; i < dist.tuple_count(); ++i)
        os << dist.sequence_label(i) << "," << format_csv_double(dist.probs[i]) << "\n";
}

}  // namespace jumppat
