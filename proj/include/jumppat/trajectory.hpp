#pragma once

#include <cstdint>
#include <type_traits>
#include <random>

#include "jumppat/parallel.hpp"
#include "jumppat/statistics.hpp"

namespace jumppat {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Splitting rule for ensembles: trajectory i runs on splitmix64(master ^ splitmix64(i+1)).
inline std::uint64_t derive_trajectory_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

template <class S>
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<int> symbols;
    std::vector<Matrix<S>> states;  // post-click states; front() is the state recording began from
    Matrix<S> initial;              // equals states.front() when states are recorded
};

namespace detail {

// Click weights tr(M_k rho) for every monitored channel. Float weights within
// floating slack of zero are clamped; exact weights are exact and sum to one.
template <class S>
std::vector<RealOf<S>> click_weights(const ChannelProcess<S>& p, const Matrix<S>& state_vec) {
    std::vector<RealOf<S>> w;
    w.reserve(p.symbols.size());
    for (std::size_t k = 0; k < p.symbols.size(); ++k) {
        Matrix<S> clicked = p.channel_matrix(static_cast<int>(k)) * state_vec;
        w.push_back(FieldTraits<S>::real(trace_of_vectorized(clicked, p.dim())));
    }
    return w;
}

}  // namespace detail

// One post-click update: samples channel k with weight tr(M_k rho), returns
// the emitted symbol and the renormalized, re-Hermitized successor state.
// Both fields consume exactly one uniform draw per step, so float and exact
// runs with the same seed follow the same branch decisions.
template <class S>
std::pair<int, Matrix<S>> step(const ChannelProcess<S>& p, const Matrix<S>& state,
                               std::mt19937_64& rng) {
    Matrix<S> v = vectorize(state);
    std::vector<RealOf<S>> weights = detail::click_weights(p, v);

    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    int chosen = -1;
    if constexpr (FieldTraits<S>::is_exact) {
        mpq_class target = rational_from_double(u);  // exact dyadic rational
        mpq_class cumulative(0);
        for (std::size_t k = 0; k < weights.size(); ++k) {
            cumulative += weights[k];
            if (cumulative > target) {
                chosen = static_cast<int>(k);
                break;
            }
        }
        if (chosen < 0) {
            // exact weights sum to one; only an all-zero state can land here
            for (std::size_t k = weights.size(); k-- > 0;)
                if (sgn(weights[k]) > 0) {
                    chosen = static_cast<int>(k);
                    break;
                }
        }
    } else {
        double total = 0;
        for (auto& w : weights) {
            if (w < 0) w = 0;  // CP guarantees nonnegativity analytically
            total += w;
        }
        if (!(total > 0)) throw DarkStateError("state assigns zero weight to every channel");
        double target = u * total;
        double cumulative = 0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            cumulative += weights[k];
            if (cumulative > target) {
                chosen = static_cast<int>(k);
                break;
            }
        }
        if (chosen < 0) {
            for (std::size_t k = weights.size(); k-- > 0;)
                if (weights[k] > 0) {
                    chosen = static_cast<int>(k);
                    break;
                }
        }
    }
    if (chosen < 0) throw DarkStateError("state assigns zero weight to every channel");

    Matrix<S> next_vec = p.channel_matrix(chosen) * v;
    S norm = FieldTraits<S>::from_real(FieldTraits<S>::real(trace_of_vectorized(next_vec, p.dim())));
    for (auto& x : next_vec.data()) x /= norm;
    return {chosen, hermitize(unvectorize(next_vec, p.dim()))};
}

// Deterministic function of (process, steps, seed, burn_in, initial): burn-in
// steps consume the random stream but are dropped from the record, so the
// burn-in record equals the suffix of the unburned one on the same seed.
template <class S>
TrajectoryRecord<S> simulate(const ChannelProcess<S>& p, std::size_t steps, std::uint64_t seed,
                             std::size_t burn_in = 0,
                             const std::type_identity_t<Matrix<S>>* initial = nullptr,
                             bool record_states = true) {
    if (steps < 1) throw ConfigError("simulate needs at least one step");
    TrajectoryRecord<S> record;
    record.seed = seed;
    std::mt19937_64 rng(seed);
    Matrix<S> state = initial ? *initial : p.jump_steady_state;
    for (std::size_t t = 0; t < burn_in; ++t) state = step(p, state, rng).second;
    record.initial = state;
    if (record_states) record.states.push_back(state);
    record.symbols.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        auto [symbol, next] = step(p, state, rng);
        record.symbols.push_back(symbol);
        state = std::move(next);
        if (record_states) record.states.push_back(state);
    }
    return record;
}

// Ensemble with one independent generator per trajectory derived from the
// master seed; aggregation order never depends on scheduling.
template <class S>
std::vector<TrajectoryRecord<S>> simulate_ensemble(const ChannelProcess<S>& p, int trajectories,
                                                   std::size_t steps, std::uint64_t master_seed,
                                                   std::size_t burn_in = 0,
                                                   const std::type_identity_t<Matrix<S>>* initial = nullptr,
                                                   bool record_states = true, int threads = 0) {
    std::vector<TrajectoryRecord<S>> records(static_cast<std::size_t>(trajectories));
    parallel_for(
        records.size(),
        [&](std::size_t i) {
            records[i] = simulate(p, steps, derive_trajectory_seed(master_seed, i), burn_in,
                                  initial, record_states);
        },
        threads);
    return records;
}

// Sliding-window tuple counts across records, normalized into a distribution.
template <class S>
JointDistribution empirical_distribution(const std::vector<TrajectoryRecord<S>>& records,
                                         const std::vector<std::string>& symbols, int order) {
    if (order < 1) throw ConfigError("distribution order must be at least 1");
    JointDistribution dist;
    dist.order = order;
    dist.symbols = symbols;
    std::size_t tuples = 1;
    for (int i = 0; i < order; ++i) tuples *= symbols.size();
    dist.probs.assign(tuples, 0.0);

    std::size_t windows = 0;
    for (const auto& rec : records) {
        if (rec.symbols.size() < static_cast<std::size_t>(order)) continue;
        for (std::size_t start = 0; start + order <= rec.symbols.size(); ++start) {
            std::size_t idx = 0;
            for (int i = 0; i < order; ++i)
                idx = idx * symbols.size() +
                      static_cast<std::size_t>(rec.symbols[start + static_cast<std::size_t>(i)]);
            dist.probs[idx] += 1.0;
            ++windows;
        }
    }
    if (windows == 0) throw ConfigError("not enough symbols for the requested order");
    for (auto& pb : dist.probs) pb /= double(windows);
    return dist;
}

}  // namespace jumppat
