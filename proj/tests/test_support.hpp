#pragma once

// Shared fixtures and independent oracles for the test suites. Everything here
// is deliberately decoupled from the library's superoperator pipeline so the
// tests cross-check rather than echo the implementation.

#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "jumppat/channel_engine.hpp"
#include "jumppat/model.hpp"
#include "jumppat/random.hpp"

namespace jumppat::testing {

inline OpenSystemModel<Complex> xx_chain(int length, double gamma = 1.0) {
    ChainSpec<Complex> spec;
    spec.length = length;
    spec.gamma = gamma;
    return build_xy_chain(spec);
}

inline OpenSystemModel<Complex> xy_chain(int length, double gamma, double kappa) {
    ChainSpec<Complex> spec;
    spec.length = length;
    spec.gamma = gamma;
    spec.kappa = kappa;
    return build_xy_chain(spec);
}

inline OpenSystemModel<ExactComplex> exact_xx_chain(int length, mpq_class gamma = 1) {
    ChainSpec<ExactComplex> spec;
    spec.length = length;
    spec.gamma = std::move(gamma);
    return build_xy_chain(spec);
}

inline OpenSystemModel<ExactComplex> exact_xy_chain(int length, mpq_class gamma,
                                                    mpq_class kappa) {
    ChainSpec<ExactComplex> spec;
    spec.length = length;
    spec.gamma = std::move(gamma);
    spec.kappa = std::move(kappa);
    return build_xy_chain(spec);
}

// Random model with a dense Hamiltonian and dense jump operators; such models
// almost surely have a unique steady state and an invertible no-jump generator.
inline OpenSystemModel<Complex> random_model(Index dim, int n_jumps, std::mt19937_64& rng,
                                             bool monitor_all = true) {
    OpenSystemModel<Complex> model;
    model.dim = dim;
    model.hamiltonian = hermitize(gaussian_complex_matrix(dim, dim, rng));
    for (int j = 0; j < n_jumps; ++j) {
        CMatrix op = gaussian_complex_matrix(dim, dim, rng);
        op *= Complex(1.0 / std::sqrt(double(dim)), 0.0);
        model.jumps.push_back({"c" + std::to_string(j), op, 1.0});
    }
    if (monitor_all) {
        for (const auto& j : model.jumps) model.monitored.push_back(j.label);
    } else {
        std::uniform_int_distribution<int> pick(0, n_jumps - 1);
        model.monitored.push_back(model.jumps[pick(rng)].label);
    }
    return model;
}

inline CMatrix basis_density(Index dim, Index index) {
    CMatrix rho(dim, dim);
    rho(index, index) = 1.0;
    return rho;
}

inline XMatrix exact_basis_density(Index dim, Index index) {
    XMatrix rho(dim, dim);
    rho(index, index) = ExactComplex(1);
    return rho;
}

// ---- independent enumeration oracle for the two-site chain -----------------
//
// The two-site chain runs over three post-click states (full, one particle,
// empty). Extraction walks down, injection walks up, and from the middle state
// both clicks occur with probability 1/2. The stationary occupation is
// (1/4, 1/2, 1/4). Everything below is hand-derived from that picture alone.
struct TwoSiteChainOracle {
    // state order: 0 = full, 1 = middle, 2 = empty; symbols: 0 = I, 1 = E
    static constexpr std::array<double, 3> stationary{0.25, 0.5, 0.25};

    // transition probability and successor per (state, symbol); -1 = impossible
    static int successor(int state, int symbol) {
        if (state == 0) return symbol == 1 ? 1 : -1;  // full: only extraction
        if (state == 2) return symbol == 0 ? 1 : -1;  // empty: only injection
        return symbol == 0 ? 0 : 2;                   // middle: branch
    }
    static double probability(int state, int symbol) {
        if (state == 1) return 0.5;
        return successor(state, symbol) >= 0 ? 1.0 : 0.0;
    }

    // joint probability of a symbol word starting from the stationary mixture
    static double word_probability(const std::vector<int>& word) {
        double total = 0.0;
        for (int s = 0; s < 3; ++s) {
            double p = stationary[static_cast<std::size_t>(s)];
            int state = s;
            for (int sym : word) {
                double step = probability(state, sym);
                if (step == 0.0) {
                    p = 0.0;
                    break;
                }
                p *= step;
                state = successor(state, sym);
            }
            total += p;
        }
        return total;
    }

    static std::map<std::string, double> order2_table() {
        std::map<std::string, double> t;
        const char* names[2] = {"I", "E"};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                t[std::string(names[a]) + names[b]] = word_probability({a, b});
        return t;
    }

    static double mutual_information_order2() {
        double mi = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double pab = word_probability({a, b});
                double pa = word_probability({a});
                double pb = word_probability({b});
                if (pab > 0) mi += pab * std::log(pab / (pa * pb));
            }
        return mi;
    }
};

}  // namespace jumppat::testing
