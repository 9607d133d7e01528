#pragma once

#include <random>

#include "jumppat/matrix.hpp"

namespace jumppat {

inline CMatrix gaussian_complex_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(rows, cols);
    for (auto& v : m.data()) v = Complex(normal(rng), normal(rng));
    return m;
}

// Ginibre construction: G G^dag normalized to unit trace is a valid density
// matrix of full rank almost surely.
inline CMatrix random_density(Index dim, std::mt19937_64& rng) {
    CMatrix g = gaussian_complex_matrix(dim, dim, rng);
    CMatrix rho = g * adjoint(g);
    rho *= Complex(1.0 / trace(rho).real(), 0.0);
    return rho;
}

}  // namespace jumppat
