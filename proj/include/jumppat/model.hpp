#pragma once

#include <set>
#include <string>
#include <vector>

#include "jumppat/matrix.hpp"

namespace jumppat {

// Qubit basis convention, fixed repo-wide: per site, basis index 0 carries an
// excitation (spin up) and index 1 is empty. Site 1 occupies the most
// significant bit, so the fully occupied chain |11...1> is basis index 0 and
// the empty chain |00...0> is index 2^L - 1.
enum class SpinKind { plus, minus, z };

namespace detail {

template <class S>
Matrix<S> single_spin(SpinKind kind) {
    Matrix<S> m(2, 2);
    switch (kind) {
        case SpinKind::plus: m(0, 1) = S(1); break;
        case SpinKind::minus: m(1, 0) = S(1); break;
        case SpinKind::z:
            m(0, 0) = S(1);
            m(1, 1) = S(-1);
            break;
    }
    return m;
}

}  // namespace detail

// I (x) ... (x) sigma_kind (x) ... (x) I with the operator at `site` (1-based).
template <class S>
Matrix<S> spin_operator(int site, SpinKind kind, int sites) {
    if (site < 1 || site > sites) throw DimensionError("spin site index out of range");
    Matrix<S> op = Matrix<S>::identity(1);
    for (int s = 1; s <= sites; ++s)
        op = kron(op, s == site ? detail::single_spin<S>(kind) : Matrix<S>::identity(2));
    return op;
}

// Basis index of the product state with the given site occupations (site 1 first).
inline Index basis_state_index(const std::vector<int>& occupations) {
    Index idx = 0;
    for (int n : occupations) idx = 2 * idx + (n ? 0 : 1);
    return idx;
}

template <class S>
struct JumpChannel {
    std::string label;
    Matrix<S> op;      // jump operator up to the rate prefactor
    RealOf<S> rate;    // full operator is sqrt(rate) * op; keeps exact mode rational
};

template <class S>
struct OpenSystemModel {
    Index dim = 0;
    Matrix<S> hamiltonian;
    std::vector<JumpChannel<S>> jumps;
    std::vector<std::string> monitored;  // labels; order fixes the symbol alphabet

    void validate(double tol = 1e-12) const {
        if (dim <= 0 || hamiltonian.rows() != dim || hamiltonian.cols() != dim)
            throw ConfigError("model Hamiltonian has wrong shape");
        if (!is_hermitian(hamiltonian, tol))
            throw ConfigError("model Hamiltonian is not Hermitian");
        std::set<std::string> labels;
        for (const auto& j : jumps) {
            if (j.op.rows() != dim || j.op.cols() != dim)
                throw ConfigError("jump operator '" + j.label + "' has wrong shape");
            if (!labels.insert(j.label).second)
                throw ConfigError("duplicate jump label '" + j.label + "'");
            if (j.rate < 0) throw ConfigError("negative rate on channel '" + j.label + "'");
        }
        if (monitored.empty()) throw ConfigError("monitored channel set is empty");
        std::set<std::string> seen;
        for (const auto& m : monitored) {
            if (!labels.count(m)) throw ConfigError("monitored label '" + m + "' is not a channel");
            if (!seen.insert(m).second) throw ConfigError("duplicate monitored label '" + m + "'");
        }
    }

    std::vector<std::size_t> monitored_indexes() const {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < jumps.size(); ++j)
            for (const auto& m : monitored)
                if (jumps[j].label == m) idx.push_back(j);
        return idx;
    }

    bool fully_monitored() const { return monitored.size() == jumps.size(); }
};

// Boundary-driven chain parameters. hopping sets the energy unit; kappa = 0
// gives the number-conserving chain, kappa != 0 adds pair creation/annihilation.
// The particle current observable is named `current` elsewhere to keep it
// distinct from the hopping amplitude.
template <class S>
struct ChainSpec {
    int length = 1;
    RealOf<S> hopping = RealOf<S>(1);
    RealOf<S> gamma = RealOf<S>(1);
    RealOf<S> kappa = RealOf<S>(0);
};

// H = hopping * sum_i (s+_i s-_{i+1} + s-_i s+_{i+1})
//   + kappa   * sum_i (s+_i s+_{i+1} + s-_i s-_{i+1})
// with injection on site 1 and extraction on site L, both monitored.
template <class S>
OpenSystemModel<S> build_xy_chain(const ChainSpec<S>& spec) {
    using FT = FieldTraits<S>;
    if (spec.length < 1) throw ConfigError("chain length must be at least 1");
    if (!(spec.gamma > 0)) throw ConfigError("chain gamma must be positive");
    const int L = spec.length;
    const Index dim = Index(1) << L;

    Matrix<S> h(dim, dim);
    for (int i = 1; i < L; ++i) {
        Matrix<S> up_i = spin_operator<S>(i, SpinKind::plus, L);
        Matrix<S> dn_i = spin_operator<S>(i, SpinKind::minus, L);
        Matrix<S> up_n = spin_operator<S>(i + 1, SpinKind::plus, L);
        Matrix<S> dn_n = spin_operator<S>(i + 1, SpinKind::minus, L);
        Matrix<S> hop = up_i * dn_n + dn_i * up_n;
        h += hop * FT::from_real(spec.hopping);
        if (!(spec.kappa == RealOf<S>(0))) {
            Matrix<S> pair = up_i * up_n + dn_i * dn_n;
            h += pair * FT::from_real(spec.kappa);
        }
    }

    OpenSystemModel<S> model;
    model.dim = dim;
    model.hamiltonian = std::move(h);
    model.jumps.push_back({"I", spin_operator<S>(1, SpinKind::plus, L), spec.gamma});
    model.jumps.push_back({"E", spin_operator<S>(L, SpinKind::minus, L), spec.gamma});
    model.monitored = {"I", "E"};
    model.validate();
    return model;
}

template <class S>
Matrix<S> total_number_operator(int sites) {
    const Index dim = Index(1) << sites;
    Matrix<S> n(dim, dim);
    for (int i = 1; i <= sites; ++i)
        n += spin_operator<S>(i, SpinKind::plus, sites) * spin_operator<S>(i, SpinKind::minus, sites);
    return n;
}

// True iff the Hamiltonian commutes with the total number operator. Used by
// the pattern machinery to predict particle-number sector structure.
template <class S>
bool particle_number_conserved(const OpenSystemModel<S>& model, double tol = 1e-12) {
    int sites = 0;
    while ((Index(1) << sites) < model.dim) ++sites;
    if ((Index(1) << sites) != model.dim)
        throw DimensionError("particle_number_conserved expects a qubit-chain dimension");
    Matrix<S> n = total_number_operator<S>(sites);
    Matrix<S> comm = model.hamiltonian * n - n * model.hamiltonian;
    if constexpr (FieldTraits<S>::is_exact) {
        (void)tol;
        return is_zero_matrix(comm);
    } else {
        return max_abs(comm) <= tol;
    }
}

}  // namespace jumppat
