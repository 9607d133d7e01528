#pragma once

#include <optional>
#include <random>

#include "jumppat/linalg.hpp"
#include "jumppat/model.hpp"
#include "jumppat/random.hpp"

namespace jumppat {

enum class SuperopRole { liouvillian, jump, no_jump, channel_map, total_map, drazin };

// d^2 x d^2 matrix acting on column-stacked operators.
template <class S>
struct Superoperator {
    Index dim = 0;  // Hilbert dimension d
    Matrix<S> matrix;
    SuperopRole role = SuperopRole::liouvillian;
};

// rate * (op^* (x) op), the click superoperator of one channel.
template <class S>
Superoperator<S> jump_superoperator(const JumpChannel<S>& channel, Index dim) {
    Matrix<S> m = kron(conjugate(channel.op), channel.op);
    m *= FieldTraits<S>::from_real(channel.rate);
    return {dim, std::move(m), SuperopRole::jump};
}

// -i[H, rho] + sum_k rate_k (op rho op^dag - 1/2 {op^dag op, rho}),
// over all channels, monitored or not.
template <class S>
Superoperator<S> build_liouvillian(const OpenSystemModel<S>& model) {
    using FT = FieldTraits<S>;
    const Index d = model.dim;
    const S minus_i = S(0) - FT::imag_unit();
    Matrix<S> l = (superop_left(model.hamiltonian) - superop_right(model.hamiltonian)) * minus_i;
    const S half = S(1) / S(2);
    for (const auto& ch : model.jumps) {
        l += jump_superoperator(ch, d).matrix;
        Matrix<S> anti = adjoint(ch.op) * ch.op;
        Matrix<S> damp = (superop_left(anti) + superop_right(anti)) * (half * FT::from_real(ch.rate));
        l -= damp;
    }
    return {d, std::move(l), SuperopRole::liouvillian};
}

// L minus the monitored click superoperators; unmonitored channels stay inside.
template <class S>
Superoperator<S> build_no_jump(const OpenSystemModel<S>& model) {
    Superoperator<S> l0 = build_liouvillian(model);
    for (std::size_t j : model.monitored_indexes())
        l0.matrix -= jump_superoperator(model.jumps[j], model.dim).matrix;
    l0.role = SuperopRole::no_jump;
    return l0;
}

// Everything derived from one model that the statistics machinery consumes:
// per-channel maps, their sum, the steady state, the post-click steady state
// and the spectrum of the one-step map. Immutable once built.
template <class S>
struct ChannelProcess {
    OpenSystemModel<S> model;
    std::vector<std::string> symbols;  // monitored labels in model order
    Superoperator<S> liouvillian;
    Superoperator<S> no_jump;
    Matrix<S> no_jump_inverse;                 // factored once, reused everywhere
    std::vector<Superoperator<S>> channel_maps;  // aligned with symbols
    Superoperator<S> total_map;
    Matrix<S> steady_state;      // d x d
    Matrix<S> jump_steady_state; // d x d, the stationary post-click state
    RealOf<S> activity{};        // monitored clicks per unit time
    std::optional<SpectralData> spectrum;  // float field only
    Tolerances tol;

    Index dim() const { return model.dim; }

    int symbol_index(const std::string& label) const {
        for (std::size_t k = 0; k < symbols.size(); ++k)
            if (symbols[k] == label) return static_cast<int>(k);
        throw ConfigError("unknown symbol '" + label + "'");
    }

    const Matrix<S>& channel_matrix(int k) const {
        return channel_maps[static_cast<std::size_t>(k)].matrix;
    }
};

template <class S>
ChannelProcess<S> build_channel_process(const OpenSystemModel<S>& model,
                                        const Tolerances& tol = {}) {
    model.validate();
    ChannelProcess<S> p;
    p.model = model;
    p.tol = tol;
    for (std::size_t j : model.monitored_indexes()) p.symbols.push_back(model.jumps[j].label);

    p.liouvillian = build_liouvillian(model);
    p.no_jump = build_no_jump(model);
    try {
        if constexpr (FieldTraits<S>::is_exact) {
            p.no_jump_inverse = exact_inverse(p.no_jump.matrix);
        } else {
            p.no_jump_inverse = inverse(p.no_jump.matrix);
        }
    } catch (const SingularMatrixError&) {
        throw DarkSubspaceError(
            "no-jump generator is singular: some subspace never produces a monitored click");
    }

    for (std::size_t j : model.monitored_indexes()) {
        Matrix<S> mk = jump_superoperator(model.jumps[j], model.dim).matrix * p.no_jump_inverse;
        mk *= S(-1);
        p.channel_maps.push_back({model.dim, std::move(mk), SuperopRole::channel_map});
    }
    Matrix<S> total(model.dim * model.dim, model.dim * model.dim);
    for (const auto& mk : p.channel_maps) total += mk.matrix;
    p.total_map = {model.dim, std::move(total), SuperopRole::total_map};

    if constexpr (FieldTraits<S>::is_exact) {
        p.steady_state = null_vector(p.liouvillian.matrix);
    } else {
        p.steady_state = null_vector(p.liouvillian.matrix, tol.tol_rank);
    }

    // pi = J rho_ss / K with J the sum of monitored click superoperators
    Matrix<S> click_sum = p.liouvillian.matrix - p.no_jump.matrix;
    Matrix<S> clicked = click_sum * vectorize(p.steady_state);
    S k_scalar = trace_of_vectorized(clicked, model.dim);
    p.activity = FieldTraits<S>::real(k_scalar);
    if (!(p.activity > 0))
        throw DarkSubspaceError("steady state produces no monitored clicks (activity <= 0)");
    Matrix<S> jss = hermitize(unvectorize(clicked, model.dim));
    for (auto& v : jss.data()) v /= FieldTraits<S>::from_real(p.activity);
    p.jump_steady_state = std::move(jss);

    if constexpr (!FieldTraits<S>::is_exact) {
        p.spectrum = eig(p.total_map.matrix, tol.cond_max);
    }
    return p;
}

// Monitored click superoperators summed: J = L - L_0.
template <class S>
Matrix<S> click_superoperator_sum(const ChannelProcess<S>& p) {
    return p.liouvillian.matrix - p.no_jump.matrix;
}

struct PositivityReport {
    int trials = 0;
    double worst_min_eigenvalue = 0.0;  // most negative eigenvalue seen across M_k rho
    double tol = 0.0;
    bool passed = true;
};

// Applies every channel map to random densities and checks positivity of the
// unnormalized outcomes. Violations beyond tolerance signal an implementation
// bug, not physics.
inline PositivityReport positivity_check(const ChannelProcess<Complex>& p, int trials,
                                         std::uint64_t seed) {
    PositivityReport report;
    report.trials = trials;
    report.tol = p.tol.tol_psd;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        CMatrix rho = random_density(p.dim(), rng);
        for (const auto& mk : p.channel_maps) {
            CMatrix out = unvectorize(mk.matrix * vectorize(rho), p.dim());
            double lo = min_hermitian_eigenvalue(out);
            report.worst_min_eigenvalue = std::min(report.worst_min_eigenvalue, lo);
        }
    }
    report.passed = report.worst_min_eigenvalue >= -report.tol;
    return report;
}

// Pseudo-inverse of the Liouvillian on the trace-zero complement of the steady
// state: with P = |rho_ss>><<1| and Q = Id - P, the operator L + P is
// invertible and Q (L + P)^{-1} Q satisfies L Lp = Lp L = Q.
struct DrazinData {
    CMatrix drazin;    // L^+
    CMatrix b_factor;  // (J L^+ - Id)^{-1}
    Complex g_factor;  // <<1| B J |rho_ss>>
};

inline DrazinData drazin_inverse(const ChannelProcess<Complex>& p) {
    const Index n = p.dim() * p.dim();
    CMatrix rho_vec = vectorize(p.steady_state);
    CMatrix one_row = adjoint(vectorize(CMatrix::identity(p.dim())));  // <<1| as a row
    CMatrix proj = rho_vec * one_row;                                  // P
    CMatrix q = CMatrix::identity(n) - proj;

    CMatrix shifted = p.liouvillian.matrix + proj;
    CMatrix inv;
    try {
        inv = inverse(shifted);
    } catch (const SingularMatrixError&) {
        throw DegeneracyError("Liouvillian restricted to the trace-zero complement is singular");
    }
    DrazinData d;
    d.drazin = q * inv * q;

    CMatrix clicks = click_superoperator_sum(p);
    CMatrix b_inv = clicks * d.drazin - CMatrix::identity(n);
    try {
        d.b_factor = inverse(b_inv);
    } catch (const SingularMatrixError&) {
        throw DegeneracyError("J L^+ - Id is singular");
    }
    CMatrix g = one_row * d.b_factor * clicks * rho_vec;
    d.g_factor = g(0, 0);
    return d;
}

struct DrazinReport {
    double dev_no_jump_inverse = 0.0;
    double dev_total_map = 0.0;
};

// Cross-checks the closed-form expressions of L_0^{-1} and of the one-step map
// through the Drazin inverse. Only derived for fully monitored models, where
// J = L - L_0 covers every channel; refuses otherwise.
inline DrazinReport verify_drazin_relations(const ChannelProcess<Complex>& p,
                                            const DrazinData& d) {
    if (!p.model.fully_monitored())
        throw ConfigError("Drazin relations require every channel to be monitored");
    const Index n = p.dim() * p.dim();
    CMatrix rho_vec = vectorize(p.steady_state);
    CMatrix one_row = adjoint(vectorize(CMatrix::identity(p.dim())));
    CMatrix clicks = click_superoperator_sum(p);
    const Complex inv_g = Complex(1.0) / d.g_factor;

    CMatrix rank1 = rho_vec * (one_row * d.b_factor);  // |rho_ss>><<1| B
    CMatrix l0_rhs =
        -(d.drazin * d.b_factor) +
        (d.drazin * d.b_factor * clicks - CMatrix::identity(n)) * rank1 * inv_g;
    CMatrix m_rhs = CMatrix::identity(n) + d.b_factor -
                    d.b_factor * clicks * rank1 * inv_g;

    DrazinReport report;
    report.dev_no_jump_inverse = max_abs_diff(l0_rhs, p.no_jump_inverse);
    report.dev_total_map = max_abs_diff(m_rhs, p.total_map.matrix);
    return report;
}

}  // namespace jumppat
