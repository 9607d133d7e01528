#include <catch2/catch_amalgamated.hpp>

#include "jumppat/channel_engine.hpp"
#include "test_support.hpp"

using namespace jumppat;
using namespace jumppat::testing;

namespace {

CMatrix one_row(Index d) { return adjoint(vectorize(CMatrix::identity(d))); }

}  // namespace

TEST_CASE("liouvillian of pure decay") {
    OpenSystemModel<Complex> model;
    model.dim = 2;
    model.hamiltonian = CMatrix(2, 2);
    model.jumps.push_back({"d", spin_operator<Complex>(1, SpinKind::minus, 1), 1.0});
    model.monitored = {"d"};
    Superoperator<Complex> l = build_liouvillian(model);

    CMatrix occupied = basis_density(2, 0);
    CMatrix empty = basis_density(2, 1);
    CMatrix out = unvectorize(l.matrix * vectorize(occupied), 2);
    CHECK(max_abs_diff(out, empty - occupied) < 1e-15);
}

TEST_CASE("trace functional annihilates the liouvillian") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 5; ++t) {
        OpenSystemModel<Complex> model = random_model(3, 2, rng);
        Superoperator<Complex> l = build_liouvillian(model);
        CHECK(max_abs(one_row(3) * l.matrix) < 1e-13);
    }
}

TEST_CASE("one-site chain: steady state, no-jump generator, channel maps") {
    ChannelProcess<Complex> p = build_channel_process(xx_chain(1));

    CMatrix half = CMatrix::identity(2);
    half *= Complex(0.5);
    CHECK(max_abs_diff(p.steady_state, half) < 1e-12);

    // at gamma = 1 the no-jump generator is minus the identity
    CHECK(max_abs_diff(p.no_jump.matrix, -CMatrix::identity(4)) < 1e-13);

    // extraction map sends the occupied state to the empty one
    int e = p.symbol_index("E");
    CMatrix out = unvectorize(p.channel_matrix(e) * vectorize(basis_density(2, 0)), 2);
    CHECK(max_abs_diff(out, basis_density(2, 1)) < 1e-13);

    CHECK(max_abs_diff(p.jump_steady_state, half) < 1e-12);
    CHECK(p.activity == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("no-jump generator matches the effective-Hamiltonian form when fully monitored") {
    std::mt19937_64 rng(22);
    OpenSystemModel<Complex> model = random_model(4, 2, rng);
    Superoperator<Complex> l0 = build_no_jump(model);

    CMatrix heff = model.hamiltonian;
    for (const auto& ch : model.jumps) {
        CMatrix damp = adjoint(ch.op) * ch.op;
        damp *= Complex(0.0, -0.5 * ch.rate);
        heff += damp;
    }
    const Complex minus_i(0.0, -1.0);
    CMatrix expected = (superop_left(heff) - superop_right(adjoint(heff))) * minus_i;
    CHECK(max_abs_diff(l0.matrix, expected) < 1e-12);
}

TEST_CASE("partial monitoring keeps unmonitored clicks inside the no-jump generator") {
    std::mt19937_64 rng(23);
    OpenSystemModel<Complex> model = random_model(3, 3, rng);
    Superoperator<Complex> full = build_no_jump(model);

    OpenSystemModel<Complex> partial = model;
    partial.monitored = {model.jumps[0].label};
    Superoperator<Complex> l0p = build_no_jump(partial);

    CMatrix diff = l0p.matrix - full.matrix;
    CMatrix expected = jump_superoperator(model.jumps[1], 3).matrix +
                       jump_superoperator(model.jumps[2], 3).matrix;
    CHECK(max_abs_diff(diff, expected) < 1e-13);
}

TEST_CASE("channel maps sum to a trace-preserving one-step map") {
    std::mt19937_64 rng(24);
    for (int t = 0; t < 5; ++t) {
        OpenSystemModel<Complex> model = random_model(3, 2, rng, t % 2 == 0);
        ChannelProcess<Complex> p = build_channel_process(model);
        CHECK(max_abs(one_row(3) * p.total_map.matrix - one_row(3)) < 1e-12);

        // one-step stationarity of the post-click steady state
        CMatrix pi_vec = vectorize(p.jump_steady_state);
        CHECK(max_abs(p.total_map.matrix * pi_vec - pi_vec) < 1e-10);

        // normalization of the single-click weights on random densities
        CMatrix rho = random_density(3, rng);
        double total = 0;
        for (const auto& mk : p.channel_maps)
            total += trace_of_vectorized(mk.matrix * vectorize(rho), 3).real();
        CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("spectrum of the one-step map stays inside the closed unit disk") {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 10; ++t) {
        OpenSystemModel<Complex> model = random_model(2 + t % 3, 1 + t % 3, rng);
        ChannelProcess<Complex> p = build_channel_process(model);
        REQUIRE(p.spectrum.has_value());
        for (const auto& mu : p.spectrum->eigenvalues) CHECK(std::abs(mu) <= 1.0 + 1e-10);
    }
}

TEST_CASE("exact channel process of the one-site chain") {
    ChannelProcess<ExactComplex> p = build_channel_process(exact_xx_chain(1));
    XMatrix half(2, 2);
    half(0, 0) = ExactComplex(make_rational(1, 2));
    half(1, 1) = ExactComplex(make_rational(1, 2));
    CHECK(p.steady_state == half);
    CHECK(p.jump_steady_state == half);
    CHECK(p.activity == make_rational(1));

    // extraction acts as the bare click map since L_0 = -Id at gamma = 1
    int e = p.symbol_index("E");
    XMatrix out = unvectorize(p.channel_matrix(e) * vectorize(exact_basis_density(2, 0)), 2);
    CHECK(out == exact_basis_density(2, 1));

    // exact trace preservation of the one-step map
    XMatrix row = adjoint(vectorize(XMatrix::identity(2)));
    CHECK(is_zero_matrix(row * p.total_map.matrix - row));
}

TEST_CASE("positivity of channel-map outputs") {
    ChannelProcess<Complex> p1 = build_channel_process(xx_chain(1));
    int e = p1.symbol_index("E");
    CMatrix out = unvectorize(p1.channel_matrix(e) * vectorize(basis_density(2, 1)), 2);
    CHECK(max_abs(out) < 1e-14);  // extraction annihilates the empty state

    PositivityReport r2 = positivity_check(build_channel_process(xx_chain(2)), 100, 77);
    CHECK(r2.passed);
    CHECK(r2.worst_min_eigenvalue >= -1e-12);

    // three-level system with only one of two channels monitored
    std::mt19937_64 rng(26);
    OpenSystemModel<Complex> model = random_model(3, 2, rng, false);
    PositivityReport r3 = positivity_check(build_channel_process(model), 50, 78);
    CHECK(r3.passed);
}

TEST_CASE("drazin inverse kernel, cokernel and defining relation") {
    for (int length : {1, 2}) {
        ChannelProcess<Complex> p = build_channel_process(xx_chain(length));
        DrazinData d = drazin_inverse(p);
        const Index n = p.dim() * p.dim();

        CMatrix rho_vec = vectorize(p.steady_state);
        CHECK(max_abs(d.drazin * rho_vec) < 1e-11);
        CHECK(max_abs(one_row(p.dim()) * d.drazin) < 1e-11);

        CMatrix expected = CMatrix::identity(n) - rho_vec * one_row(p.dim());
        CHECK(max_abs_diff(p.liouvillian.matrix * d.drazin, expected) < 1e-9);
        CHECK(max_abs_diff(d.drazin * p.liouvillian.matrix, expected) < 1e-9);
    }
}

TEST_CASE("drazin inverse agrees with the eigendecomposition oracle") {
    ChannelProcess<Complex> p = build_channel_process(xx_chain(1));
    DrazinData d = drazin_inverse(p);

    // oracle: sum over nonzero eigenvalues of 1/lambda |x_j>><<y_j|
    SpectralData s = eig(p.liouvillian.matrix);
    REQUIRE(s.diagonalizable);
    const Index n = 4;
    CMatrix oracle(n, n);
    for (Index j = 0; j < n; ++j) {
        if (std::abs(s.eigenvalues[j]) < 1e-12) continue;
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b)
                oracle(a, b) += s.right(a, j) * s.left(j, b) / s.eigenvalues[j];
    }
    std::mt19937_64 rng(27);
    for (int t = 0; t < 5; ++t) {
        CMatrix v = gaussian_complex_matrix(n, 1, rng);
        CHECK(max_abs_diff(d.drazin * v, oracle * v) < 1e-10);
    }
}

TEST_CASE("drazin relations reproduce the no-jump inverse and the one-step map") {
    for (int length : {1, 2}) {
        ChannelProcess<Complex> p = build_channel_process(xx_chain(length));
        DrazinData d = drazin_inverse(p);
        DrazinReport r = verify_drazin_relations(p, d);
        CHECK(r.dev_no_jump_inverse < 1e-10);
        CHECK(r.dev_total_map < 1e-10);

        // cross-identity B^{-1} = -|rho_ss>><<1| - L_0 L^+
        const Index n = p.dim() * p.dim();
        CMatrix b_inv = click_superoperator_sum(p) * d.drazin - CMatrix::identity(n);
        CMatrix rhs = -(vectorize(p.steady_state) * one_row(p.dim())) -
                      p.no_jump.matrix * d.drazin;
        CHECK(max_abs_diff(b_inv, rhs) < 1e-9);
    }
}

TEST_CASE("drazin relations refuse partially monitored models") {
    std::mt19937_64 rng(28);
    OpenSystemModel<Complex> model = random_model(3, 2, rng, false);
    ChannelProcess<Complex> p = build_channel_process(model);
    DrazinData d = drazin_inverse(p);
    CHECK_THROWS_AS(verify_drazin_relations(p, d), ConfigError);
}

TEST_CASE("dark subspace is reported") {
    // two decoupled qubits, but only the second one is monitored: states of
    // qubit 2 that are already empty never click again once qubit dynamics
    // cannot refill them -> L_0 is singular
    OpenSystemModel<Complex> model;
    model.dim = 2;
    model.hamiltonian = CMatrix(2, 2);
    model.jumps.push_back({"up", spin_operator<Complex>(1, SpinKind::plus, 1), 1.0});
    model.monitored = {"up"};
    // the occupied state never de-excites, so no further "up" click can occur
    CHECK_THROWS_AS(build_channel_process(model), DarkSubspaceError);
}
