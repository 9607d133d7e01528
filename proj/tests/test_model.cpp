#include <catch2/catch_amalgamated.hpp>

#include "jumppat/model.hpp"

using namespace jumppat;

TEST_CASE("single-site raising operator in the fixed basis") {
    CMatrix up = spin_operator<Complex>(1, SpinKind::plus, 1);
    // creates an excitation: maps the empty state (index 1) to the occupied one (index 0)
    CHECK(up(0, 1) == Complex(1.0));
    CHECK(up(0, 0) == Complex(0.0));
    CHECK(up(1, 0) == Complex(0.0));
    CHECK(up(1, 1) == Complex(0.0));
    CHECK_THROWS_AS(spin_operator<Complex>(3, SpinKind::plus, 2), DimensionError);
}

TEST_CASE("occupation projector and nilpotency") {
    for (int site = 1; site <= 3; ++site) {
        CMatrix up = spin_operator<Complex>(site, SpinKind::plus, 3);
        CMatrix dn = spin_operator<Complex>(site, SpinKind::minus, 3);
        CMatrix n = up * dn;
        // diagonal projector
        for (Index i = 0; i < n.rows(); ++i)
            for (Index j = 0; j < n.cols(); ++j)
                if (i != j) CHECK(n(i, j) == Complex(0.0));
        CHECK(max_abs_diff(n * n, n) < 1e-15);
        CHECK(max_abs(up * up) == 0.0);
    }
}

TEST_CASE("basis_state_index follows the occupied-first convention") {
    CHECK(basis_state_index({1, 1, 1}) == 0);
    CHECK(basis_state_index({0, 0, 0}) == 7);
    CHECK(basis_state_index({1, 1, 0}) == 1);
    CHECK(basis_state_index({1, 0, 0}) == 3);
    CHECK(basis_state_index({0, 1, 0}) == 5);
}

TEST_CASE("one-site chain has an empty Hamiltonian and two jump channels") {
    ChainSpec<Complex> spec;
    spec.length = 1;
    OpenSystemModel<Complex> model = build_xy_chain(spec);
    CHECK(model.dim == 2);
    CHECK(max_abs(model.hamiltonian) == 0.0);
    REQUIRE(model.jumps.size() == 2);
    CHECK(model.jumps[0].label == "I");
    CHECK(model.jumps[1].label == "E");
    CHECK(model.monitored == std::vector<std::string>{"I", "E"});
}

TEST_CASE("chain Hamiltonians are Hermitian and jump operators are projective") {
    for (int length : {1, 2, 3}) {
        for (double kappa : {0.0, 0.5}) {
            ChainSpec<Complex> spec;
            spec.length = length;
            spec.kappa = kappa;
            OpenSystemModel<Complex> model = build_xy_chain(spec);
            CHECK(is_hermitian(model.hamiltonian));
            // L_I^dag L_I = gamma (1 - n_1), L_E^dag L_E = gamma n_L
            CMatrix li = model.jumps[0].op;
            CMatrix le = model.jumps[1].op;
            CMatrix n1 = spin_operator<Complex>(1, SpinKind::plus, length) *
                         spin_operator<Complex>(1, SpinKind::minus, length);
            CMatrix nl = spin_operator<Complex>(length, SpinKind::plus, length) *
                         spin_operator<Complex>(length, SpinKind::minus, length);
            CHECK(max_abs_diff(adjoint(li) * li, CMatrix::identity(model.dim) - n1) < 1e-15);
            CHECK(max_abs_diff(adjoint(le) * le, nl) < 1e-15);
        }
    }
}

TEST_CASE("exact chain builder stays in the rational field") {
    ChainSpec<ExactComplex> spec;
    spec.length = 3;
    spec.gamma = make_rational(1);
    spec.kappa = make_rational(1, 2);
    OpenSystemModel<ExactComplex> model = build_xy_chain(spec);
    CHECK(model.dim == 8);
    CHECK(is_hermitian(model.hamiltonian));
    CHECK(model.jumps[0].rate == make_rational(1));
}

TEST_CASE("particle number conservation distinguishes hopping from pairing") {
    ChainSpec<Complex> xx;
    xx.length = 3;
    CHECK(particle_number_conserved(build_xy_chain(xx)));

    ChainSpec<Complex> xy = xx;
    xy.kappa = 0.5;
    CHECK_FALSE(particle_number_conserved(build_xy_chain(xy)));

    ChainSpec<Complex> trivial;
    trivial.length = 1;  // H = 0
    CHECK(particle_number_conserved(build_xy_chain(trivial)));
}

TEST_CASE("model validation rejects bad inputs") {
    ChainSpec<Complex> spec;
    spec.length = 2;
    OpenSystemModel<Complex> model = build_xy_chain(spec);

    OpenSystemModel<Complex> broken = model;
    broken.monitored = {"I", "Z"};
    CHECK_THROWS_AS(broken.validate(), ConfigError);

    broken = model;
    broken.monitored.clear();
    CHECK_THROWS_AS(broken.validate(), ConfigError);

    broken = model;
    broken.jumps[1].label = "I";
    CHECK_THROWS_AS(broken.validate(), ConfigError);

    broken = model;
    broken.hamiltonian(0, 1) = Complex(0.0, 1.0);  // not Hermitian
    CHECK_THROWS_AS(broken.validate(), ConfigError);

    ChainSpec<Complex> bad;
    bad.length = 0;
    CHECK_THROWS_AS(build_xy_chain(bad), ConfigError);
    ChainSpec<Complex> bad2;
    bad2.gamma = 0.0;
    CHECK_THROWS_AS(build_xy_chain(bad2), ConfigError);
}
