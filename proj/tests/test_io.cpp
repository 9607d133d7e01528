#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "jumppat/run_config.hpp"
#include "test_support.hpp"

using namespace jumppat;
using namespace jumppat::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("jumppat_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("float matrix interchange round trip") {
    std::mt19937_64 rng(71);
    for (int t = 0; t < 3; ++t) {
        CMatrix m = gaussian_complex_matrix(3, 3, rng);
        CMatrix back = matrix_from_json<Complex>(matrix_to_json(m));
        CHECK(max_abs_diff(m, back) == 0.0);
    }
}

TEST_CASE("exact matrix interchange round trip is exact") {
    XMatrix m(2, 2);
    m(0, 0) = ExactComplex(make_rational(3, 4), make_rational(-1, 7));
    m(0, 1) = ExactComplex(make_rational(22, 7));
    m(1, 1) = ExactComplex(make_rational(0), make_rational(5, 3));
    XMatrix back = matrix_from_json<ExactComplex>(matrix_to_json(m));
    CHECK(back == m);
    // rational strings appear verbatim in the JSON
    std::string dumped = matrix_to_json(m).dump();
    CHECK(dumped.find("3/4") != std::string::npos);
    CHECK(dumped.find("5/3") != std::string::npos);
}

TEST_CASE("interchange validation") {
    CHECK_THROWS_AS(matrix_from_json<Complex>(nlohmann::json{{"dim", 2}}), ConfigError);
    nlohmann::json wrong_count = {{"dim", 2}, {"entries", {{1.0, 0.0}}}};
    CHECK_THROWS_AS(matrix_from_json<Complex>(wrong_count), ConfigError);
    nlohmann::json bad_entry = {{"dim", 1}, {"entries", {{"x", 0.0}}}};
    CHECK_THROWS_AS(matrix_from_json<Complex>(bad_entry), ConfigError);
    CHECK_THROWS_AS(matrix_to_json(CMatrix(2, 3)), ConfigError);
}

TEST_CASE("matrix file save and load") {
    TempDir dir;
    std::mt19937_64 rng(72);
    CMatrix m = hermitize(gaussian_complex_matrix(2, 2, rng));
    save_matrix(dir.path / "m.json", m);
    CHECK(max_abs_diff(load_matrix<Complex>(dir.path / "m.json"), m) == 0.0);
    CHECK_THROWS_AS(load_matrix<Complex>(dir.path / "missing.json"), ConfigError);
    write_text_file(dir.path / "broken.json", "{not json");
    CHECK_THROWS_AS(load_matrix<Complex>(dir.path / "broken.json"), ConfigError);
}

TEST_CASE("config parsing with defaults and overrides") {
    nlohmann::json j = {
        {"mode", "exact"},
        {"seed", 42},
        {"model",
         {{"chain", {{"type", "xy"}, {"length", 3}, {"gamma", "1"}, {"kappa", "1/2"}}}}},
        {"patterns", {{"max_steps", 500}, {"trajectories", 1}}},
        {"cluster", {{"n_clusters", {12, 32}}}},
    };
    RunConfig cfg = config_from_json(j);
    CHECK(cfg.mode == "exact");
    CHECK(cfg.seed == 42ULL);
    CHECK(cfg.model.chain == "xy");
    CHECK(cfg.model.kappa == "1/2");
    CHECK(cfg.pattern_steps == 500);
    CHECK(cfg.pattern_trajectories == 1);
    CHECK(cfg.n_clusters == std::vector<int>{12, 32});
    CHECK(cfg.order == 2);              // untouched default
    CHECK(cfg.recur_fraction == 0.9);   // untouched default

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"mode", "fuzzy"}}), ConfigError);
    CHECK_THROWS_AS(
        config_from_json(nlohmann::json{{"model", {{"chain", {{"type", "zz"}}}}}}),
        ConfigError);
}

TEST_CASE("model building from config") {
    ModelConfig chain;
    chain.chain = "xy";
    chain.length = 2;
    chain.gamma = "1/2";
    chain.kappa = "1/4";
    OpenSystemModel<ExactComplex> exact = build_model<ExactComplex>(chain);
    CHECK(exact.dim == 4);
    CHECK(exact.jumps[0].rate == make_rational(1, 2));
    OpenSystemModel<Complex> fl = build_model<Complex>(chain);
    CHECK(fl.jumps[0].rate == 0.5);

    ModelConfig xx_with_pairing;
    xx_with_pairing.chain = "xx";
    xx_with_pairing.kappa = "1/2";
    CHECK_THROWS_AS(build_model<Complex>(xx_with_pairing), ConfigError);

    // custom model from interchange files
    TempDir dir;
    save_matrix(dir.path / "h.json", CMatrix(2, 2));
    save_matrix(dir.path / "decay.json", spin_operator<Complex>(1, SpinKind::minus, 1));
    save_matrix(dir.path / "pump.json", spin_operator<Complex>(1, SpinKind::plus, 1));
    ModelConfig custom;
    custom.hamiltonian = (dir.path / "h.json").string();
    custom.jumps.push_back({"d", (dir.path / "decay.json").string(), "2"});
    custom.jumps.push_back({"u", (dir.path / "pump.json").string(), "1"});
    OpenSystemModel<Complex> model = build_model<Complex>(custom);
    CHECK(model.dim == 2);
    CHECK(model.monitored == std::vector<std::string>{"d", "u"});  // defaults to all
    CHECK(model.jumps[0].rate == 2.0);

    custom.monitored = {"d"};
    CHECK(build_model<Complex>(custom).monitored == std::vector<std::string>{"d"});
    custom.monitored = {"z"};
    CHECK_THROWS_AS(build_model<Complex>(custom), ConfigError);

    ModelConfig empty;
    CHECK_THROWS_AS(build_model<Complex>(empty), ConfigError);
}
