#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mgsta/io.hpp"
#include "mgsta/synthesis.hpp"
#include "mgsta/trailer.hpp"

using namespace mgsta;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("default trailer config parses and builds the plant") {
    const auto cfg = io::parse_config(io::default_trailer_config_text());
    REQUIRE(cfg.plant.has_value());
    REQUIRE(cfg.design.has_value());
    CHECK(cfg.plant->vertex_count() == 8);
    CHECK(cfg.design->alpha == 11.0);
    CHECK(cfg.design->gamma == 4.0);
    CHECK(cfg.grid.alpha_points == 8);
    CHECK(cfg.sim.horizon == 30.0);
}

TEST_CASE("dotted-key overrides reach nested values") {
    const auto cfg = io::parse_config(
        io::default_trailer_config_text(),
        {"design.alpha=12.5", "sim.horizon=3.0", "trailer.m2_max=2.5"});
    CHECK(cfg.design->alpha == 12.5);
    CHECK(cfg.sim.horizon == 3.0);
    CHECK(cfg.trailer_params.m2_max == 2.5);
}

TEST_CASE("explicit plant section round trip") {
    const std::string text = R"({
      "plant": { "vertices": [ {
        "A": [[-1.0]], "E": [[0.0]], "C": [[0.0]], "D": [[0.0]], "B": [[1.0]]
      } ] },
      "design": {
        "gamma": 1.0, "alpha": 1.0, "rho": 0.5, "omega": 10.0,
        "H": [[1.0]], "J": [[0.0]],
        "zeta0": [1.0], "sigma0": [0.5], "eta0": [0.0]
      }
    })";
    const auto cfg = io::parse_config(text);
    REQUIRE(cfg.plant.has_value());
    CHECK(cfg.plant->r == 1);
    CHECK(cfg.plant->vertices[0].A(0, 0) == -1.0);
    REQUIRE(cfg.design.has_value());
    CHECK(cfg.design->zeta0[0] == 1.0);
}

TEST_CASE("malformed input is rejected with a parse diagnostic") {
    CHECK_THROWS_WITH_AS(io::parse_config("{ not json"),
                         doctest::Contains("parse error"), std::runtime_error);
    CHECK_THROWS_AS(io::parse_config(R"({"plant": {"vertices": [{"A": 3}]}})"),
                    std::runtime_error);
}

TEST_CASE("synthesis result JSON round trip") {
    const auto plant = trailer::build_trailer_polytope();
    const auto result =
        synthesis::solve_inner(plant, trailer::default_design());
    REQUIRE(result.feasible());

    const std::string text = io::to_json(result);
    const auto back = io::result_from_json(text);
    CHECK(back.status == sdp::SolveStatus::Optimal);
    CHECK(back.theta == doctest::Approx(result.theta).epsilon(1e-10));
    CHECK((back.K0 - result.K0).norm() < 1e-9 * (1.0 + result.K0.norm()));
    CHECK((back.Q - result.Q).norm() < 1e-9 * (1.0 + result.Q.norm()));
    CHECK(back.delta_min == doctest::Approx(result.delta_min));
}

TEST_CASE("csv outputs are deterministic") {
    const trailer::TrailerParams p;
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 0.5;
    cfg.record_stride = 10;
    const auto bench =
        trailer::run_benchmark(p, trailer::benchmark_gains(), cfg, nullptr, 2);

    const auto dir = fs::temp_directory_path() / "mgsta_io_test";
    fs::create_directories(dir);
    io::write_trajectory_csv(bench.records[0], dir / "a.csv");
    io::write_trajectory_csv(bench.records[0], dir / "b.csv");
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.rfind("# mgsta", 0) == 0); // version header line first
    CHECK(a.find("t,zeta_1") != std::string::npos);
    CHECK(a.find("cost_integral") != std::string::npos);
    CHECK(a.find("zbar_2") != std::string::npos);

    io::write_summary_csv(bench.summary, dir / "summary.csv");
    const std::string s = slurp(dir / "summary.csv");
    CHECK(s.find("vertex,F1,m2,m3") != std::string::npos);
    fs::remove_all(dir);
}
