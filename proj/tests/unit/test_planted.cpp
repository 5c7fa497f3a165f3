#include <doctest.h>

#include <filesystem>

#include "lplsh/lp_geometry.hpp"
#include "lplsh/planted.hpp"

using namespace lplsh;
using doctest::Approx;

TEST_CASE("planted instance geometry") {
    PlantedConfig cfg;
    cfg.n = 400;
    cfg.d = 12;
    cfg.p = 1.5;
    cfg.r = 0.8;
    cfg.c = 2.0;
    cfg.planted_count = 20;
    cfg.seed = 3;
    cfg.box = 2.0;
    const PlantedInstance inst = generate_planted(cfg);
    REQUIRE(inst.data.size() == 400);
    REQUIRE(inst.queries.size() == 20);
    REQUIRE(inst.truth.size() == 20);
    const LpSpace space(cfg.p, cfg.d);
    for (std::size_t j = 0; j < inst.queries.size(); ++j) {
        const PlantedTruth& tr = inst.truth[j];
        CHECK(tr.query_id == inst.queries.id(j));
        // Independent scan: exactly one point within c r, at distance r.
        std::size_t within = 0;
        for (std::size_t i = 0; i < inst.data.size(); ++i) {
            const double dist = lp_distance(inst.queries.row(j), inst.data.row(i), space);
            if (dist < cfg.c * cfg.r) {
                ++within;
                CHECK(inst.data.id(i) == tr.planted_id);
                CHECK(dist == Approx(cfg.r).epsilon(1e-12));
            }
        }
        CHECK(within == 1);
        CHECK(tr.distance == Approx(cfg.r).epsilon(1e-12));
    }
}

TEST_CASE("planted generation is deterministic") {
    PlantedConfig cfg;
    cfg.n = 100;
    cfg.planted_count = 5;
    cfg.seed = 9;
    const PlantedInstance a = generate_planted(cfg), b = generate_planted(cfg);
    CHECK(a.data == b.data);
    CHECK(a.queries == b.queries);
    cfg.seed = 10;
    CHECK_FALSE(generate_planted(cfg).data == a.data);
}

TEST_CASE("single-point instance") {
    PlantedConfig cfg;
    cfg.n = 1;
    cfg.d = 4;
    cfg.planted_count = 1;
    cfg.r = 1.5;
    const PlantedInstance inst = generate_planted(cfg);
    REQUIRE(inst.data.size() == 1);
    CHECK(lp_distance(inst.data.row(0), inst.queries.row(0), LpSpace(cfg.p, 4)) == Approx(1.5).epsilon(1e-12));
}

TEST_CASE("infeasible geometry and bad configs") {
    PlantedConfig cfg;
    cfg.n = 200;
    cfg.d = 2;
    cfg.planted_count = 10;
    cfg.c = 50;
    cfg.box = 1.0;
    cfg.max_attempts = 50;
    CHECK_THROWS_AS(generate_planted(cfg), ContractError);

    PlantedConfig bad;
    bad.planted_count = bad.n + 1;
    CHECK_THROWS_AS(generate_planted(bad), ContractError);
    bad = PlantedConfig{};
    bad.c = 1.0;
    CHECK_THROWS_AS(generate_planted(bad), ContractError);
}

TEST_CASE("truth file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "lplsh_test_planted";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "truth.csv").string();
    const std::vector<PlantedTruth> truth{{0, 4, 1.0}, {1, 7, 0.30000000000000004}};
    write_truth(truth, path, {"generated"});
    const auto back = read_truth(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].planted_id == 7);
    CHECK(back[1].distance == 0.30000000000000004);
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(read_truth(path), IoError);
}
