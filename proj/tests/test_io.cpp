#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace efpo;
using namespace efpo::testing;

namespace {

Json parse(const std::string& s) { return parse_json_text(s, "test"); }

}  // namespace

TEST_CASE("instances and lotteries round-trip exactly") {
    Rng rng(71);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 1 + rep % 4, m = 1 + rep % 3;
        std::vector<SquareMatrix> u(m, SquareMatrix(n));
        for (auto& mat : u)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) mat(i, j) = Rational(uniform_int(rng, -50, 50), uniform_int(rng, 1, 9));
        std::vector<std::vector<std::string>> labels(m);
        if (rep % 2) labels[0].assign(n, "bundle");
        const Instance inst(n, u, labels);
        CHECK(instance_from_json(parse(to_json(inst).dump())) == inst);
        const Lottery lot = random_lottery(rng, n, m);
        CHECK(lottery_from_json(parse(to_json(lot).dump())) == lot);
        CHECK(to_json(lottery_from_json(to_json(lot))).dump() == to_json(lot).dump());
    }
}

TEST_CASE("wire format of an instance") {
    const Instance inst(2, {SquareMatrix::from_rows({{Rational(1, 2), -3}, {0, Rational(-4, 6)}})});
    CHECK(to_json(inst).dump() == R"({"n":2,"partitions":[{"utilities":[["1/2","-3"],["0","-2/3"]]}]})");
}

TEST_CASE("schema violations are rejected") {
    const char* bad_instances[] = {
        R"({"n":2,"partitions":[{"utilities":[[1,0],[0,1]]}]})",
        R"({"n":2,"partitions":[{"utilities":[["0.5","0"],["0","1"]]}]})",
        R"({"n":2,"partitions":[{"utilities":[["1","0"],["0"]]}]})",
        R"({"n":2,"partitions":[]})",
        R"({"n":0,"partitions":[{"utilities":[]}]})",
        R"({"n":-1,"partitions":[{"utilities":[]}]})",
        R"({"n":2.0,"partitions":[{"utilities":[["1","0"],["0","1"]]}]})",
        R"({"n":2,"partitions":[{"utilities":[["1","0"],["0","1"]],"labels":["a"]}]})",
        R"({"n":2,"partitions":[{"utilities":[["1","0"],["0","1"]]}],"extra":1})",
        R"({"partitions":[{"utilities":[["1","0"],["0","1"]]}]})",
        R"([1,2])",
    };
    for (const char* text : bad_instances) CHECK_THROWS_AS(instance_from_json(parse(text)), SchemaError);
    CHECK_THROWS_AS(lottery_from_json(parse(R"({"p":["1"],"q":[[["1","0"],["0","1"]]],"r":1})")), SchemaError);
    CHECK_THROWS_AS(lottery_from_json(parse(R"({"p":["1","0"],"q":[[["1","0"],["0","1"]]]})")), SchemaError);
    CHECK_THROWS_AS(lottery_from_json(parse(R"({"p":["1"],"q":[[["1e0","0"],["0","1"]]]})")), SchemaError);
    CHECK_THROWS_AS(parse_json_text("{", "x"), ParseError);
}

TEST_CASE("decompositions round-trip with 1-based permutations") {
    const Instance inst(3, {SquareMatrix(3), SquareMatrix(3)});
    Lottery lot = mix(deterministic_lottery(3, 2, 0, {2, 0, 1}), deterministic_lottery(3, 2, 1, {0, 1, 2}), Rational(1, 3));
    const auto dec = decompose(inst, lot);
    const Json j = to_json(dec);
    CHECK(j["partitions"][0]["terms"][0]["perm"] == Json::array({3, 1, 2}));
    CHECK(j["partitions"][1]["partition"] == 2);
    CHECK(decomposition_from_json(parse(j.dump())) == dec);
    CHECK_THROWS_AS(decomposition_from_json(parse(
                        R"({"n":2,"p":["1"],"partitions":[{"partition":1,"terms":[{"perm":[1,1],"alpha":"1"}]}]})")),
                    SchemaError);
    CHECK_THROWS_AS(decomposition_from_json(parse(
                        R"({"n":2,"p":["1"],"partitions":[{"partition":1,"terms":[{"perm":[1,3],"alpha":"1"}]}]})")),
                    SchemaError);
}

TEST_CASE("X3C files and sidecars") {
    const auto phi = x3c_from_json(parse(R"({"r":3,"triples":[[1,2,3],[3,2,1]]})"));
    CHECK(phi.triples[1] == Triple{2, 1, 0});
    CHECK(x3c_from_json(to_json(phi)) == phi);
    CHECK_THROWS_AS(x3c_from_json(parse(R"({"r":3,"triples":[[1,2]]})")), SchemaError);
    CHECK_THROWS_AS(x3c_from_json(parse(R"({"r":3,"triples":[[1,2,4]]})")), SchemaError);
    CHECK_THROWS_AS(x3c_from_json(parse(R"({"r":3,"triples":[[0,1,2]]})")), SchemaError);

    const auto side = sidecar_json(generate(phi));
    CHECK(side["epsilon"] == "1/48");
    CHECK(side["agent_index"]["b0"] == 1);
    CHECK(side["agent_index"]["h1_1"] == 4);
    CHECK(side["agent_index"]["z3"] == 2 + 1 + 8 + 9);
    CHECK(side["partition_index"]["2,3"] == 6);
}

TEST_CASE("reports use rational strings and 1-based agents") {
    const Instance t1(2, {SquareMatrix::from_rows({{1, 0}, {1, 0}})});
    const auto rep = verify_all(t1, single_partition_lottery({{1, 0}, {0, 1}}));
    const Json j = to_json(rep);
    CHECK(j["ef"] == false);
    CHECK(j["envy_pairs"][0]["agent"] == 2);
    CHECK(j["envy_pairs"][0]["envies"] == 1);
    CHECK(j["envy_pairs"][0]["other"] == "1");
    CHECK(j["pareto"]["mode"] == "exact");
    CHECK(j["social_welfare"] == "1");
    CHECK(to_json(compute_rho(t1)).dump() == R"({"rho":"1/2","epsilon":"1/8","J_size":4})");
}
