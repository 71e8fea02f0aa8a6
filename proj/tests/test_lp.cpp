#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace efpo;
using namespace efpo::testing;

TEST_CASE("single-variable programs") {
    SECTION("bounded maximum") {
        LinearProgram lp;
        const auto x = lp.add_variable("x");
        lp.add_constraint({{x, 1}}, Relation::LessEqual, 3);
        lp.set_objective(Sense::Maximize, {{x, 1}});
        const auto r = solve(lp);
        REQUIRE(r.optimal());
        CHECK(r.solution[x] == 3);
        CHECK(r.objective_value == 3);
    }
    SECTION("unbounded") {
        LinearProgram lp;
        const auto x = lp.add_variable("x");
        lp.set_objective(Sense::Maximize, {{x, 1}});
        CHECK(solve(lp).status == LPStatus::Unbounded);
    }
    SECTION("infeasible") {
        LinearProgram lp;
        const auto x = lp.add_free_variable("x");
        lp.add_constraint({{x, 1}}, Relation::LessEqual, 1);
        lp.add_constraint({{x, 1}}, Relation::GreaterEqual, 2);
        lp.set_objective(Sense::Feasibility);
        CHECK(solve(lp).status == LPStatus::Infeasible);
    }
}

TEST_CASE("bounds: shifted, upper-only and free variables") {
    LinearProgram lp;
    const auto a = lp.add_variable("a", Rational(-2), Rational(5, 2));
    const auto b = lp.add_variable("b", std::nullopt, Rational(-1));
    const auto c = lp.add_free_variable("c");
    lp.add_constraint({{c, 1}, {a, 1}}, Relation::Equal, Rational(-7, 3));
    lp.set_objective(Sense::Minimize, {{a, -1}, {b, -1}, {c, 2}});
    const auto r = solve(lp);
    REQUIRE(r.optimal());
    CHECK(r.solution[a] == Rational(5, 2));
    CHECK(r.solution[b] == -1);
    CHECK(r.solution[c] == Rational(-29, 6));
    CHECK(r.objective_value == Rational(-5, 2) + 1 - Rational(29, 3));
    CHECK(satisfies(lp, r.solution));
}

TEST_CASE("malformed programs are rejected at construction") {
    LinearProgram lp;
    lp.add_variable("x");
    CHECK_THROWS_AS(lp.add_constraint({{3, 1}}, Relation::Equal, 0), std::invalid_argument);
    CHECK_THROWS_AS(lp.set_objective(Sense::Feasibility, {{0, 1}}), std::invalid_argument);
}

namespace {

LinearProgram weight_plain() {
    LinearProgram lp;
    lp.add_variable("w1", Rational(1, 4));
    lp.add_variable("w2", Rational(1, 4));
    lp.add_constraint({{0, 1}, {1, 1}}, Relation::Equal, 1);
    lp.set_objective(Sense::Feasibility);
    return lp;
}

ConditionalConstraint w2_below_half_w1(Rational guard) {
    return {std::move(guard), {{1, 1}, {0, Rational(-1, 2)}}, Relation::LessEqual, 0};
}

}  // namespace

TEST_CASE("conditional feasibility activates exactly the positive guards") {
    SECTION("active guard") {
        const auto r = solve_conditional_feasibility(weight_plain(), {w2_below_half_w1(1)});
        REQUIRE(r.optimal());
        const Rational w1 = r.solution[0], w2 = r.solution[1];
        CHECK(w1 + w2 == 1);
        CHECK(w2 >= Rational(1, 4));
        CHECK(w2 <= w1 / 2);
        // The feasible segment has vertices (3/4, 1/4) and (2/3, 1/3); Bland's
        // rule lands on the second.
        CHECK(w1 == Rational(2, 3));
        CHECK(w2 == Rational(1, 3));
    }
    SECTION("inactive guards are dropped") {
        for (Rational g : {Rational(-1), Rational(0)}) {
            LinearProgram plain = weight_plain();
            plain.add_constraint({{0, 1}}, Relation::LessEqual, Rational(1, 2));
            const auto r = solve_conditional_feasibility(plain, {w2_below_half_w1(g)});
            REQUIRE(r.optimal());
            CHECK(r.solution == RationalVector{Rational(1, 2), Rational(1, 2)});
        }
    }
    SECTION("cyclic conditions are infeasible") {
        ConditionalConstraint back{1, {{0, 1}, {1, Rational(-1, 2)}}, Relation::LessEqual, 0};
        CHECK(solve_conditional_feasibility(weight_plain(), {w2_below_half_w1(1), back}).status ==
              LPStatus::Infeasible);
    }
}

namespace {

/// max c x s.t. A x <= b, x >= 0 with A > 0 and b >= 0: feasible and bounded.
struct Packing {
    std::vector<RationalVector> a;
    RationalVector b, c;
};

Packing random_packing(Rng& rng, std::size_t rows, std::size_t cols) {
    Packing p;
    p.a.assign(rows, RationalVector(cols));
    for (auto& row : p.a)
        for (auto& x : row) x = uniform_int(rng, 1, 6);
    p.b.resize(rows);
    for (auto& x : p.b) x = uniform_int(rng, 0, 9);
    p.c.resize(cols);
    for (auto& x : p.c) x = uniform_int(rng, -3, 5);
    return p;
}

}  // namespace

TEST_CASE("duality spot-check: primal and dual optima coincide") {
    Rng rng(21);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t rows = 1 + rep % 4, cols = 1 + rep % 5;
        const Packing p = random_packing(rng, rows, cols);
        LinearProgram primal;
        for (std::size_t j = 0; j < cols; ++j) primal.add_variable("x" + std::to_string(j));
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<Term> row;
            for (std::size_t j = 0; j < cols; ++j) row.push_back({j, p.a[i][j]});
            primal.add_constraint(row, Relation::LessEqual, p.b[i]);
        }
        std::vector<Term> obj;
        for (std::size_t j = 0; j < cols; ++j) obj.push_back({j, p.c[j]});
        primal.set_objective(Sense::Maximize, obj);

        LinearProgram dual;
        for (std::size_t i = 0; i < rows; ++i) dual.add_variable("y" + std::to_string(i));
        for (std::size_t j = 0; j < cols; ++j) {
            std::vector<Term> row;
            for (std::size_t i = 0; i < rows; ++i) row.push_back({i, p.a[i][j]});
            dual.add_constraint(row, Relation::GreaterEqual, p.c[j]);
        }
        std::vector<Term> dobj;
        for (std::size_t i = 0; i < rows; ++i) dobj.push_back({i, p.b[i]});
        dual.set_objective(Sense::Minimize, dobj);

        const auto pr = solve(primal), dr = solve(dual);
        REQUIRE(pr.optimal());
        REQUIRE(dr.optimal());
        CHECK(pr.objective_value == dr.objective_value);
        CHECK(satisfies(primal, pr.solution));
        CHECK(satisfies(dual, dr.solution));
    }
}

TEST_CASE("optimal solutions re-substitute exactly into lottery programs") {
    Rng rng(22);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rep % 3, m = 1 + rep % 3;
        const Instance inst = random_instance(rng, n, m);
        LinearProgram lp;
        const auto L = add_lottery_polytope(lp, n, m);
        add_envy_free_constraints(lp, inst, L);
        lp.set_objective(Sense::Maximize, welfare_terms<Rational>(inst, L, random_positive_weights(rng, n)));
        const auto r = solve(lp);
        REQUIRE(r.optimal());  // the uniform lottery is always envy-free
        CHECK(satisfies(lp, r.solution));
        const Lottery lot = extract_lottery(L, r.solution);
        CHECK(validate_lottery(inst, lot).ok());
        CHECK(envy_graph(inst, lot).empty());
    }
}

TEST_CASE("solves are deterministic") {
    Rng rng(23);
    const Instance inst = random_instance(rng, 3, 2);
    LinearProgram lp;
    const auto L = add_lottery_polytope(lp, 3, 2);
    lp.set_objective(Sense::Maximize, welfare_terms<Rational>(inst, L));
    const auto a = solve(lp), b = solve(lp);
    CHECK(a.solution == b.solution);
    CHECK(a.pivots == b.pivots);
}

TEST_CASE("floating-point backend agrees on a small program") {
    BasicLinearProgram<double> lp;
    const auto x = lp.add_variable("x"), y = lp.add_variable("y");
    lp.add_constraint({{x, 1.0}, {y, 2.0}}, Relation::LessEqual, 4.0);
    lp.add_constraint({{x, 3.0}, {y, 1.0}}, Relation::LessEqual, 6.0);
    lp.set_objective(Sense::Maximize, {{x, 1.0}, {y, 1.0}});
    const auto r = solve(lp);
    REQUIRE(r.optimal());
    CHECK(r.objective_value == Catch::Approx(2.8).epsilon(1e-12));
    CHECK(satisfies(lp, r.solution));
}

TEST_CASE("to_text names constraints and bounds") {
    LinearProgram lp;
    const auto x = lp.add_variable("x", Rational(1, 2), Rational(3));
    const auto y = lp.add_free_variable("y");
    lp.add_constraint({{x, 1}, {y, -2}}, Relation::GreaterEqual, 0, "link");
    lp.set_objective(Sense::Minimize, {{y, 1}});
    const std::string text = lp.to_text();
    CHECK(text.find("minimize") != std::string::npos);
    CHECK(text.find("link: 1 x - 2 y >= 0") != std::string::npos);
    CHECK(text.find("1/2 <= x <= 3") != std::string::npos);
    CHECK(text.find("-inf <= y") != std::string::npos);
}
