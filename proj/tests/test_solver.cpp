#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace efpo;
using namespace efpo::testing;

namespace {

const Rational half(1, 2);

Instance t1() { return make_instance({{{1, 0}, {1, 0}}}); }
Instance t2() { return make_instance({{{2, 0}, {0, 2}}}); }

std::vector<UtilityProfile> profiles_of(std::initializer_list<RationalVector> points) {
    std::vector<UtilityProfile> out;
    for (const auto& v : points) out.push_back({0, {}, v});
    return out;
}

/// T1-style lotteries q = [[a, 1-a], [1-a, a]] on a grid; returns the EF ones.
std::vector<Rational> envy_free_grid_points(const Instance& inst, long steps) {
    std::vector<Rational> out;
    for (long s = 0; s <= steps; ++s) {
        const Rational a(s, steps);
        const Lottery lot = single_partition_lottery({{a, 1 - a}, {1 - a, a}});
        if (envy_graph(inst, lot).empty()) out.push_back(a);
    }
    return out;
}

bool verified(const Instance& inst, const Lottery& lot) {
    return verify_ef(inst, lot).envy_free && !verify_pareto(inst, lot, {VerifyMode::Exact}).dominated;
}

}  // namespace

TEST_CASE("weighted-sum optima") {
    const auto a = weighted_sum_optimum(t2(), {half, half});
    CHECK(a.lottery == single_partition_lottery({{1, 0}, {0, 1}}));
    CHECK(a.objective == 2);

    const auto b = weighted_sum_optimum(t1(), {half, half});
    CHECK(b.objective == half);
    CHECK(validate_lottery(t1(), b.lottery).ok());
    CHECK((b.lottery.q[0](0, 0) == 1 || b.lottery.q[0](1, 0) == 1));

    const auto c = weighted_sum_optimum(t1(), {Rational(3, 4), Rational(1, 4)});
    CHECK(c.objective == Rational(3, 4));
    CHECK(c.lottery.q[0](0, 0) == 1);

    CHECK_THROWS_AS(weighted_sum_lp(t1(), {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_sum_lp(t1(), {1}), StructuralError);
}

TEST_CASE("profile enumeration") {
    CHECK(enumerate_profiles(t2()).size() == 2);
    Rng rng(41);
    CHECK(enumerate_profiles(random_instance(rng, 3, 2)).size() == 12);
    const auto p = enumerate_profiles(t2());
    CHECK(p[0].values == RationalVector{2, 2});
    CHECK(p[1].values == RationalVector{0, 0});
    CHECK(p[1].assignment == std::vector<std::size_t>{1, 0});
    CHECK_THROWS_AS(enumerate_profiles(random_instance(rng, 7, 1)), CapExceededError);
    CHECK_NOTHROW(enumerate_profiles(random_instance(rng, 3, 1), 3));
}

TEST_CASE("Pareto faces of small profile sets") {
    const auto one = pareto_faces(profiles_of({{2, 2}, {0, 0}}));
    REQUIRE(one.size() == 1);
    CHECK(one[0].normal == RationalVector{1, 1});
    CHECK(one[0].offset == 4);
    CHECK(one[0].support == std::vector<std::size_t>{0});

    const auto seg = pareto_faces(profiles_of({{1, 0}, {0, 1}}));
    bool found = false;
    for (const auto& f : seg) found = found || (f.normal == RationalVector{1, 1} && f.offset == 1 && f.support.size() == 2);
    CHECK(found);

    const auto point = pareto_faces(profiles_of({{5, 7}}));
    REQUIRE(point.size() == 1);
    CHECK(point[0].offset == dot(point[0].normal, {5, 7}));
}

TEST_CASE("every face is a positive supporting hyperplane with exact support") {
    Rng rng(42);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 2 + rep % 2, m = 1 + rep % 3;
        const auto profiles = enumerate_profiles(random_instance(rng, n, m));
        const auto faces = pareto_faces(profiles);
        REQUIRE_FALSE(faces.empty());
        for (const auto& f : faces) {
            CHECK(f.normal[0] == 1);
            for (const auto& w : f.normal) CHECK(is_positive(w));
            std::vector<std::size_t> support;
            for (std::size_t s = 0; s < profiles.size(); ++s) {
                const Rational v = dot(f.normal, profiles[s].values);
                CHECK(v <= f.offset);
                if (v == f.offset) support.push_back(s);
            }
            CHECK(support == f.support);
        }
        for (std::size_t i = 1; i < faces.size(); ++i)
            CHECK(std::make_pair(faces[i - 1].normal, faces[i - 1].offset) <
                  std::make_pair(faces[i].normal, faces[i].offset));
    }
}

TEST_CASE("every weighted-sum optimum lies on some face") {
    Rng rng(43);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rep % 2, m = 1 + rep % 3;
        const Instance inst = random_instance(rng, n, m);
        const auto faces = pareto_faces(enumerate_profiles(inst));
        const auto q = weighted_sum_lp(inst, random_positive_weights(rng, n));
        const auto u = own_utilities(inst, q);
        CHECK(std::any_of(faces.begin(), faces.end(), [&](const ParetoFace& f) { return dot(f.normal, u) == f.offset; }));
    }
}

TEST_CASE("hull_solve on hand-checked instances") {
    const auto r2 = hull_solve(t2());
    CHECK(own_utilities(t2(), r2.lottery) == RationalVector{2, 2});
    CHECK(r2.method == SolveMethod::Hull);

    const auto r1 = hull_solve(t1());
    CHECK(own_utilities(t1(), r1.lottery) == RationalVector{half, half});
    // Grid oracle: EF forces a = 1/2 on the symmetric family.
    CHECK(envy_free_grid_points(t1(), 64) == std::vector<Rational>{half});

    const Instance skew = make_instance({{{1, 0}, {half, 0}}});
    const auto r3 = hull_solve(skew);
    CHECK(verified(skew, r3.lottery));
    CHECK(dot(r3.weights, own_utilities(skew, r3.lottery)) == *r3.face_offset);
}

TEST_CASE("fixpoint iteration on T1 and T2") {
    const auto o2 = fixpoint_solve(t2());
    REQUIRE(o2.converged());
    CHECK(o2.report->iterations == 1);
    CHECK(o2.report->lottery == single_partition_lottery({{1, 0}, {0, 1}}));

    const auto o1 = fixpoint_solve(t1());
    REQUIRE(o1.converged());
    REQUIRE_FALSE(o1.trace.empty());
    CHECK(o1.trace.front().arcs.size() == 1);
    CHECK(own_utilities(t1(), o1.report->lottery) == RationalVector{half, half});
    CHECK(verified(t1(), o1.report->lottery));

    CHECK_THROWS_AS(fixpoint_solve(t1(), {0, 10}), std::invalid_argument);
}

TEST_CASE("solvers return verified lotteries on random instances") {
    Rng rng(44);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 2 + rep % 2, m = 1 + rep % 3;
        const Instance inst = random_instance(rng, n, m);
        CHECK(verified(inst, hull_solve(inst).lottery));
        const auto o = fixpoint_solve(inst);
        if (o.converged()) CHECK(verified(inst, o.report->lottery));
    }
}

TEST_CASE("maximum welfare over envy-free Pareto-optimal lotteries") {
    CHECK(max_welfare_ef_po(t2()).welfare == 4);
    CHECK(max_welfare_ef_po(t1()).welfare == 1);
    CHECK(welfare_at_least(t2(), 4));
    CHECK_FALSE(welfare_at_least(t2(), 5));
    const auto best = max_welfare_ef_po(t1());
    CHECK(verified(t1(), best.lottery));
}
