#include <gtest/gtest.h>

#include <random>

#include "atsp/assignment.hpp"
#include "oracles.hpp"

using namespace atsp;

namespace {

DistanceMatrix triangle() { return DistanceMatrix::from_rows({{0, 1, 2}, {3, 0, 4}, {5, 6, 0}}); }

DistanceMatrix two_pairs() {
    return DistanceMatrix::from_rows({{0, 0, 5, 5}, {0, 0, 5, 5}, {5, 5, 0, 0}, {5, 5, 0, 0}});
}

oracle::ArcSets as_sets(const ArcConstraints& c) { return {c.excluded, c.included}; }

bool is_derangement(const std::vector<City>& succ) {
    std::vector<char> hit(succ.size(), 0);
    for (std::size_t i = 0; i < succ.size(); ++i) {
        if (succ[i] == static_cast<City>(i) || hit[succ[i]]) return false;
        hit[succ[i]] = 1;
    }
    return true;
}

}  // namespace

TEST(Assignment, AllZero) {
    const Assignment a = solve_ap(DistanceMatrix(5));
    EXPECT_EQ(a.cost, 0);
    EXPECT_TRUE(is_derangement(a.succ));
}

TEST(Assignment, TriangleExample) {
    const DistanceMatrix d = triangle();
    EXPECT_EQ(oracle::min_derangement(d), 10);
    const Assignment a = solve_ap(d);
    EXPECT_EQ(a.cost, 10);
    EXPECT_EQ(a.succ, (std::vector<City>{1, 2, 0}));
    EXPECT_TRUE(a.is_tour());
    EXPECT_TRUE(duals_certify(d, {}, a));
}

TEST(Assignment, TwoPairsExample) {
    const DistanceMatrix d = two_pairs();
    EXPECT_EQ(oracle::derangements(4).size(), 9u);
    EXPECT_EQ(oracle::min_derangement(d), 0);
    const Assignment a = solve_ap(d);
    EXPECT_EQ(a.cost, 0);
    EXPECT_EQ(a.succ, (std::vector<City>{1, 0, 3, 2}));
    ASSERT_EQ(a.cycles.size(), 2u);
}

TEST(Assignment, ConstrainedExamples) {
    const DistanceMatrix d = two_pairs();
    EXPECT_EQ(solve_ap_constrained(d, {})->cost, solve_ap(d).cost);
    EXPECT_EQ(solve_ap_constrained(d, {})->succ, solve_ap(d).succ);

    const ArcConstraints ex{{{0, 1}}, {}};
    EXPECT_EQ(oracle::min_derangement(d, as_sets(ex)), 10);
    auto a = solve_ap_constrained(d, ex);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->cost, 10);
    EXPECT_NE(a->succ[0], 1);

    const ArcConstraints mixed{{{2, 3}}, {{0, 1}}};
    EXPECT_EQ(oracle::min_derangement(d, as_sets(mixed)), 10);
    a = solve_ap_constrained(d, mixed);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->cost, 10);
    EXPECT_EQ(a->succ[0], 1);
    EXPECT_NE(a->succ[2], 3);
    EXPECT_TRUE(duals_certify(d, mixed, *a));
}

TEST(Assignment, InfeasibleConstraints) {
    // n=2: the only derangement is 0->1->0.
    const DistanceMatrix d = DistanceMatrix::from_rows({{0, 3}, {4, 0}});
    EXPECT_FALSE(solve_ap_constrained(d, ArcConstraints{{{0, 1}}, {}}));
    // Every arc into city 2 excluded.
    const DistanceMatrix t = triangle();
    EXPECT_FALSE(solve_ap_constrained(t, ArcConstraints{{{0, 2}, {1, 2}}, {}}));
}

TEST(Assignment, ConstraintValidation) {
    EXPECT_NO_THROW((ArcConstraints{{{0, 1}}, {{1, 2}}}.validate(4)));
    EXPECT_THROW((ArcConstraints{{{0, 1}}, {{0, 1}}}.validate(4)), std::invalid_argument);
    EXPECT_THROW((ArcConstraints{{}, {{0, 1}, {0, 2}}}.validate(4)), std::invalid_argument);
    EXPECT_THROW((ArcConstraints{{}, {{0, 1}, {2, 1}}}.validate(4)), std::invalid_argument);
    EXPECT_THROW((ArcConstraints{{}, {{0, 1}, {1, 0}}}.validate(4)), std::invalid_argument);
    EXPECT_THROW((ArcConstraints{{{2, 2}}, {}}.validate(4)), std::invalid_argument);
    EXPECT_THROW((ArcConstraints{{{0, 9}}, {}}.validate(4)), std::invalid_argument);
    // Included arcs forming a full tour are allowed.
    EXPECT_NO_THROW((ArcConstraints{{}, {{0, 1}, {1, 2}, {2, 0}}}.validate(3)));
}

TEST(Assignment, ResolveExamples) {
    const DistanceMatrix d = two_pairs();
    const Assignment parent = solve_ap(d);
    // Degenerate guard: an arc the parent does not use.
    const ArcConstraints off{{{0, 2}}, {}};
    const auto same = resolve_after_exclusion(d, parent, off, {0, 2});
    ASSERT_TRUE(same);
    EXPECT_EQ(same->cost, parent.cost);
    EXPECT_EQ(same->succ, parent.succ);

    const ArcConstraints ex{{{0, 1}}, {}};
    const auto child = resolve_after_exclusion(d, parent, ex, {0, 1});
    ASSERT_TRUE(child);
    EXPECT_EQ(child->cost, solve_ap_constrained(d, ex)->cost);
    EXPECT_EQ(child->cost, 10);
    EXPECT_TRUE(duals_certify(d, ex, *child));
}

TEST(Assignment, ResolveCutoff) {
    const DistanceMatrix d = two_pairs();
    const Assignment parent = solve_ap(d);
    const ArcConstraints ex{{{0, 1}}, {}};
    EXPECT_FALSE(resolve_after_exclusion(d, parent, ex, {0, 1}, 10));
    EXPECT_FALSE(resolve_after_exclusion(d, parent, ex, {0, 1}, 0));
    const auto kept = resolve_after_exclusion(d, parent, ex, {0, 1}, 11);
    ASSERT_TRUE(kept);
    EXPECT_EQ(kept->cost, 10);
}

TEST(Assignment, ResolveRejectsViolatingParent) {
    const DistanceMatrix d = two_pairs();
    const Assignment parent = solve_ap(d);
    const ArcConstraints c{{{0, 1}, {2, 3}}, {}};
    EXPECT_THROW(resolve_after_exclusion(d, parent, c, {0, 1}), std::invalid_argument);
}

TEST(Assignment, MatchesBruteForceOnRandomMatrices) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 2 + trial % 6;
        const Cost range = (trial % 3 == 0) ? 3 : (trial % 3 == 1 ? 20 : 1000);
        const DistanceMatrix d = oracle::random_matrix(n, range, rng);
        const Assignment a = solve_ap(d);
        EXPECT_EQ(a.cost, oracle::min_derangement(d)) << "trial " << trial;
        EXPECT_TRUE(is_derangement(a.succ));
        EXPECT_EQ(oracle::perm_cost(d, a.succ), a.cost);
        EXPECT_TRUE(duals_certify(d, {}, a));
    }
}

TEST(Assignment, ConstrainedMatchesBruteForce) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 3 + trial % 5;
        const DistanceMatrix d = oracle::random_matrix(n, 50, rng);
        // Random constraints taken from a random derangement, so they are consistent.
        const auto all = oracle::derangements(n);
        const auto& pick = all[rng() % all.size()];
        ArcConstraints c;
        for (City i = 0; i < n; ++i) {
            const auto roll = rng() % 6;
            if (roll == 0) c.included.push_back({i, pick[i]});
            if (roll == 1 || roll == 2) {
                City j = static_cast<City>(rng() % n);
                if (j != i && j != pick[i]) c.excluded.push_back({i, j});
            }
        }
        const Cost expect = oracle::min_derangement(d, as_sets(c));
        const auto a = solve_ap_constrained(d, c);
        ASSERT_TRUE(a);
        EXPECT_EQ(a->cost, expect) << "trial " << trial;
        EXPECT_TRUE(duals_certify(d, c, *a));
    }
}

TEST(Assignment, ResolveChainsMatchFromScratch) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 3 + trial % 6;
        const DistanceMatrix d = oracle::random_matrix(n, trial % 2 ? 10 : 500, rng);
        ArcConstraints c;
        Assignment current = solve_ap(d);
        for (int step = 0; step < 2 * n; ++step) {
            // Exclude a random assigned arc.
            const City i = static_cast<City>(rng() % n);
            const Arc e{i, current.succ[i]};
            c.excluded.push_back(e);
            const auto next = resolve_after_exclusion(d, current, c, e);
            const auto scratch = solve_ap_constrained(d, c);
            ASSERT_EQ(next.has_value(), scratch.has_value()) << "trial " << trial << " step " << step;
            EXPECT_EQ(oracle::min_derangement(d, as_sets(c)), scratch ? scratch->cost : -1);
            if (!next) break;
            EXPECT_EQ(next->cost, scratch->cost);
            EXPECT_GE(next->cost, current.cost);
            EXPECT_TRUE(duals_certify(d, c, *next));
            current = *next;
        }
    }
}

TEST(Assignment, BoundIsMonotoneUnderExclusion) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 4 + trial % 8;
        const DistanceMatrix d = oracle::random_matrix(n, 100, rng);
        const Assignment root = solve_ap(d);
        for (City i = 0; i < n; ++i) {
            const Arc e{i, root.succ[i]};
            const ArcConstraints c{{e}, {}};
            const auto child = resolve_after_exclusion(d, root, c, e);
            ASSERT_TRUE(child);
            EXPECT_GE(child->cost, root.cost);
            EXPECT_NE(child->succ[i], root.succ[i]);
        }
    }
}

TEST(Assignment, LargerInstancesCertify) {
    std::mt19937_64 rng(5);
    for (int n : {20, 60, 150}) {
        for (Cost range : {Cost{2}, Cost{100}, Cost{1000000}}) {
            const DistanceMatrix d = oracle::random_matrix(n, range, rng);
            const Assignment a = solve_ap(d);
            EXPECT_TRUE(is_derangement(a.succ));
            EXPECT_TRUE(duals_certify(d, {}, a));
        }
    }
}

TEST(Cycles, Examples) {
    auto cycles = extract_cycles(std::vector<City>{1, 0, 3, 2});
    ASSERT_EQ(cycles.size(), 2u);
    EXPECT_EQ(cycles[0], (Cycle{{0, 1}, {1, 0}}));
    EXPECT_EQ(cycles[1], (Cycle{{2, 3}, {3, 2}}));

    cycles = extract_cycles(std::vector<City>{1, 2, 3, 4, 0});
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0].size(), 5u);

    // 0->2->0 and 1->3->4->1: the 2-cycle comes first.
    cycles = extract_cycles(std::vector<City>{2, 3, 0, 4, 1});
    ASSERT_EQ(cycles.size(), 2u);
    EXPECT_EQ(cycles[0], (Cycle{{0, 2}, {2, 0}}));
    EXPECT_EQ(cycles[1], (Cycle{{1, 3}, {3, 4}, {4, 1}}));

    // Equal lengths ordered by smallest city even when found later.
    cycles = extract_cycles(std::vector<City>{4, 3, 5, 1, 0, 2});
    ASSERT_EQ(cycles.size(), 3u);
    EXPECT_EQ(cycles[0].front().from, 0);
    EXPECT_EQ(cycles[1].front().from, 1);
    EXPECT_EQ(cycles[2].front().from, 2);
}
