#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "ordino/errors.hpp"
#include "ordino/model_core.hpp"

using namespace ordino;
using ordino::testing::design1_structure;
using ordino::testing::design2_structure;

namespace {
bool same(double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("cell_bounds") {
    SUBCASE("design 1 corner cell") {
        const auto b = cell_bounds(design1_structure(), 1, 1);
        CHECK(b.lo1 == -kInf);
        CHECK(b.hi1 == -2.0);
        CHECK(b.lo2 == -kInf);
        CHECK(b.hi2 == 1.0);
    }
    SUBCASE("single cell") {
        const auto b = cell_bounds(ThresholdStructure{}, 1, 1);
        CHECK(b.lo1 == -kInf);
        CHECK(b.hi1 == kInf);
        CHECK(b.lo2 == -kInf);
        CHECK(b.hi2 == kInf);
    }
    SUBCASE("lattice 2x2") {
        const std::vector<double> c1{0.0}, c2{0.0};
        const auto b = cell_bounds(ThresholdStructure::lattice(c1, c2), 2, 2);
        CHECK(b.lo1 == 0.0);
        CHECK(b.hi1 == kInf);
        CHECK(b.lo2 == 0.0);
        CHECK(b.hi2 == kInf);
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(cell_bounds(design1_structure(), 3, 1), UserError);
        CHECK_THROWS_AS(cell_bounds(design1_structure(), 1, 0), UserError);
    }
}

TEST_CASE("structure invariants are enforced") {
    CHECK_THROWS_AS(ThresholdStructure::from_interior({3, 1}, std::vector<double>{1.0, 0.5}), UserError);
    CHECK_THROWS_AS(ThresholdStructure::from_interior({2, 2}, std::vector<double>{1.0}), UserError);
    CHECK_THROWS_AS(ThresholdStructure::from_interior({0, 2}, std::vector<double>{}), UserError);
    const double inf = kInf;
    CHECK_THROWS_AS(ThresholdStructure::from_grids({{-inf}, {0.0}}, {{-inf, inf}}), UserError);
    const auto ts = ThresholdStructure::from_grids({{-inf, -inf}, {-2.0, 1.5}, {inf, inf}}, {{-inf, 1.0, inf}, {-inf, 1.0, inf}});
    CHECK(ts == design1_structure());
    CHECK(ThresholdStructure::from_grids(ts.grid1(), ts.grid2()) == ts);
}

TEST_CASE("interior index round trip") {
    const ResponseSpec spec{4, 3};
    const auto entries = ThresholdStructure::interior_entries(spec);
    REQUIRE(entries.size() == ThresholdStructure::interior_count(spec));
    CHECK(entries.size() == 17);
    for (std::size_t i = 0; i < entries.size(); ++i) CHECK(ThresholdStructure::interior_index(spec, entries[i]) == i);
}

TEST_CASE("is_coherent") {
    CHECK(is_coherent(design1_structure()).coherent);
    CHECK(is_coherent(design2_structure()).coherent);

    const std::vector<double> c1{-1.0, 0.0, 2.0}, c2{-0.5, 0.7};
    CHECK(is_coherent(ThresholdStructure::lattice(c1, c2)).coherent);

    // A1 row 1 = (-2, 1.5), A2 column 1 = (1, 0.8): both segments break at corner (1,1)
    const auto bad = ThresholdStructure::from_interior({2, 2}, std::vector<double>{-2.0, 1.5, 1.0, 0.8});
    const auto rep = is_coherent(bad, 1e-9);
    CHECK_FALSE(rep.coherent);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0] == Corner{1, 1});

    SUBCASE("affine rescaling keeps the violation set") {
        Rng rng(5);
        for (int rep_i = 0; rep_i < 50; ++rep_i) {
            const auto ts = random_coherent_structure({3, 3}, rng, -5.0, 5.0);
            auto in = ts.interior();
            // break a random subset of entries to create violations
            for (auto& x : in)
                if (rng.uniform() < 0.3) x += 0.01 * (rng.uniform() - 0.5);
            // re-sort rows/columns so invariants hold
            const ResponseSpec spec{3, 3};
            for (int j2 = 1; j2 <= 3; ++j2) {
                auto& a = in[ThresholdStructure::interior_index(spec, {1, 1, j2})];
                auto& b = in[ThresholdStructure::interior_index(spec, {1, 2, j2})];
                if (a > b) std::swap(a, b);
            }
            for (int j1 = 1; j1 <= 3; ++j1) {
                auto& a = in[ThresholdStructure::interior_index(spec, {2, j1, 1})];
                auto& b = in[ThresholdStructure::interior_index(spec, {2, j1, 2})];
                if (a > b) std::swap(a, b);
            }
            const auto base = ThresholdStructure::from_interior(spec, in);
            std::vector<double> scaled = in;
            const auto n1 = static_cast<std::size_t>(spec.m1 - 1) * spec.m2;
            for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = k < n1 ? 3.0 * scaled[k] - 1.0 : 0.5 * scaled[k] + 2.0;
            const auto r0 = is_coherent(base, 1e-12);
            const auto r1 = is_coherent(ThresholdStructure::from_interior(spec, scaled), 1e-12);
            CHECK(r0.violations == r1.violations);
        }
    }
}

TEST_CASE("detect_hierarchy") {
    SUBCASE("lattice always succeeds") {
        const std::vector<double> c1{-1.0, 0.0, 2.0}, c2{-0.5, 0.7};
        const auto tree = detect_hierarchy(ThresholdStructure::lattice(c1, c2));
        REQUIRE(tree.has_value());
        // tie-break: dimension 1, lowest threshold first
        const auto& root = std::get<DecisionTree::Split>(tree->node);
        CHECK(root.dim == 1);
        CHECK(root.value == -1.0);
    }
    SUBCASE("design 2 root split") {
        const auto tree = detect_hierarchy(design2_structure());
        REQUIRE(tree.has_value());
        const auto& root = std::get<DecisionTree::Split>(tree->node);
        CHECK(root.dim == 1);
        CHECK(root.value == doctest::Approx(8.0));
    }
    SUBCASE("leaf rectangles reproduce every cell") {
        Rng rng(11);
        for (int rep = 0; rep < 200; ++rep) {
            const ResponseSpec spec{1 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(4))};
            const auto ts = random_coherent_structure(spec, rng, -4.0, 4.0);
            const auto tree = detect_hierarchy(ts);
            REQUIRE(tree.has_value());
            auto leaves = tree_leaves(*tree);
            REQUIRE(leaves.size() == static_cast<std::size_t>(spec.m1 * spec.m2));
            std::vector<int> seen(static_cast<std::size_t>(spec.m1 * spec.m2), 0);
            for (const auto& leaf : leaves) {
                ++seen[static_cast<std::size_t>((leaf.j1 - 1) * spec.m2 + leaf.j2 - 1)];
                const auto b = cell_bounds(ts, leaf.j1, leaf.j2);
                CHECK(same(leaf.rect.lo1, b.lo1));
                CHECK(same(leaf.rect.hi1, b.hi1));
                CHECK(same(leaf.rect.lo2, b.lo2));
                CHECK(same(leaf.rect.hi2, b.hi2));
            }
            CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        }
    }
    SUBCASE("translation invariance") {
        Rng rng(3);
        for (int rep = 0; rep < 50; ++rep) {
            const auto ts = random_coherent_structure({4, 3}, rng, -3.0, 3.0);
            auto in = ts.interior();
            for (auto& x : in) x += 2.5;
            const auto shifted = ThresholdStructure::from_interior(ts.spec(), in);
            const auto t0 = detect_hierarchy(ts);
            const auto t1 = detect_hierarchy(shifted);
            REQUIRE(t0.has_value() == t1.has_value());
            const auto l0 = tree_leaves(*t0);
            const auto l1 = tree_leaves(*t1);
            REQUIRE(l0.size() == l1.size());
            for (std::size_t k = 0; k < l0.size(); ++k) {
                CHECK(l0[k].j1 == l1[k].j1);
                CHECK(l0[k].j2 == l1[k].j2);
            }
        }
    }
    SUBCASE("pinwheel is rejected") {
        const auto pin = ordino::testing::find_coherent_non_hierarchical_3x3(3);
        REQUIRE(pin.has_value());
        CHECK(is_coherent(*pin).coherent);
        CHECK_FALSE(detect_hierarchy(*pin).has_value());
    }
    SUBCASE("incoherent input rejected") {
        const auto bad = ThresholdStructure::from_interior({2, 2}, std::vector<double>{-2.0, 1.5, 1.0, 0.8});
        CHECK_THROWS_AS(detect_hierarchy(bad), NumericalError);
    }
    SUBCASE("render") {
        const auto tree = detect_hierarchy(design1_structure());
        REQUIRE(tree.has_value());
        const auto text = render_tree(*tree);
        CHECK(text.find("cell (2, 2)") != std::string::npos);
    }
}

TEST_CASE("tie_groups") {
    SUBCASE("design 2 first A1 row") {
        const auto g = tie_groups(design2_structure(), 1e-9);
        REQUIRE(!g.classes.empty());
        CHECK(g.classes[0] == std::vector<EntryRef>{{1, 1, 1}, {1, 1, 2}});
        CHECK(g.classes[1] == std::vector<EntryRef>{{1, 1, 3}});
    }
    SUBCASE("lattice: one class per A1 row and A2 column") {
        const std::vector<double> c1{-1.0, 0.0, 2.0}, c2{-0.5, 0.7};
        const auto g = tie_groups(ThresholdStructure::lattice(c1, c2));
        CHECK(g.classes.size() == 5);
        CHECK(g.classes[0].size() == 3);
        CHECK(g.classes[3].size() == 4);
    }
    SUBCASE("all distinct") {
        const auto ts = ThresholdStructure::from_interior({2, 2}, std::vector<double>{-2.0, 1.5, 1.0, 0.8});
        CHECK(tie_groups(ts).classes.size() == 4);
    }
    SUBCASE("idempotent and exhaustive") {
        Rng rng(17);
        for (int rep = 0; rep < 100; ++rep) {
            const auto ts = random_coherent_structure({4, 4}, rng, -2.0, 2.0);
            const auto g = tie_groups(ts, 1e-3);
            std::size_t total = 0;
            for (const auto& c : g.classes) total += c.size();
            CHECK(total == ThresholdStructure::interior_count(ts.spec()));
            // snapping each class to its first value and re-grouping yields the same classes
            auto in = ts.interior();
            for (const auto& c : g.classes) {
                const double v = ts.entry(c.front());
                for (const auto& e : c) in[ThresholdStructure::interior_index(ts.spec(), e)] = v;
            }
            const auto again = tie_groups(ThresholdStructure::from_interior(ts.spec(), in), 1e-3);
            CHECK(again.classes == g.classes);
        }
    }
}

TEST_CASE("random_coherent_structure") {
    Rng rng(1);
    CHECK(random_coherent_structure({1, 1}, rng, 0.0, 1.0) == ThresholdStructure{});

    Rng a(42), b(42);
    const auto s1 = random_coherent_structure({2, 2}, a, -3.0, 3.0);
    const auto s2 = random_coherent_structure({2, 2}, b, -3.0, 3.0);
    CHECK(s1 == s2);

    Rng c(7);
    int coherent = 0, with_ties = 0, non_lattice = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto ts = random_coherent_structure({4, 3}, c, -5.0, 5.0);
        coherent += is_coherent(ts).coherent ? 1 : 0;
        const auto g = tie_groups(ts);
        if (g.classes.size() < ThresholdStructure::interior_count(ts.spec())) ++with_ties;
        if (g.classes.size() > 5) ++non_lattice;
    }
    CHECK(coherent == 1000);
    CHECK(with_ties > 0);
    CHECK(non_lattice > 0);

    CHECK_THROWS_AS(random_coherent_structure({2, 2}, c, 1.0, 1.0), UserError);
}
