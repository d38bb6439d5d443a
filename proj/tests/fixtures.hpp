#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "ordino/dgp.hpp"
#include "ordino/model_core.hpp"

namespace ordino::testing {

inline ThresholdStructure design1_structure() {
    // A1 row 1 = (-2, 1.5) across j2; A2 column 1 = 1 across j1
    return ThresholdStructure::from_interior({2, 2}, std::vector<double>{-2.0, 1.5, 1.0, 1.0});
}

inline ThresholdStructure design2_structure() {
    return ThresholdStructure::from_interior({4, 3}, std::vector<double>{
                                                         -3.25, -3.25, -0.5,  // A1[1][.]
                                                         0.5, 1.0, 5.0,       // A1[2][.]
                                                         8.0, 8.0, 8.0,       // A1[3][.]
                                                         -4.0, 0.5,           // A2[1][.]
                                                         -2.0, 0.5,           // A2[2][.]
                                                         -2.0, 0.5,           // A2[3][.]
                                                         0.0, 4.0,            // A2[4][.]
                                                     });
}

// Brute-force scan of 3x3 structures whose interior thresholds are integers in
// [0, top]; returns the first coherent one with no full-spanning split
// hierarchy, found by checking every possible split sequence directly.
inline bool has_full_split_tree(const ThresholdStructure& ts, int lo1, int hi1, int lo2, int hi2) {
    if (lo1 == hi1 && lo2 == hi2) return true;
    for (int k = lo1; k < hi1; ++k) {
        bool constant = true;
        for (int j2 = lo2; j2 < hi2; ++j2) constant = constant && ts.a1(k, j2) == ts.a1(k, j2 + 1);
        if (constant && has_full_split_tree(ts, lo1, k, lo2, hi2) && has_full_split_tree(ts, k + 1, hi1, lo2, hi2)) return true;
    }
    for (int k = lo2; k < hi2; ++k) {
        bool constant = true;
        for (int j1 = lo1; j1 < hi1; ++j1) constant = constant && ts.a2(j1, k) == ts.a2(j1 + 1, k);
        if (constant && has_full_split_tree(ts, lo1, hi1, lo2, k) && has_full_split_tree(ts, lo1, hi1, k + 1, hi2)) return true;
    }
    return false;
}

inline std::optional<ThresholdStructure> find_coherent_non_hierarchical_3x3(int top) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a <= top; ++a)
        for (int b = a + 1; b <= top; ++b) pairs.emplace_back(a, b);
    const std::size_t np = pairs.size();
    // A1 rows j2 = 1..3 each hold (A1[1][j2], A1[2][j2]); A2 columns j1 = 1..3 each hold (A2[j1][1], A2[j1][2])
    for (std::size_t r1 = 0; r1 < np; ++r1)
        for (std::size_t r2 = 0; r2 < np; ++r2)
            for (std::size_t r3 = 0; r3 < np; ++r3)
                for (std::size_t c1 = 0; c1 < np; ++c1)
                    for (std::size_t c2 = 0; c2 < np; ++c2)
                        for (std::size_t c3 = 0; c3 < np; ++c3) {
                            const std::pair<int, int> rows[3] = {pairs[r1], pairs[r2], pairs[r3]};
                            const std::pair<int, int> cols[3] = {pairs[c1], pairs[c2], pairs[c3]};
                            std::vector<double> v;
                            for (int j1 = 0; j1 < 2; ++j1)
                                for (int j2 = 0; j2 < 3; ++j2) v.push_back(j1 == 0 ? rows[j2].first : rows[j2].second);
                            for (int j1 = 0; j1 < 3; ++j1) {
                                v.push_back(cols[j1].first);
                                v.push_back(cols[j1].second);
                            }
                            const auto ts = ThresholdStructure::from_interior({3, 3}, v);
                            if (!is_coherent(ts, 0.0).coherent) continue;
                            if (!has_full_split_tree(ts, 1, 3, 1, 3)) return ts;
                        }
    return std::nullopt;
}

// 3x3 lattice design with one shared and one exclusive regressor per equation.
inline DesignConfig lattice_design(double rho) {
    DesignConfig d;
    d.spec = {3, 3};
    const std::vector<double> c1{-0.8, 0.7}, c2{-0.5, 0.9};
    d.thresholds = ThresholdStructure::lattice(c1, c2);
    d.beta1 = Eigen::Vector2d(0.8, 1.0);
    d.beta2 = Eigen::Vector2d(-0.6, 1.2);
    d.rho = rho;
    d.draws = {CovariateLaw::uniform("x", -1.0, 1.0), CovariateLaw::uniform("w1", -1.5, 1.5),
               CovariateLaw::uniform("w2", -1.5, 1.5)};
    d.x1_cols = {0, 1};
    d.x2_cols = {0, 2};
    d.validate();
    return d;
}

}  // namespace ordino::testing
