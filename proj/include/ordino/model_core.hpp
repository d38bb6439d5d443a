#pragma once

#include <compare>
#include <limits>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ordino/rng.hpp"

namespace ordino {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kExactTol = 1e-9;
inline constexpr double kTieTol = 1e-3;

struct ResponseSpec {
    int m1 = 1;
    int m2 = 1;

    void validate() const;
    bool operator==(const ResponseSpec&) const = default;
};

// Names one interior threshold entry. grid == 1 addresses A1[j1][j2]
// (j1 in 1..M1-1, j2 in 1..M2); grid == 2 addresses A2[j1][j2]
// (j1 in 1..M1, j2 in 1..M2-1).
struct EntryRef {
    int grid = 1;
    int j1 = 0;
    int j2 = 0;

    auto operator<=>(const EntryRef&) const = default;
    std::string name() const;
};

struct Corner {
    int j1 = 0;
    int j2 = 0;
    auto operator<=>(const Corner&) const = default;
};

// Half-open rectangle (lo1, hi1] x (lo2, hi2].
struct CellBounds {
    double lo1, hi1, lo2, hi2;
    bool contains(double y1, double y2) const { return lo1 < y1 && y1 <= hi1 && lo2 < y2 && y2 <= hi2; }
};

// Bivariate threshold structure. Cell (j1, j2), 1-based, is
//   (A1[j1-1][j2], A1[j1][j2]] x (A2[j1][j2-1], A2[j1][j2]].
// A1 rows 0 and M1 are fixed at -inf/+inf, as are A2 columns 0 and M2.
// Every row of A1 is strictly increasing in j1 and every column of A2 in j2.
class ThresholdStructure {
public:
    // The single-cell structure.
    ThresholdStructure() = default;

    // Full grids including boundary rows: a1 is (M1+1) x M2 indexed [j1][j2-1],
    // a2 is M1 x (M2+1) indexed [j1-1][j2]. Throws UserError on invariant
    // violations.
    static ThresholdStructure from_grids(const std::vector<std::vector<double>>& a1,
                                         const std::vector<std::vector<double>>& a2);

    // Interior entries in canonical order (see interior_entries).
    static ThresholdStructure from_interior(ResponseSpec spec, std::span<const double> values);

    // Lattice: A1[j1][.] = cuts1[j1-1], A2[.][j2] = cuts2[j2-1].
    static ThresholdStructure lattice(std::span<const double> cuts1, std::span<const double> cuts2);

    // Canonical interior order: A1 entries by j1 then j2, then A2 entries by j1 then j2.
    static std::vector<EntryRef> interior_entries(ResponseSpec spec);
    static std::size_t interior_count(ResponseSpec spec);
    static std::size_t interior_index(ResponseSpec spec, const EntryRef& e);

    ResponseSpec spec() const { return {m1_, m2_}; }
    int m1() const { return m1_; }
    int m2() const { return m2_; }

    double a1(int j1, int j2) const { return a1_[static_cast<std::size_t>(j1) * m2_ + (j2 - 1)]; }
    double a2(int j1, int j2) const { return a2_[static_cast<std::size_t>(j1 - 1) * (m2_ + 1) + j2]; }
    double entry(const EntryRef& e) const { return e.grid == 1 ? a1(e.j1, e.j2) : a2(e.j1, e.j2); }

    std::vector<double> interior() const;
    std::vector<std::vector<double>> grid1() const;
    std::vector<std::vector<double>> grid2() const;

    bool operator==(const ThresholdStructure&) const = default;

private:
    ThresholdStructure(int m1, int m2, std::vector<double> a1, std::vector<double> a2);
    void check_invariants() const;

    int m1_ = 1;
    int m2_ = 1;
    std::vector<double> a1_ = {-kInf, kInf};
    std::vector<double> a2_ = {-kInf, kInf};
};

// True when every row of A1 and every column of A2 (interior entries only)
// is strictly increasing. Used as the optimizer's feasibility guard.
bool interior_is_monotone(ResponseSpec spec, std::span<const double> interior, double margin = 0.0);

CellBounds cell_bounds(const ThresholdStructure& ts, int j1, int j2);

struct CoherencyReport {
    bool coherent = true;
    std::vector<Corner> violations;
};

// At interior corner (j1, j2), j1 in 1..M1-1 and j2 in 1..M2-1, the vertical
// jump is A1[j1][j2+1] - A1[j1][j2] and the horizontal jump is
// A2[j1+1][j2] - A2[j1][j2]. Coherent iff at least one jump is within tol at
// every corner.
double vertical_jump(const ThresholdStructure& ts, int j1, int j2);
double horizontal_jump(const ThresholdStructure& ts, int j1, int j2);
CoherencyReport is_coherent(const ThresholdStructure& ts, double tol = kExactTol);

struct DecisionTree {
    struct Leaf {
        int j1;
        int j2;
    };
    struct Split {
        int dim;  // 1 or 2
        double value;
        std::shared_ptr<const DecisionTree> left;   // latent <= value
        std::shared_ptr<const DecisionTree> right;  // latent > value
    };
    std::variant<Leaf, Split> node;

    bool is_leaf() const { return std::holds_alternative<Leaf>(node); }
};

struct TreeLeaf {
    int j1;
    int j2;
    CellBounds rect;
};

// Leaves in left-to-right order with the rectangle of each root-to-leaf path.
std::vector<TreeLeaf> tree_leaves(const DecisionTree& tree);
std::string render_tree(const DecisionTree& tree);

// Recursive full-spanning split search. Splits on dimension 1 before 2 and on
// the lowest threshold first. Returns nullopt when some sub-model admits no
// full-spanning split. Throws NumericalError on incoherent input.
std::optional<DecisionTree> detect_hierarchy(const ThresholdStructure& ts, double tol = kExactTol);

// Equality classes of interior entries: adjacent entries along one boundary
// (A1[j1][j2] ~ A1[j1][j2+1], A2[j1][j2] ~ A2[j1+1][j2]) within tol are
// joined, transitively. Classes are sorted and listed in order of their first
// member.
struct TieGroups {
    std::vector<std::vector<EntryRef>> classes;
};
TieGroups tie_groups(const ThresholdStructure& ts, double tol = kExactTol);

// Random coherent structure built from a random guillotine decision tree with
// split values drawn inside [lo, hi].
ThresholdStructure random_coherent_structure(ResponseSpec spec, Rng& rng, double lo, double hi);

}  // namespace ordino
