#include "ordino/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ordino/errors.hpp"

namespace ordino {

void ResponseSpec::validate() const {
    if (m1 < 1 || m2 < 1) {
        throw UserError("response spec: category counts must be >= 1 (got " + std::to_string(m1) + "x" +
                        std::to_string(m2) + ")");
    }
}

std::string EntryRef::name() const {
    std::ostringstream os;
    os << (grid == 1 ? "A1[" : "A2[") << j1 << "][" << j2 << "]";
    return os.str();
}

ThresholdStructure::ThresholdStructure(int m1, int m2, std::vector<double> a1, std::vector<double> a2)
    : m1_(m1), m2_(m2), a1_(std::move(a1)), a2_(std::move(a2)) {
    check_invariants();
}

void ThresholdStructure::check_invariants() const {
    spec().validate();
    for (int j2 = 1; j2 <= m2_; ++j2) {
        if (a1(0, j2) != -kInf || a1(m1_, j2) != kInf) {
            throw UserError("threshold structure: A1 boundary rows must be -inf / +inf");
        }
        for (int j1 = 1; j1 < m1_; ++j1) {
            if (!std::isfinite(a1(j1, j2))) throw UserError("threshold structure: interior entry " + EntryRef{1, j1, j2}.name() + " is not finite");
        }
        for (int j1 = 1; j1 <= m1_; ++j1) {
            if (!(a1(j1 - 1, j2) < a1(j1, j2))) {
                throw UserError("threshold structure: A1 not strictly increasing at " + EntryRef{1, j1, j2}.name());
            }
        }
    }
    for (int j1 = 1; j1 <= m1_; ++j1) {
        if (a2(j1, 0) != -kInf || a2(j1, m2_) != kInf) {
            throw UserError("threshold structure: A2 boundary columns must be -inf / +inf");
        }
        for (int j2 = 1; j2 < m2_; ++j2) {
            if (!std::isfinite(a2(j1, j2))) throw UserError("threshold structure: interior entry " + EntryRef{2, j1, j2}.name() + " is not finite");
        }
        for (int j2 = 1; j2 <= m2_; ++j2) {
            if (!(a2(j1, j2 - 1) < a2(j1, j2))) {
                throw UserError("threshold structure: A2 not strictly increasing at " + EntryRef{2, j1, j2}.name());
            }
        }
    }
}

ThresholdStructure ThresholdStructure::from_grids(const std::vector<std::vector<double>>& a1,
                                                  const std::vector<std::vector<double>>& a2) {
    if (a1.size() < 2 || a2.empty()) throw UserError("threshold structure: grids too small");
    const int m1 = static_cast<int>(a1.size()) - 1;
    const int m2 = static_cast<int>(a1.front().size());
    if (static_cast<int>(a2.size()) != m1) throw UserError("threshold structure: A2 must have M1 rows");
    std::vector<double> f1, f2;
    f1.reserve(a1.size() * m2);
    for (const auto& row : a1) {
        if (static_cast<int>(row.size()) != m2) throw UserError("threshold structure: ragged A1 grid");
        f1.insert(f1.end(), row.begin(), row.end());
    }
    for (const auto& row : a2) {
        if (static_cast<int>(row.size()) != m2 + 1) throw UserError("threshold structure: A2 rows must have M2+1 entries");
        f2.insert(f2.end(), row.begin(), row.end());
    }
    return ThresholdStructure(m1, m2, std::move(f1), std::move(f2));
}

ThresholdStructure ThresholdStructure::from_interior(ResponseSpec spec, std::span<const double> values) {
    spec.validate();
    if (values.size() != interior_count(spec)) {
        throw UserError("threshold structure: expected " + std::to_string(interior_count(spec)) +
                        " interior entries, got " + std::to_string(values.size()));
    }
    const int m1 = spec.m1, m2 = spec.m2;
    std::vector<double> f1(static_cast<std::size_t>(m1 + 1) * m2);
    std::vector<double> f2(static_cast<std::size_t>(m1) * (m2 + 1));
    std::size_t k = 0;
    for (int j2 = 1; j2 <= m2; ++j2) {
        f1[j2 - 1] = -kInf;
        f1[static_cast<std::size_t>(m1) * m2 + j2 - 1] = kInf;
    }
    for (int j1 = 1; j1 < m1; ++j1)
        for (int j2 = 1; j2 <= m2; ++j2) f1[static_cast<std::size_t>(j1) * m2 + j2 - 1] = values[k++];
    for (int j1 = 1; j1 <= m1; ++j1) {
        const std::size_t row = static_cast<std::size_t>(j1 - 1) * (m2 + 1);
        f2[row] = -kInf;
        f2[row + m2] = kInf;
        for (int j2 = 1; j2 < m2; ++j2) f2[row + j2] = values[k++];
    }
    return ThresholdStructure(m1, m2, std::move(f1), std::move(f2));
}

ThresholdStructure ThresholdStructure::lattice(std::span<const double> cuts1, std::span<const double> cuts2) {
    const ResponseSpec spec{static_cast<int>(cuts1.size()) + 1, static_cast<int>(cuts2.size()) + 1};
    std::vector<double> v;
    v.reserve(interior_count(spec));
    for (int j1 = 1; j1 < spec.m1; ++j1)
        for (int j2 = 1; j2 <= spec.m2; ++j2) v.push_back(cuts1[j1 - 1]);
    for (int j1 = 1; j1 <= spec.m1; ++j1)
        for (int j2 = 1; j2 < spec.m2; ++j2) v.push_back(cuts2[j2 - 1]);
    return from_interior(spec, v);
}

std::vector<EntryRef> ThresholdStructure::interior_entries(ResponseSpec spec) {
    std::vector<EntryRef> out;
    out.reserve(interior_count(spec));
    for (int j1 = 1; j1 < spec.m1; ++j1)
        for (int j2 = 1; j2 <= spec.m2; ++j2) out.push_back({1, j1, j2});
    for (int j1 = 1; j1 <= spec.m1; ++j1)
        for (int j2 = 1; j2 < spec.m2; ++j2) out.push_back({2, j1, j2});
    return out;
}

std::size_t ThresholdStructure::interior_count(ResponseSpec spec) {
    return static_cast<std::size_t>(spec.m1 - 1) * spec.m2 + static_cast<std::size_t>(spec.m1) * (spec.m2 - 1);
}

std::size_t ThresholdStructure::interior_index(ResponseSpec spec, const EntryRef& e) {
    if (e.grid == 1) {
        if (e.j1 < 1 || e.j1 >= spec.m1 || e.j2 < 1 || e.j2 > spec.m2) throw UserError("no interior entry " + e.name());
        return static_cast<std::size_t>(e.j1 - 1) * spec.m2 + (e.j2 - 1);
    }
    if (e.grid != 2 || e.j1 < 1 || e.j1 > spec.m1 || e.j2 < 1 || e.j2 >= spec.m2) throw UserError("no interior entry " + e.name());
    return static_cast<std::size_t>(spec.m1 - 1) * spec.m2 + static_cast<std::size_t>(e.j1 - 1) * (spec.m2 - 1) +
           (e.j2 - 1);
}

std::vector<double> ThresholdStructure::interior() const {
    std::vector<double> out;
    out.reserve(interior_count(spec()));
    for (const auto& e : interior_entries(spec())) out.push_back(entry(e));
    return out;
}

std::vector<std::vector<double>> ThresholdStructure::grid1() const {
    std::vector<std::vector<double>> g(m1_ + 1, std::vector<double>(m2_));
    for (int j1 = 0; j1 <= m1_; ++j1)
        for (int j2 = 1; j2 <= m2_; ++j2) g[j1][j2 - 1] = a1(j1, j2);
    return g;
}

std::vector<std::vector<double>> ThresholdStructure::grid2() const {
    std::vector<std::vector<double>> g(m1_, std::vector<double>(m2_ + 1));
    for (int j1 = 1; j1 <= m1_; ++j1)
        for (int j2 = 0; j2 <= m2_; ++j2) g[j1 - 1][j2] = a2(j1, j2);
    return g;
}

bool interior_is_monotone(ResponseSpec spec, std::span<const double> v, double margin) {
    if (v.size() != ThresholdStructure::interior_count(spec)) return false;
    for (double x : v)
        if (!std::isfinite(x)) return false;
    const std::size_t off2 = static_cast<std::size_t>(spec.m1 - 1) * spec.m2;
    for (int j2 = 1; j2 <= spec.m2; ++j2) {
        for (int j1 = 2; j1 < spec.m1; ++j1) {
            const double lo = v[static_cast<std::size_t>(j1 - 2) * spec.m2 + j2 - 1];
            const double hi = v[static_cast<std::size_t>(j1 - 1) * spec.m2 + j2 - 1];
            if (!(hi - lo > margin)) return false;
        }
    }
    for (int j1 = 1; j1 <= spec.m1; ++j1) {
        const std::size_t row = off2 + static_cast<std::size_t>(j1 - 1) * (spec.m2 - 1);
        for (int j2 = 2; j2 < spec.m2; ++j2) {
            if (!(v[row + j2 - 1] - v[row + j2 - 2] > margin)) return false;
        }
    }
    return true;
}

CellBounds cell_bounds(const ThresholdStructure& ts, int j1, int j2) {
    if (j1 < 1 || j1 > ts.m1() || j2 < 1 || j2 > ts.m2()) {
        throw UserError("cell (" + std::to_string(j1) + "," + std::to_string(j2) + ") out of range");
    }
    return {ts.a1(j1 - 1, j2), ts.a1(j1, j2), ts.a2(j1, j2 - 1), ts.a2(j1, j2)};
}

double vertical_jump(const ThresholdStructure& ts, int j1, int j2) { return ts.a1(j1, j2 + 1) - ts.a1(j1, j2); }

double horizontal_jump(const ThresholdStructure& ts, int j1, int j2) { return ts.a2(j1 + 1, j2) - ts.a2(j1, j2); }

CoherencyReport is_coherent(const ThresholdStructure& ts, double tol) {
    CoherencyReport rep;
    for (int j1 = 1; j1 < ts.m1(); ++j1) {
        for (int j2 = 1; j2 < ts.m2(); ++j2) {
            const double m = std::min(std::abs(vertical_jump(ts, j1, j2)), std::abs(horizontal_jump(ts, j1, j2)));
            if (m > tol) rep.violations.push_back({j1, j2});
        }
    }
    rep.coherent = rep.violations.empty();
    return rep;
}

namespace {

struct IndexBox {
    int lo1, hi1, lo2, hi2;
};

std::shared_ptr<const DecisionTree> build_tree(const ThresholdStructure& ts, IndexBox box, double tol) {
    if (box.lo1 == box.hi1 && box.lo2 == box.hi2) {
        return std::make_shared<const DecisionTree>(DecisionTree{DecisionTree::Leaf{box.lo1, box.lo2}});
    }
    // dimension 1: boundary k between cell columns k and k+1, constant across rows lo2..hi2
    for (int k = box.lo1; k < box.hi1; ++k) {
        double mn = kInf, mx = -kInf, sum = 0.0;
        for (int j2 = box.lo2; j2 <= box.hi2; ++j2) {
            const double v = ts.a1(k, j2);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            sum += v;
        }
        if (mx - mn <= tol) {
            auto left = build_tree(ts, {box.lo1, k, box.lo2, box.hi2}, tol);
            if (!left) return nullptr;
            auto right = build_tree(ts, {k + 1, box.hi1, box.lo2, box.hi2}, tol);
            if (!right) return nullptr;
            const double value = sum / (box.hi2 - box.lo2 + 1);
            return std::make_shared<const DecisionTree>(
                DecisionTree{DecisionTree::Split{1, value, std::move(left), std::move(right)}});
        }
    }
    for (int k = box.lo2; k < box.hi2; ++k) {
        double mn = kInf, mx = -kInf, sum = 0.0;
        for (int j1 = box.lo1; j1 <= box.hi1; ++j1) {
            const double v = ts.a2(j1, k);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            sum += v;
        }
        if (mx - mn <= tol) {
            auto left = build_tree(ts, {box.lo1, box.hi1, box.lo2, k}, tol);
            if (!left) return nullptr;
            auto right = build_tree(ts, {box.lo1, box.hi1, k + 1, box.hi2}, tol);
            if (!right) return nullptr;
            const double value = sum / (box.hi1 - box.lo1 + 1);
            return std::make_shared<const DecisionTree>(
                DecisionTree{DecisionTree::Split{2, value, std::move(left), std::move(right)}});
        }
    }
    return nullptr;
}

void collect_leaves(const DecisionTree& t, CellBounds rect, std::vector<TreeLeaf>& out) {
    if (const auto* leaf = std::get_if<DecisionTree::Leaf>(&t.node)) {
        out.push_back({leaf->j1, leaf->j2, rect});
        return;
    }
    const auto& s = std::get<DecisionTree::Split>(t.node);
    CellBounds l = rect, r = rect;
    if (s.dim == 1) {
        l.hi1 = s.value;
        r.lo1 = s.value;
    } else {
        l.hi2 = s.value;
        r.lo2 = s.value;
    }
    collect_leaves(*s.left, l, out);
    collect_leaves(*s.right, r, out);
}

void render(const DecisionTree& t, int depth, std::ostringstream& os) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    if (const auto* leaf = std::get_if<DecisionTree::Leaf>(&t.node)) {
        os << pad << "cell (" << leaf->j1 << ", " << leaf->j2 << ")\n";
        return;
    }
    const auto& s = std::get<DecisionTree::Split>(t.node);
    os << pad << "y" << s.dim << "* <= " << s.value << ":\n";
    render(*s.left, depth + 1, os);
    os << pad << "y" << s.dim << "* > " << s.value << ":\n";
    render(*s.right, depth + 1, os);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::vector<TreeLeaf> tree_leaves(const DecisionTree& tree) {
    std::vector<TreeLeaf> out;
    collect_leaves(tree, {-kInf, kInf, -kInf, kInf}, out);
    return out;
}

std::string render_tree(const DecisionTree& tree) {
    std::ostringstream os;
    os.precision(10);
    render(tree, 0, os);
    return os.str();
}

std::optional<DecisionTree> detect_hierarchy(const ThresholdStructure& ts, double tol) {
    const auto rep = is_coherent(ts, tol);
    if (!rep.coherent) {
        throw NumericalError("detect_hierarchy: structure is not coherent (" + std::to_string(rep.violations.size()) +
                             " corner violations)");
    }
    auto root = build_tree(ts, {1, ts.m1(), 1, ts.m2()}, tol);
    if (!root) return std::nullopt;
    return *root;
}

TieGroups tie_groups(const ThresholdStructure& ts, double tol) {
    const auto spec = ts.spec();
    const auto entries = ThresholdStructure::interior_entries(spec);
    UnionFind uf(entries.size());
    for (int j1 = 1; j1 < spec.m1; ++j1) {
        for (int j2 = 1; j2 < spec.m2; ++j2) {
            if (std::abs(ts.a1(j1, j2 + 1) - ts.a1(j1, j2)) <= tol) {
                uf.unite(ThresholdStructure::interior_index(spec, {1, j1, j2}),
                         ThresholdStructure::interior_index(spec, {1, j1, j2 + 1}));
            }
        }
    }
    for (int j1 = 1; j1 < spec.m1; ++j1) {
        for (int j2 = 1; j2 < spec.m2; ++j2) {
            if (std::abs(ts.a2(j1 + 1, j2) - ts.a2(j1, j2)) <= tol) {
                uf.unite(ThresholdStructure::interior_index(spec, {2, j1, j2}),
                         ThresholdStructure::interior_index(spec, {2, j1 + 1, j2}));
            }
        }
    }
    TieGroups out;
    std::vector<std::ptrdiff_t> slot(entries.size(), -1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::size_t r = uf.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::ptrdiff_t>(out.classes.size());
            out.classes.emplace_back();
        }
        out.classes[static_cast<std::size_t>(slot[r])].push_back(entries[i]);
    }
    return out;
}

namespace {

void random_split(std::vector<double>& interior, ResponseSpec spec, Rng& rng, IndexBox box, double x0, double x1,
                  double y0, double y1) {
    const bool can1 = box.hi1 > box.lo1;
    const bool can2 = box.hi2 > box.lo2;
    if (!can1 && !can2) return;
    const int dim = (can1 && can2) ? (rng.below(2) == 0 ? 1 : 2) : (can1 ? 1 : 2);
    const double u = 0.1 + 0.8 * rng.uniform();
    if (dim == 1) {
        const int k = box.lo1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(box.hi1 - box.lo1)));
        const double v = x0 + (x1 - x0) * u;
        for (int j2 = box.lo2; j2 <= box.hi2; ++j2) interior[ThresholdStructure::interior_index(spec, {1, k, j2})] = v;
        random_split(interior, spec, rng, {box.lo1, k, box.lo2, box.hi2}, x0, v, y0, y1);
        random_split(interior, spec, rng, {k + 1, box.hi1, box.lo2, box.hi2}, v, x1, y0, y1);
    } else {
        const int k = box.lo2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(box.hi2 - box.lo2)));
        const double v = y0 + (y1 - y0) * u;
        for (int j1 = box.lo1; j1 <= box.hi1; ++j1) interior[ThresholdStructure::interior_index(spec, {2, j1, k})] = v;
        random_split(interior, spec, rng, {box.lo1, box.hi1, box.lo2, k}, x0, x1, y0, v);
        random_split(interior, spec, rng, {box.lo1, box.hi1, k + 1, box.hi2}, x0, x1, v, y1);
    }
}

}  // namespace

ThresholdStructure random_coherent_structure(ResponseSpec spec, Rng& rng, double lo, double hi) {
    spec.validate();
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw UserError("random_coherent_structure: empty range");
    std::vector<double> interior(ThresholdStructure::interior_count(spec), 0.0);
    random_split(interior, spec, rng, {1, spec.m1, 1, spec.m2}, lo, hi, lo, hi);
    return ThresholdStructure::from_interior(spec, interior);
}

}  // namespace ordino
