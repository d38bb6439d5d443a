#include "ordino/mrc.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ordino/errors.hpp"
#include "ordino/parallel.hpp"

namespace ordino {

void MrcConfig::validate() const {
    if (dim != 1 && dim != 2) throw UserError("mrc dimension must be 1 or 2");
    if (exclusive.empty()) throw UserError("mrc needs at least one exclusive column");
    std::set<int> seen;
    for (int c : exclusive) {
        if (c < 0) throw UserError("exclusive column indices must be non-negative");
        if (!seen.insert(c).second) throw UserError("exclusive columns must be distinct");
    }
    for (double h : bandwidth)
        if (!(h > 0.0) || !std::isfinite(h)) throw UserError("bandwidths must be positive");
    if (grid_levels < 1) throw UserError("grid levels must be >= 1");
    if (grid_points < 2) throw UserError("grid points must be >= 2");
    if (!(grid_half_width > 0.0)) throw UserError("grid half width must be > 0");
    if (workers < 0) throw UserError("workers must be >= 0");
}

std::vector<std::string> LocalizedColumns::names() const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < eq.size(); ++k) out.push_back("x" + std::to_string(eq[k]) + "_" + std::to_string(col[k] + 1));
    return out;
}

namespace {

const RowMatrix& design_matrix(const Dataset& data, int eq) { return eq == 1 ? data.X1 : data.X2; }

void check_columns(const Dataset& data, const MrcConfig& cfg) {
    cfg.validate();
    const int k = cfg.dim == 1 ? data.k1() : data.k2();
    for (int c : cfg.exclusive)
        if (c >= k) throw UserError("exclusive column " + std::to_string(c + 1) + " out of range (equation has " + std::to_string(k) + ")");
}

}  // namespace

LocalizedColumns localized_columns(const Dataset& data, const MrcConfig& cfg) {
    check_columns(data, cfg);
    LocalizedColumns out;
    for (int c = 0; c < data.k1(); ++c) {
        if (cfg.dim == 1 && std::find(cfg.exclusive.begin(), cfg.exclusive.end(), c) != cfg.exclusive.end()) continue;
        out.eq.push_back(1);
        out.col.push_back(c);
    }
    for (int c = 0; c < data.k2(); ++c) {
        if (cfg.dim == 2 && std::find(cfg.exclusive.begin(), cfg.exclusive.end(), c) != cfg.exclusive.end()) continue;
        bool duplicate = false;
        for (int c1 = 0; c1 < data.k1() && !duplicate; ++c1) duplicate = data.X2.col(c) == data.X1.col(c1);
        if (duplicate) continue;
        out.eq.push_back(2);
        out.col.push_back(c);
    }
    return out;
}

std::vector<double> default_bandwidth(const Dataset& data, const MrcConfig& cfg) {
    const auto loc = localized_columns(data, cfg);
    const auto n = data.n();
    if (n < 10) throw UserError("default bandwidth needs at least 10 observations");
    std::vector<double> h;
    for (std::size_t k = 0; k < loc.eq.size(); ++k) {
        const auto v = design_matrix(data, loc.eq[k]).col(loc.col[k]);
        const double mean = v.mean();
        const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw UserError("localized column " + loc.names()[k] + " is constant");
        h.push_back(1.06 * sd * std::pow(static_cast<double>(n), -1.0 / 6.0));
    }
    return h;
}

namespace {

constexpr std::size_t kPairCacheLimit = std::size_t{1} << 22;
constexpr std::size_t kRowBlock = 64;

// Pairs are oriented so that y[hi] > y[lo]; a pair counts when the index
// agrees.
class MrcProblem {
public:
    MrcProblem(const Dataset& data, const MrcConfig& cfg) : cfg_(cfg) {
        check_columns(data, cfg);
        n_ = data.n();
        if (n_ < 2) throw UserError("mrc needs at least 2 observations");
        loc_ = localized_columns(data, cfg);
        h_ = cfg.bandwidth.empty() ? (loc_.eq.empty() ? std::vector<double>{} : default_bandwidth(data, cfg)) : cfg.bandwidth;
        if (h_.size() != loc_.eq.size()) {
            throw UserError("expected " + std::to_string(loc_.eq.size()) + " bandwidths, got " + std::to_string(h_.size()));
        }
        y_ = cfg.dim == 1 ? data.y1 : data.y2;
        const auto& X = design_matrix(data, cfg.dim);
        E_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(cfg.exclusive.size()));
        for (std::size_t c = 0; c < cfg.exclusive.size(); ++c) E_.col(static_cast<Eigen::Index>(c)) = X.col(cfg.exclusive[c]);
        Z_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(h_.size()));
        for (std::size_t k = 0; k < h_.size(); ++k)
            Z_.col(static_cast<Eigen::Index>(k)) = design_matrix(data, loc_.eq[k]).col(loc_.col[k]) / h_[k];
        workers_ = cfg.workers > 0 ? cfg.workers : default_worker_count();
        cached_ = n_ * (n_ - 1) / 2 <= kPairCacheLimit;
        if (cached_) {
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    if (y_[i] == y_[j]) continue;
                    const double w = weight(i, j);
                    mass_ += w;
                    if (w == 0.0) continue;
                    if (y_[i] > y_[j]) pairs_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
                    else pairs_.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), w});
                }
        } else {
            mass_ = scan([](double) { return true; }, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_)));
        }
    }

    std::size_t free_size() const { return cfg_.exclusive.size() - 1; }
    double mass() const { return mass_; }
    const std::vector<double>& bandwidth() const { return h_; }
    const LocalizedColumns& localized() const { return loc_; }

    double value(const std::vector<double>& b_free) const {
        if (b_free.size() != free_size()) {
            throw UserError("expected " + std::to_string(free_size()) + " free coefficients, got " + std::to_string(b_free.size()));
        }
        Eigen::VectorXd b(static_cast<Eigen::Index>(b_free.size() + 1));
        b[0] = 1.0;
        for (std::size_t k = 0; k < b_free.size(); ++k) b[static_cast<Eigen::Index>(k + 1)] = b_free[k];
        const Eigen::VectorXd idx = E_ * b;
        if (!cached_) return scan([](double d) { return d > 0.0; }, idx);
        const std::size_t blocks = (pairs_.size() + kPairBlock - 1) / kPairBlock;
        std::vector<double> part(blocks, 0.0);
        parallel_for(blocks, workers_, [&](std::size_t blk) {
            double s = 0.0;
            const std::size_t end = std::min(pairs_.size(), (blk + 1) * kPairBlock);
            for (std::size_t k = blk * kPairBlock; k < end; ++k) {
                const auto& p = pairs_[k];
                if (idx[p.hi] > idx[p.lo]) s += p.w;
            }
            part[blk] = s;
        });
        double total = 0.0;
        for (double s : part) total += s;
        return total;
    }

private:
    struct Pair {
        std::uint32_t hi, lo;
        double w;
    };
    static constexpr std::size_t kPairBlock = 1 << 16;

    double weight(std::size_t i, std::size_t j) const {
        if (Z_.cols() == 0) return 1.0;
        return std::exp(-0.5 * (Z_.row(static_cast<Eigen::Index>(i)) - Z_.row(static_cast<Eigen::Index>(j))).squaredNorm());
    }

    // Uncached pair scan by row blocks; counts w when accept(idx[hi] - idx[lo]).
    template <class Accept>
    double scan(Accept accept, const Eigen::VectorXd& idx) const {
        const std::size_t blocks = (n_ + kRowBlock - 1) / kRowBlock;
        std::vector<double> part(blocks, 0.0);
        parallel_for(blocks, workers_, [&](std::size_t blk) {
            double s = 0.0;
            const std::size_t end = std::min(n_, (blk + 1) * kRowBlock);
            for (std::size_t i = blk * kRowBlock; i < end; ++i)
                for (std::size_t j = i + 1; j < n_; ++j) {
                    if (y_[i] == y_[j]) continue;
                    const double d = y_[i] > y_[j] ? idx[static_cast<Eigen::Index>(i)] - idx[static_cast<Eigen::Index>(j)]
                                                   : idx[static_cast<Eigen::Index>(j)] - idx[static_cast<Eigen::Index>(i)];
                    if (accept(d)) s += weight(i, j);
                }
            part[blk] = s;
        });
        double total = 0.0;
        for (double s : part) total += s;
        return total;
    }

    MrcConfig cfg_;
    std::size_t n_ = 0;
    LocalizedColumns loc_;
    std::vector<double> h_;
    std::vector<int> y_;
    Eigen::MatrixXd E_;
    Eigen::MatrixXd Z_;
    int workers_ = 1;
    bool cached_ = false;
    std::vector<Pair> pairs_;
    double mass_ = 0.0;
};

}  // namespace

double mrc_objective(const std::vector<double>& b_free, const Dataset& data, const MrcConfig& cfg) {
    return MrcProblem(data, cfg).value(b_free);
}

MrcResult fit_mrc(const Dataset& data, const MrcConfig& cfg) {
    const MrcProblem prob(data, cfg);
    MrcResult res;
    res.bandwidth = prob.bandwidth();
    res.localized = prob.localized();
    res.weight_mass = prob.mass();
    if (!(prob.mass() > 1e-10)) throw NumericalError("mrc objective is flat: kernel weights vanish (bandwidth too small)");

    const std::size_t q = prob.free_size();
    res.b_free.assign(q, 0.0);
    if (q == 0) {
        res.objective = prob.value({});
        res.trace.push_back(res.objective);
        res.evaluations = 1;
        res.beta = {1.0};
        return res;
    }
    const auto P = static_cast<std::size_t>(cfg.grid_points);
    std::vector<double> center(q, 0.0);
    double half = cfg.grid_half_width;
    for (int level = 0; level < cfg.grid_levels; ++level) {
        const double step = 2.0 * half / static_cast<double>(P - 1);
        std::size_t total = 1;
        for (std::size_t k = 0; k < q; ++k) total *= P;
        auto point = [&](std::size_t flat) {
            std::vector<double> b(q);
            for (std::size_t k = 0; k < q; ++k) {
                b[k] = center[k] - half + step * static_cast<double>(flat % P);
                flat /= P;
            }
            return b;
        };
        std::vector<double> vals(total);
        for (std::size_t f = 0; f < total; ++f) vals[f] = prob.value(point(f));
        res.evaluations += total;
        const double best = *std::max_element(vals.begin(), vals.end());
        // the objective is a step function: among tied maximizers take the
        // one nearest their centroid
        std::vector<std::size_t> top;
        std::vector<double> centroid(q, 0.0);
        for (std::size_t f = 0; f < total; ++f) {
            if (vals[f] != best) continue;
            top.push_back(f);
            const auto b = point(f);
            for (std::size_t k = 0; k < q; ++k) centroid[k] += b[k];
        }
        for (auto& c : centroid) c /= static_cast<double>(top.size());
        std::size_t pick = top.front();
        double nearest = kInf;
        for (auto f : top) {
            const auto b = point(f);
            double d = 0.0;
            for (std::size_t k = 0; k < q; ++k) d += (b[k] - centroid[k]) * (b[k] - centroid[k]);
            if (d < nearest) {
                nearest = d;
                pick = f;
            }
        }
        center = point(pick);
        res.trace.push_back(best);
        res.objective = best;
        res.resolution = step;
        half = step;
    }
    res.b_free = center;
    res.beta = {1.0};
    res.beta.insert(res.beta.end(), center.begin(), center.end());
    return res;
}

DesignConfig mrc_design(double b) {
    DesignConfig d;
    d.spec = {5, 3};
    const std::vector<double> c1{-2.0, -0.7, 0.7, 2.0}, c2{-0.6, 0.6};
    d.thresholds = ThresholdStructure::lattice(c1, c2);
    d.beta1 = Eigen::Vector3d(0.5, 1.0, b);
    d.beta2 = Eigen::Vector2d(0.8, 1.0);
    d.rho = 0.3;
    d.draws = {CovariateLaw::uniform("x", -1.0, 1.0), CovariateLaw::uniform("xa", -2.0, 2.0),
               CovariateLaw::uniform("xb", -2.0, 2.0), CovariateLaw::uniform("w2", -1.5, 1.5)};
    d.x1_cols = {0, 1, 2};
    d.x2_cols = {0, 3};
    d.validate();
    return d;
}

}  // namespace ordino
