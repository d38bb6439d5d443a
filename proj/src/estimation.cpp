#include "ordino/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "ordino/errors.hpp"
#include "ordino/gaussian.hpp"
#include "ordino/parallel.hpp"

namespace ordino {

std::string to_string(ModelKind k) { return k == ModelKind::Lattice ? "lattice" : "nonlattice"; }

ModelKind parse_model_kind(const std::string& s) {
    if (s == "nonlattice") return ModelKind::NonLattice;
    if (s == "lattice") return ModelKind::Lattice;
    throw UserError("unknown model '" + s + "' (expected nonlattice or lattice)");
}

void FitConfig::validate() const {
    if (multistart_count < 1) throw UserError("multistart count must be >= 1");
    if (max_iterations < 1) throw UserError("max iterations must be >= 1");
    if (!(gradient_tolerance > 0.0)) throw UserError("gradient tolerance must be > 0");
    if (!(tie_tolerance >= 0.0)) throw UserError("tie tolerance must be >= 0");
    if (workers < 0) throw UserError("workers must be >= 0");
}

Eigen::MatrixXd constrained_covariance(const Eigen::MatrixXd& J, const Eigen::MatrixXd& R) {
    const Eigen::Index q = J.rows();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(J);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > hi * 1e-10)) {
        throw NumericalError("information matrix is singular (condition number " + std::to_string(hi / std::max(lo, 0.0)) + ")");
    }
    const Eigen::MatrixXd Jinv = ldlt.solve(Eigen::MatrixXd::Identity(q, q));
    if (R.rows() == 0) return 0.5 * (Jinv + Jinv.transpose());
    const Eigen::MatrixXd JR = Jinv * R.transpose();
    const Eigen::MatrixXd M = R * JR;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw NumericalError("constraint projection R J^-1 R' is singular");
    const Eigen::MatrixXd B = Jinv - JR * lu.solve(JR.transpose());
    const Eigen::MatrixXd V = B * J * B.transpose();
    return 0.5 * (V + V.transpose());
}

namespace {

// Reduced coordinates u = (beta1, beta2, one value per threshold group, t)
// with rho = tanh(t). Each interior entry belongs to exactly one group.
struct Grouping {
    ParamLayout layout;
    std::vector<int> group_of;
    int groups = 0;

    std::size_t free_size() const { return static_cast<std::size_t>(layout.k1 + layout.k2 + groups + 1); }
    std::size_t group_offset() const { return static_cast<std::size_t>(layout.k1 + layout.k2); }

    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(groups));
        for (std::size_t i = 0; i < group_of.size(); ++i) m[static_cast<std::size_t>(group_of[i])].push_back(i);
        return m;
    }

    std::vector<double> interior_of(const Eigen::VectorXd& u) const {
        std::vector<double> in(group_of.size());
        for (std::size_t i = 0; i < in.size(); ++i) in[i] = u[static_cast<Eigen::Index>(group_offset() + group_of[i])];
        return in;
    }

    ModelParams params_of(const Eigen::VectorXd& u) const {
        ModelParams p;
        p.beta1 = u.segment(0, layout.k1);
        p.beta2 = u.segment(layout.k1, layout.k2);
        p.thresholds = ThresholdStructure::from_interior(layout.spec, interior_of(u));
        p.rho = std::tanh(u[u.size() - 1]);
        return p;
    }

    // Group values are the member means.
    Eigen::VectorXd u_of(const ModelParams& p) const {
        Eigen::VectorXd u(static_cast<Eigen::Index>(free_size()));
        u.segment(0, layout.k1) = p.beta1;
        u.segment(layout.k1, layout.k2) = p.beta2;
        const auto in = p.thresholds.interior();
        std::vector<double> sum(static_cast<std::size_t>(groups), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(groups), 0);
        for (std::size_t i = 0; i < in.size(); ++i) {
            sum[static_cast<std::size_t>(group_of[i])] += in[i];
            ++cnt[static_cast<std::size_t>(group_of[i])];
        }
        for (int g = 0; g < groups; ++g) u[static_cast<Eigen::Index>(group_offset()) + g] = sum[g] / cnt[g];
        u[u.size() - 1] = std::atanh(p.rho);
        return u;
    }

    // d theta / d w' where w is u with rho in place of t.
    Eigen::MatrixXd expansion() const {
        const auto p = static_cast<Eigen::Index>(layout.size());
        const auto q = static_cast<Eigen::Index>(free_size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, q);
        for (int c = 0; c < layout.k1 + layout.k2; ++c) T(c, c) = 1.0;
        for (std::size_t i = 0; i < group_of.size(); ++i) {
            T(static_cast<Eigen::Index>(layout.threshold_offset() + i), static_cast<Eigen::Index>(group_offset() + group_of[i])) = 1.0;
        }
        T(p - 1, q - 1) = 1.0;
        return T;
    }

    Eigen::VectorXd reduce_gradient(const Eigen::VectorXd& g_theta, double rho) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_size()));
        g.segment(0, layout.k1 + layout.k2) = g_theta.segment(0, layout.k1 + layout.k2);
        for (std::size_t i = 0; i < group_of.size(); ++i) {
            g[static_cast<Eigen::Index>(group_offset() + group_of[i])] += g_theta[static_cast<Eigen::Index>(layout.threshold_offset() + i)];
        }
        g[g.size() - 1] = g_theta[g_theta.size() - 1] * (1.0 - rho * rho);
        return g;
    }
};

Grouping singleton_grouping(const ParamLayout& layout) {
    Grouping g;
    g.layout = layout;
    const auto nt = ThresholdStructure::interior_count(layout.spec);
    g.group_of.resize(nt);
    std::iota(g.group_of.begin(), g.group_of.end(), 0);
    g.groups = static_cast<int>(nt);
    return g;
}

Grouping lattice_grouping(const ParamLayout& layout) {
    Grouping g;
    g.layout = layout;
    const auto& spec = layout.spec;
    for (const auto& e : ThresholdStructure::interior_entries(spec)) {
        g.group_of.push_back(e.grid == 1 ? e.j1 - 1 : (spec.m1 - 1) + (e.j2 - 1));
    }
    g.groups = (spec.m1 - 1) + (spec.m2 - 1);
    return g;
}

struct Objective {
    const Dataset& data;
    const Grouping& grouping;
    double lambda;

    // Returns false outside the feasible set (non-monotone thresholds or a
    // non-finite value).
    bool eval(const Eigen::VectorXd& u, double& value, Eigen::VectorXd* grad) const {
        if (!u.allFinite()) return false;
        const auto in = grouping.interior_of(u);
        if (!interior_is_monotone(grouping.layout.spec, in)) return false;
        const double rho = std::tanh(u[u.size() - 1]);
        if (!(std::abs(rho) < 1.0)) return false;
        const auto p = grouping.params_of(u);
        if (grad == nullptr) {
            value = loglik(p, data) + penalty(p, lambda);
            return std::isfinite(value);
        }
        const auto lg = loglik_and_score(p, data);
        value = lg.value + penalty(p, lambda);
        *grad = grouping.reduce_gradient(lg.grad + penalty_gradient(p, lambda), rho);
        return std::isfinite(value) && grad->allFinite();
    }
};

class CeresObjective final : public ceres::FirstOrderFunction {
public:
    explicit CeresObjective(const Objective& f) : f_(f) {}
    bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
        const auto n = static_cast<Eigen::Index>(f_.grouping.free_size());
        const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(parameters, n);
        double value = 0.0;
        Eigen::VectorXd g;
        if (!f_.eval(u, value, gradient != nullptr ? &g : nullptr)) return false;
        cost[0] = -value;
        if (gradient != nullptr) Eigen::Map<Eigen::VectorXd>(gradient, n) = -g;
        return true;
    }
    int NumParameters() const override { return static_cast<int>(f_.grouping.free_size()); }

private:
    const Objective& f_;
};

// Penalty continuation: each start is first fitted with a fraction of the
// final weight so the likelihood picks the tie pattern before the penalty
// locks it in.
const std::vector<double> kPenaltySchedule = {1e-4, 1e-2, 1.0};

struct Ascent {
    Eigen::VectorXd u;
    double value = -kInf;
    double gradient_norm = kInf;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;
};

// Quasi-Newton (BFGS, Wolfe line search) ascent. A stalled line search is
// retried from the reached point with a fresh curvature estimate.
Ascent maximize(const Objective& f, Eigen::VectorXd u, int max_iterations, double gtol) {
    Ascent out;
    Eigen::VectorXd g;
    double value = 0.0;
    if (!f.eval(u, value, &g)) throw NumericalError("starting point is infeasible");
    out.trace.push_back(value);
    constexpr int kRounds = 3;
    for (int round = 0; round < kRounds && out.iterations < max_iterations; ++round) {
        ceres::GradientProblemSolver::Options opt;
        opt.line_search_direction_type = ceres::BFGS;
        opt.line_search_type = ceres::WOLFE;
        opt.max_num_iterations = max_iterations - out.iterations;
        opt.gradient_tolerance = gtol;
        opt.function_tolerance = 1e-16;
        opt.parameter_tolerance = 1e-16;
        opt.logging_type = ceres::SILENT;
        opt.minimizer_progress_to_stdout = false;
        ceres::GradientProblem problem(new CeresObjective(f));
        ceres::GradientProblemSolver::Summary summary;
        const double before = value;
        ceres::Solve(opt, problem, u.data(), &summary);
        for (std::size_t k = 1; k < summary.iterations.size(); ++k) out.trace.push_back(-summary.iterations[k].cost);
        out.iterations += static_cast<int>(summary.iterations.size()) - 1;
        if (!f.eval(u, value, &g)) throw NumericalError("optimizer left the feasible set");
        if (g.lpNorm<Eigen::Infinity>() <= gtol) break;
        if (round > 0 && value - before <= 1e-15 * (1.0 + std::abs(value))) break;
    }
    out.u = u;
    out.value = value;
    out.gradient_norm = g.lpNorm<Eigen::Infinity>();
    out.converged = out.gradient_norm <= gtol;
    return out;
}

// Damped Newton steps on a finite-difference Hessian of the analytic
// gradient. Negative-curvature and near-flat directions are flipped and
// floored so every step is an ascent direction; steps are only taken when the
// objective does not decrease beyond rounding.
void polish(const Objective& f, Ascent& a, double gtol, int max_steps = 20) {
    Eigen::VectorXd g;
    double value = 0.0;
    if (!f.eval(a.u, value, &g)) return;
    const auto q = a.u.size();
    for (int step = 0; step < max_steps && g.lpNorm<Eigen::Infinity>() > gtol; ++step) {
        Eigen::MatrixXd H(q, q);
        bool ok = true;
        for (Eigen::Index k = 0; k < q && ok; ++k) {
            const double h = 1e-5 * (1.0 + std::abs(a.u[k]));
            Eigen::VectorXd up = a.u, um = a.u, gp, gm;
            double vp = 0.0, vm = 0.0;
            up[k] += h;
            um[k] -= h;
            ok = f.eval(up, vp, &gp) && f.eval(um, vm, &gm);
            if (ok) H.col(k) = (gp - gm) / (2.0 * h);
        }
        if (!ok) break;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-0.5 * (H + H.transpose()));
        Eigen::VectorXd lam = es.eigenvalues().cwiseAbs();
        const double floor = std::max(lam.maxCoeff(), 1e-300) * 1e-10;
        lam = lam.cwiseMax(floor);
        const Eigen::VectorXd d = es.eigenvectors() * (es.eigenvectors().transpose() * g).cwiseQuotient(lam);
        bool moved = false;
        for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
            Eigen::VectorXd un = a.u + alpha * d, gn;
            double vn = 0.0;
            if (!f.eval(un, vn, &gn)) continue;
            // near the optimum the value change is below rounding; accept a
            // smaller gradient instead
            const bool flat = vn >= value - 1e-13 * (1.0 + std::abs(value)) &&
                              gn.lpNorm<Eigen::Infinity>() < 0.5 * g.lpNorm<Eigen::Infinity>();
            if (vn >= value || flat) {
                a.u = un;
                value = vn;
                g = gn;
                a.trace.push_back(vn);
                ++a.iterations;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    a.value = value;
    a.gradient_norm = g.lpNorm<Eigen::Infinity>();
    a.converged = a.gradient_norm <= gtol;
}

void check_categories(const Dataset& data, ResponseSpec spec) {
    std::vector<int> c1(static_cast<std::size_t>(spec.m1), 0), c2(static_cast<std::size_t>(spec.m2), 0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        ++c1[static_cast<std::size_t>(data.y1[i] - 1)];
        ++c2[static_cast<std::size_t>(data.y2[i] - 1)];
    }
    for (int j = 0; j < spec.m1; ++j)
        if (c1[j] == 0) throw UserError("degenerate category: y1 = " + std::to_string(j + 1) + " is never observed");
    for (int j = 0; j < spec.m2; ++j)
        if (c2[j] == 0) throw UserError("degenerate category: y2 = " + std::to_string(j + 1) + " is never observed");
}

// Merges base groups with the tie classes of the current estimate.
Grouping merge_ties(const Grouping& base, const ThresholdStructure& ts, double tol) {
    const auto spec = base.layout.spec;
    const auto nt = base.group_of.size();
    std::vector<std::size_t> parent(nt);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    std::vector<std::size_t> first(static_cast<std::size_t>(base.groups), nt);
    for (std::size_t i = 0; i < nt; ++i) {
        auto& f = first[static_cast<std::size_t>(base.group_of[i])];
        if (f == nt) f = i;
        else unite(f, i);
    }
    for (const auto& cls : tie_groups(ts, tol).classes) {
        const auto a = ThresholdStructure::interior_index(spec, cls.front());
        for (const auto& e : cls) unite(a, ThresholdStructure::interior_index(spec, e));
    }
    Grouping g;
    g.layout = base.layout;
    g.group_of.assign(nt, -1);
    std::vector<int> id(nt, -1);
    for (std::size_t i = 0; i < nt; ++i) {
        const auto r = find(i);
        if (id[r] < 0) id[r] = g.groups++;
        g.group_of[i] = id[r];
    }
    return g;
}

void fill_covariance(EstimationResult& res, const Grouping& grouping, const Dataset& data) {
    const auto T = grouping.expansion();
    const Eigen::MatrixXd S = observation_scores(res.params_hat, data) * T;
    const double n = static_cast<double>(data.n());
    const Eigen::MatrixXd J = S.transpose() * S / n;
    Eigen::MatrixXd Rfull = constraint_jacobian(res.params_hat) * T;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < Rfull.rows(); ++r)
        if (Rfull.row(r).norm() > 1e-8) rows.push_back(r);
    Eigen::MatrixXd R(static_cast<Eigen::Index>(rows.size()), Rfull.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) R.row(static_cast<Eigen::Index>(r)) = Rfull.row(rows[r]);
    res.active_constraints = static_cast<int>(rows.size());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    res.information_condition = lo > 0.0 ? hi / lo : kInf;
    const auto p = static_cast<Eigen::Index>(res.layout.size());
    try {
        const Eigen::MatrixXd V = constrained_covariance(J, R);
        res.covariance = T * V * T.transpose() / n;
        res.covariance = 0.5 * (res.covariance + res.covariance.transpose());
        res.se = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
        res.covariance_ok = true;
    } catch (const NumericalError& e) {
        res.covariance = Eigen::MatrixXd::Constant(p, p, std::nan(""));
        res.se = Eigen::VectorXd::Constant(p, std::nan(""));
        res.covariance_ok = false;
        if (!res.note.empty()) res.note += "; ";
        res.note += e.what();
    }
}

EstimationResult run_fit(ModelKind kind, const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config) {
    config.validate();
    spec.validate();
    if (data.k1() != k1 || data.k2() != k2) throw UserError("dataset covariate counts do not match k1/k2");
    data.validate(spec);
    const ParamLayout layout{spec, k1, k2};
    const Grouping base = kind == ModelKind::Lattice ? lattice_grouping(layout) : singleton_grouping(layout);
    if (data.n() <= base.free_size()) {
        throw UserError("sample size " + std::to_string(data.n()) + " does not exceed the number of free parameters (" +
                        std::to_string(base.free_size()) + ")");
    }
    check_categories(data, spec);

    EstimationResult res;
    res.model = kind;
    res.layout = layout;
    res.n = data.n();
    res.lambda = config.lambda < 0.0 ? static_cast<double>(data.n()) : config.lambda;
    const Objective f{data, base, res.lambda};

    const auto starts = static_cast<std::size_t>(config.multistart_count);
    std::vector<Ascent> runs(starts);
    std::vector<bool> ok(starts, false);
    const int workers = config.workers > 0 ? config.workers : default_worker_count();
    parallel_for(starts, workers, [&](std::size_t s) {
        Rng rng(mix_seed(config.seed, s));
        const auto p0 = multistart_draw(config, spec, data, rng);
        try {
            Eigen::VectorXd u = base.u_of(p0);
            for (double scale : kPenaltySchedule) {
                if (scale >= 1.0 || kind == ModelKind::Lattice) break;
                const Objective weak{data, base, res.lambda * scale};
                u = maximize(weak, u, config.max_iterations, 1e-6).u;
            }
            runs[s] = maximize(f, u, config.max_iterations, config.gradient_tolerance);
            ok[s] = true;
        } catch (const NumericalError&) {
        }
    });
    int best = -1;
    for (std::size_t s = 0; s < starts; ++s) {
        if (!ok[s]) continue;
        if (runs[s].converged) ++res.starts_converged;
        if (best < 0 || runs[s].value > runs[static_cast<std::size_t>(best)].value) best = static_cast<int>(s);
    }
    if (best < 0) throw NumericalError("no start produced a feasible ascent");
    res.starts_tried = static_cast<int>(starts);
    res.best_start = best;
    Ascent win = std::move(runs[static_cast<std::size_t>(best)]);
    polish(f, win, config.gradient_tolerance);
    res.trace = win.trace;
    res.iterations = win.iterations;

    // snap ties and re-maximize in the reduced coordinates
    Grouping grouping = base;
    const auto pre = base.params_of(win.u);
    res.objective_before_snap = win.value;
    const Grouping merged = merge_ties(base, pre.thresholds, config.tie_tolerance);
    if (merged.groups < base.groups) {
        const Eigen::VectorXd u_snap = merged.u_of(pre);
        if (interior_is_monotone(spec, merged.interior_of(u_snap))) {
            const Objective g{data, merged, res.lambda};
            Ascent again = maximize(g, u_snap, config.max_iterations, config.gradient_tolerance);
            polish(g, again, config.gradient_tolerance);
            res.iterations += again.iterations;
            win = std::move(again);
            grouping = merged;
            res.refit_after_snap = true;
        } else {
            res.note = "tie snapping skipped: snapped thresholds are not monotone";
        }
    }
    const auto in_pre = pre.thresholds.interior();
    for (const auto& m : grouping.members()) {
        if (m.size() < 2) continue;
        TieClass t;
        double lo = kInf, hi = -kInf;
        for (auto i : m) {
            t.members.push_back(ThresholdStructure::interior_entries(spec)[i]);
            lo = std::min(lo, in_pre[i]);
            hi = std::max(hi, in_pre[i]);
        }
        t.spread = hi - lo;
        t.value = win.u[static_cast<Eigen::Index>(grouping.group_offset() + grouping.group_of[m.front()])];
        res.ties.push_back(std::move(t));
    }

    res.params_hat = grouping.params_of(win.u);
    res.theta = layout.pack(res.params_hat);
    res.loglik = loglik(res.params_hat, data);
    res.penalty = penalty(res.params_hat, res.lambda) + 0.0;  // no negative zero in reports
    res.objective = res.loglik + res.penalty;
    res.gradient_norm = win.gradient_norm;
    res.converged = win.converged;
    res.free_parameters = grouping.free_size();
    if (!res.converged) {
        res.note = "gradient norm " + std::to_string(win.gradient_norm) + " above tolerance";
    }
    fill_covariance(res, grouping, data);
    return res;
}

}  // namespace

ModelParams multistart_draw(const FitConfig& config, ResponseSpec spec, const Dataset& data, Rng& rng) {
    (void)config;
    const int k1 = data.k1(), k2 = data.k2();
    ModelParams p;
    p.beta1.resize(k1);
    p.beta2.resize(k2);
    for (int c = 0; c < k1; ++c) p.beta1[c] = rng.normal(0.0, 0.5);
    for (int c = 0; c < k2; ++c) p.beta2[c] = rng.normal(0.0, 0.5);

    const std::size_t n = data.n();
    auto cuts = [&](const Eigen::VectorXd& beta, const RowMatrix& X, const std::vector<int>& y, int m) {
        std::vector<double> out;
        if (m < 2) return out;
        double mu = 0.0, var = 0.0;
        if (n > 0) {
            const Eigen::VectorXd idx = X * beta;
            mu = idx.mean();
            var = (idx.array() - mu).square().mean();
        }
        const double sd = std::sqrt(var + 1.0);
        std::vector<double> count(static_cast<std::size_t>(m), 0.0);
        for (int v : y)
            if (v >= 1 && v <= m) count[static_cast<std::size_t>(v - 1)] += 1.0;
        const double total = std::max<double>(static_cast<double>(n), 1.0);
        double cum = 0.0;
        for (int j = 1; j < m; ++j) {
            cum += count[static_cast<std::size_t>(j - 1)];
            const double lo = 0.5 / (total + 1.0);
            const double q = std::clamp(n > 0 ? cum / total : static_cast<double>(j) / m, lo, 1.0 - lo);
            out.push_back(mu + sd * std_normal_inv_cdf(q));
        }
        return out;
    };
    const auto c1 = cuts(p.beta1, data.X1, data.y1, spec.m1);
    const auto c2 = cuts(p.beta2, data.X2, data.y2, spec.m2);

    // A1 column j2 over j1, then A2 row j1 over j2; each sorted ascending
    std::vector<std::vector<double>> a1(static_cast<std::size_t>(spec.m2)), a2(static_cast<std::size_t>(spec.m1));
    for (int j2 = 1; j2 <= spec.m2; ++j2) {
        auto& col = a1[static_cast<std::size_t>(j2 - 1)];
        for (int j1 = 1; j1 < spec.m1; ++j1) col.push_back(c1[static_cast<std::size_t>(j1 - 1)] + rng.normal(0.0, 0.25));
    }
    for (int j1 = 1; j1 <= spec.m1; ++j1) {
        auto& row = a2[static_cast<std::size_t>(j1 - 1)];
        for (int j2 = 1; j2 < spec.m2; ++j2) row.push_back(c2[static_cast<std::size_t>(j2 - 1)] + rng.normal(0.0, 0.25));
    }
    auto strictly_sort = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], std::nextafter(v[i - 1], kInf) + 1e-9);
    };
    for (auto& v : a1) strictly_sort(v);
    for (auto& v : a2) strictly_sort(v);
    std::vector<double> interior;
    for (int j1 = 1; j1 < spec.m1; ++j1)
        for (int j2 = 1; j2 <= spec.m2; ++j2) interior.push_back(a1[static_cast<std::size_t>(j2 - 1)][static_cast<std::size_t>(j1 - 1)]);
    for (int j1 = 1; j1 <= spec.m1; ++j1)
        for (int j2 = 1; j2 < spec.m2; ++j2) interior.push_back(a2[static_cast<std::size_t>(j1 - 1)][static_cast<std::size_t>(j2 - 1)]);
    p.thresholds = ThresholdStructure::from_interior(spec, interior);
    p.rho = rng.uniform(-0.8, 0.8);
    return p;
}

EstimationResult fit_nonlattice(const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config) {
    return run_fit(ModelKind::NonLattice, data, spec, k1, k2, config);
}

EstimationResult fit_lattice(const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config) {
    return run_fit(ModelKind::Lattice, data, spec, k1, k2, config);
}

EstimationResult fit(ModelKind kind, const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config) {
    return run_fit(kind, data, spec, k1, k2, config);
}

}  // namespace ordino
