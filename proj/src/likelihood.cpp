#include "ordino/likelihood.hpp"

#include <cmath>

#include "ordino/errors.hpp"
#include "ordino/gaussian.hpp"

namespace ordino {

void Dataset::validate(ResponseSpec spec) const {
    const std::size_t n = y1.size();
    if (y2.size() != n || static_cast<std::size_t>(X1.rows()) != n || static_cast<std::size_t>(X2.rows()) != n) {
        throw UserError("dataset: inconsistent lengths");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (y1[i] < 1 || y1[i] > spec.m1 || y2[i] < 1 || y2[i] > spec.m2) {
            throw UserError("dataset: response (" + std::to_string(y1[i]) + "," + std::to_string(y2[i]) +
                            ") out of range at row " + std::to_string(i + 1));
        }
    }
    if (!X1.allFinite() || !X2.allFinite()) throw UserError("dataset: non-finite covariate value");
}

bool Dataset::operator==(const Dataset& o) const {
    return y1 == o.y1 && y2 == o.y2 && X1.rows() == o.X1.rows() && X1.cols() == o.X1.cols() &&
           X2.rows() == o.X2.rows() && X2.cols() == o.X2.cols() && X1 == o.X1 && X2 == o.X2;
}

std::vector<std::string> ParamLayout::names() const {
    std::vector<std::string> out;
    out.reserve(size());
    for (int c = 1; c <= k1; ++c) out.push_back("beta1[" + std::to_string(c) + "]");
    for (int c = 1; c <= k2; ++c) out.push_back("beta2[" + std::to_string(c) + "]");
    for (const auto& e : ThresholdStructure::interior_entries(spec)) out.push_back(e.name());
    out.push_back("rho");
    return out;
}

Eigen::VectorXd ParamLayout::pack(const ModelParams& p) const {
    if (p.beta1.size() != k1 || p.beta2.size() != k2 || !(p.thresholds.spec() == spec)) {
        throw UserError("ParamLayout::pack: parameter shapes do not match the layout");
    }
    Eigen::VectorXd theta(size());
    theta.segment(beta1_offset(), k1) = p.beta1;
    theta.segment(beta2_offset(), k2) = p.beta2;
    const auto th = p.thresholds.interior();
    for (std::size_t i = 0; i < th.size(); ++i) theta[threshold_offset() + i] = th[i];
    theta[rho_index()] = p.rho;
    return theta;
}

ModelParams ParamLayout::unpack(const Eigen::VectorXd& theta) const {
    if (static_cast<std::size_t>(theta.size()) != size()) throw UserError("ParamLayout::unpack: wrong length");
    ModelParams p;
    p.beta1 = theta.segment(beta1_offset(), k1);
    p.beta2 = theta.segment(beta2_offset(), k2);
    const std::size_t nt = ThresholdStructure::interior_count(spec);
    p.thresholds = ThresholdStructure::from_interior(
        spec, std::span<const double>(theta.data() + threshold_offset(), nt));
    p.rho = theta[rho_index()];
    if (!(std::abs(p.rho) < 1.0)) throw UserError("ParamLayout::unpack: |rho| must be < 1");
    return p;
}

namespace {

double dot(const Eigen::VectorXd& beta, std::span<const double> x) {
    if (static_cast<std::size_t>(beta.size()) != x.size()) {
        throw UserError("covariate row has " + std::to_string(x.size()) + " entries but the coefficient vector has " +
                        std::to_string(beta.size()));
    }
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += beta[static_cast<Eigen::Index>(c)] * x[c];
    return s;
}

// Cell probability and its partial derivatives with respect to the four
// bounding thresholds, the two indices and rho. The rectangle is
// (l1, u1] x (l2, u2] after subtracting the indices.
struct CellTerm {
    double p;
    double du1, dl1, du2, dl2, drho;
};

CellTerm cell_term(double l1, double u1, double l2, double u2, double rho) {
    const auto uu = bvn_cdf_grad({u1, u2, rho});
    const auto lu = bvn_cdf_grad({l1, u2, rho});
    const auto ul = bvn_cdf_grad({u1, l2, rho});
    const auto ll = bvn_cdf_grad({l1, l2, rho});
    CellTerm t;
    t.p = uu.value - lu.value - ul.value + ll.value;
    t.du1 = uu.da - ul.da;
    t.dl1 = ll.da - lu.da;
    t.du2 = uu.db - lu.db;
    t.dl2 = ll.db - ul.db;
    t.drho = uu.drho - lu.drho - ul.drho + ll.drho;
    return t;
}

double cell_value(const ThresholdStructure& ts, double m1, double m2, double rho, int j1, int j2) {
    const auto b = cell_bounds(ts, j1, j2);
    const double u1 = b.hi1 - m1, l1 = b.lo1 - m1, u2 = b.hi2 - m2, l2 = b.lo2 - m2;
    return bvn_cdf({u1, u2, rho}) - bvn_cdf({l1, u2, rho}) - bvn_cdf({u1, l2, rho}) + bvn_cdf({l1, l2, rho});
}

void check_data(const ModelParams& p, const Dataset& data) {
    if (data.n() == 0) throw UserError("log-likelihood of an empty dataset");
    if (data.k1() != p.beta1.size() || data.k2() != p.beta2.size()) {
        throw UserError("dataset covariate counts do not match the coefficient vectors");
    }
    data.validate(p.thresholds.spec());
}

// Adds d log l_i / d theta for observation i into `g` (scaled by w) and
// returns log l_i.
double accumulate_obs(const ModelParams& p, const ParamLayout& layout, const Dataset& data, std::size_t i, double w,
                      double* g) {
    const auto& ts = p.thresholds;
    const auto spec = ts.spec();
    const auto x1 = data.x1(i);
    const auto x2 = data.x2(i);
    const double m1 = dot(p.beta1, x1);
    const double m2 = dot(p.beta2, x2);
    const int j1 = data.y1[i], j2 = data.y2[i];
    const auto b = cell_bounds(ts, j1, j2);
    const auto t = cell_term(b.lo1 - m1, b.hi1 - m1, b.lo2 - m2, b.hi2 - m2, p.rho);
    if (!(t.p > kProbFloor)) return std::log(kProbFloor);
    if (g == nullptr) return std::log(t.p);

    const double inv = w / t.p;
    const double dm1 = -(t.du1 + t.dl1) * inv;
    const double dm2 = -(t.du2 + t.dl2) * inv;
    for (int c = 0; c < layout.k1; ++c) g[layout.beta1_offset() + c] += dm1 * x1[c];
    for (int c = 0; c < layout.k2; ++c) g[layout.beta2_offset() + c] += dm2 * x2[c];
    const std::size_t off = layout.threshold_offset();
    if (j1 < spec.m1) g[off + ThresholdStructure::interior_index(spec, {1, j1, j2})] += t.du1 * inv;
    if (j1 > 1) g[off + ThresholdStructure::interior_index(spec, {1, j1 - 1, j2})] += t.dl1 * inv;
    if (j2 < spec.m2) g[off + ThresholdStructure::interior_index(spec, {2, j1, j2})] += t.du2 * inv;
    if (j2 > 1) g[off + ThresholdStructure::interior_index(spec, {2, j1, j2 - 1})] += t.dl2 * inv;
    g[layout.rho_index()] += t.drho * inv;
    return std::log(t.p);
}

ParamLayout layout_of(const ModelParams& p) {
    return {p.thresholds.spec(), static_cast<int>(p.beta1.size()), static_cast<int>(p.beta2.size())};
}

}  // namespace

double cell_prob(const ModelParams& p, std::span<const double> x1, std::span<const double> x2, int j1, int j2) {
    return cell_value(p.thresholds, dot(p.beta1, x1), dot(p.beta2, x2), p.rho, j1, j2);
}

Eigen::MatrixXd cell_prob_matrix(const ModelParams& p, std::span<const double> x1, std::span<const double> x2) {
    const double m1 = dot(p.beta1, x1), m2 = dot(p.beta2, x2);
    const auto& ts = p.thresholds;
    Eigen::MatrixXd out(ts.m1(), ts.m2());
    for (int j1 = 1; j1 <= ts.m1(); ++j1)
        for (int j2 = 1; j2 <= ts.m2(); ++j2) out(j1 - 1, j2 - 1) = cell_value(ts, m1, m2, p.rho, j1, j2);
    return out;
}

double loglik(const ModelParams& p, const Dataset& data) {
    check_data(p, data);
    const auto layout = layout_of(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) sum += accumulate_obs(p, layout, data, i, 1.0, nullptr);
    return sum / static_cast<double>(data.n());
}

LoglikGrad loglik_and_score(const ModelParams& p, const Dataset& data) {
    check_data(p, data);
    const auto layout = layout_of(p);
    LoglikGrad out;
    out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
    const double w = 1.0 / static_cast<double>(data.n());
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) sum += accumulate_obs(p, layout, data, i, w, out.grad.data());
    out.value = sum * w;
    return out;
}

Eigen::VectorXd score(const ModelParams& p, const Dataset& data) { return loglik_and_score(p, data).grad; }

Eigen::MatrixXd observation_scores(const ModelParams& p, const Dataset& data) {
    check_data(p, data);
    const auto layout = layout_of(p);
    // row-major scratch so each observation writes a contiguous row
    RowMatrix s = RowMatrix::Zero(static_cast<Eigen::Index>(data.n()), static_cast<Eigen::Index>(layout.size()));
    for (std::size_t i = 0; i < data.n(); ++i) {
        accumulate_obs(p, layout, data, i, 1.0, s.data() + i * layout.size());
    }
    return s;
}

std::vector<Corner> interior_corners(ResponseSpec spec) {
    std::vector<Corner> out;
    for (int j1 = 1; j1 < spec.m1; ++j1)
        for (int j2 = 1; j2 < spec.m2; ++j2) out.push_back({j1, j2});
    return out;
}

double penalty(const ModelParams& p, double lambda) {
    if (lambda < 0.0) throw UserError("penalty weight must be >= 0");
    if (lambda == 0.0) return 0.0;
    const auto r = constraint_vector(p);
    return -lambda * r.sum();
}

Eigen::VectorXd penalty_gradient(const ModelParams& p, double lambda) {
    const auto layout = layout_of(p);
    if (lambda == 0.0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
    return -lambda * constraint_jacobian(p).colwise().sum().transpose();
}

Eigen::VectorXd constraint_vector(const ModelParams& p) {
    const auto& ts = p.thresholds;
    const auto corners = interior_corners(ts.spec());
    Eigen::VectorXd r(static_cast<Eigen::Index>(corners.size()));
    for (std::size_t c = 0; c < corners.size(); ++c) {
        const double v = vertical_jump(ts, corners[c].j1, corners[c].j2);
        const double h = horizontal_jump(ts, corners[c].j1, corners[c].j2);
        r[static_cast<Eigen::Index>(c)] = v * v * h * h;
    }
    return r;
}

Eigen::MatrixXd constraint_jacobian(const ModelParams& p) {
    const auto& ts = p.thresholds;
    const auto spec = ts.spec();
    const auto layout = layout_of(p);
    const auto corners = interior_corners(spec);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corners.size()),
                                              static_cast<Eigen::Index>(layout.size()));
    const std::size_t off = layout.threshold_offset();
    for (std::size_t c = 0; c < corners.size(); ++c) {
        const int j1 = corners[c].j1, j2 = corners[c].j2;
        const double v = vertical_jump(ts, j1, j2);
        const double h = horizontal_jump(ts, j1, j2);
        const double dv = 2.0 * v * h * h;  // d r / d v
        const double dh = 2.0 * v * v * h;  // d r / d h
        const auto row = static_cast<Eigen::Index>(c);
        R(row, static_cast<Eigen::Index>(off + ThresholdStructure::interior_index(spec, {1, j1, j2 + 1}))) += dv;
        R(row, static_cast<Eigen::Index>(off + ThresholdStructure::interior_index(spec, {1, j1, j2}))) -= dv;
        R(row, static_cast<Eigen::Index>(off + ThresholdStructure::interior_index(spec, {2, j1 + 1, j2}))) += dh;
        R(row, static_cast<Eigen::Index>(off + ThresholdStructure::interior_index(spec, {2, j1, j2}))) -= dh;
    }
    return R;
}

}  // namespace ordino
