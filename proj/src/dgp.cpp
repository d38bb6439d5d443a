#include "ordino/dgp.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ordino/errors.hpp"
#include "ordino/gaussian.hpp"
#include "ordino/parallel.hpp"

namespace ordino {

CovariateLaw CovariateLaw::uniform(std::string name, double lo, double hi) {
    CovariateLaw l;
    l.kind = Kind::Uniform;
    l.name = std::move(name);
    l.a = lo;
    l.b = hi;
    return l;
}

CovariateLaw CovariateLaw::discrete(std::string name, std::vector<double> points, std::vector<double> probs) {
    CovariateLaw l;
    l.kind = Kind::Discrete;
    l.name = std::move(name);
    l.points = std::move(points);
    l.probs = std::move(probs);
    return l;
}

CovariateLaw CovariateLaw::student_t(std::string name, double df) {
    CovariateLaw l;
    l.kind = Kind::StudentT;
    l.name = std::move(name);
    l.a = df;
    return l;
}

CovariateLaw CovariateLaw::logistic(std::string name, double loc, double scale) {
    CovariateLaw l;
    l.kind = Kind::Logistic;
    l.name = std::move(name);
    l.a = loc;
    l.b = scale;
    return l;
}

void CovariateLaw::validate() const {
    switch (kind) {
        case Kind::Uniform:
            if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw UserError("uniform law needs finite lo < hi");
            break;
        case Kind::Discrete: {
            if (points.empty() || points.size() != probs.size()) throw UserError("discrete law needs matching points and probs");
            double s = 0.0;
            for (double p : probs) {
                if (!(p >= 0.0)) throw UserError("discrete law has a negative probability");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-12) throw UserError("discrete law probabilities must sum to 1");
            break;
        }
        case Kind::StudentT:
            if (!(a >= 1.0) || a != std::floor(a)) throw UserError("student_t law needs an integer df >= 1");
            break;
        case Kind::Logistic:
            if (!(b > 0.0) || !std::isfinite(a)) throw UserError("logistic law needs scale > 0");
            break;
    }
}

double CovariateLaw::draw(Rng& rng) const {
    switch (kind) {
        case Kind::Uniform:
            return rng.uniform(a, b);
        case Kind::Discrete: {
            const double u = rng.uniform();
            double c = 0.0;
            for (std::size_t i = 0; i + 1 < points.size(); ++i) {
                c += probs[i];
                if (u < c) return points[i];
            }
            return points.back();
        }
        case Kind::StudentT:
            return rng.student_t(static_cast<int>(a));
        case Kind::Logistic:
            return rng.logistic(a, b);
    }
    return 0.0;
}

double CovariateLaw::mean() const {
    switch (kind) {
        case Kind::Uniform:
            return 0.5 * (a + b);
        case Kind::Discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) m += probs[i] * points[i];
            return m;
        }
        case Kind::StudentT:
            return a > 1.0 ? 0.0 : std::nan("");
        case Kind::Logistic:
            return a;
    }
    return 0.0;
}

double CovariateLaw::variance() const {
    switch (kind) {
        case Kind::Uniform:
            return (b - a) * (b - a) / 12.0;
        case Kind::Discrete: {
            const double m = mean();
            double v = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) v += probs[i] * (points[i] - m) * (points[i] - m);
            return v;
        }
        case Kind::StudentT:
            return a > 2.0 ? a / (a - 2.0) : kInf;
        case Kind::Logistic:
            return b * b * std::numbers::pi * std::numbers::pi / 3.0;
    }
    return 0.0;
}

ModelParams DesignConfig::params() const {
    ModelParams p;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.thresholds = thresholds;
    p.rho = rho;
    return p;
}

std::vector<std::string> DesignConfig::x1_names() const {
    std::vector<std::string> out;
    for (int c : x1_cols) out.push_back(draws.at(static_cast<std::size_t>(c)).name);
    return out;
}

std::vector<std::string> DesignConfig::x2_names() const {
    std::vector<std::string> out;
    for (int c : x2_cols) out.push_back(draws.at(static_cast<std::size_t>(c)).name);
    return out;
}

void DesignConfig::validate() const {
    spec.validate();
    if (!(thresholds.spec() == spec)) throw UserError("design: threshold structure does not match the response spec");
    if (beta1.size() != k1() || beta2.size() != k2()) throw UserError("design: coefficient lengths do not match the column maps");
    if (!(std::abs(rho) < 1.0)) throw UserError("design: |rho| must be < 1");
    for (const auto& l : draws) l.validate();
    for (int c : x1_cols)
        if (c < 0 || c >= static_cast<int>(draws.size())) throw UserError("design: X1 column refers to an unknown draw");
    for (int c : x2_cols)
        if (c < 0 || c >= static_cast<int>(draws.size())) throw UserError("design: X2 column refers to an unknown draw");
    const auto rep = is_coherent(thresholds);
    if (!rep.coherent) throw UserError("design: threshold structure is not coherent");
}

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

DesignConfig design1_table() {
    DesignConfig d;
    d.spec = {2, 2};
    d.thresholds = ThresholdStructure::from_interior(d.spec, std::vector<double>{-2.0, 1.5, 1.0, 1.0});
    d.beta1 = vec({1.0});
    d.beta2 = vec({0.5});
    d.rho = 0.33;
    d.draws = {CovariateLaw::uniform("x", -5.0, 5.0)};
    d.x1_cols = {0};
    d.x2_cols = {0};
    d.validate();
    return d;
}

DesignConfig design1_text() {
    auto d = design1_table();
    d.beta2 = vec({1.0});
    return d;
}

DesignConfig design1_transposed() {
    auto d = design1_table();
    d.thresholds = ThresholdStructure::from_interior(d.spec, std::vector<double>{1.0, 1.0, -2.0, 1.5});
    d.validate();
    return d;
}

DesignConfig design(int id) {
    if (id == 1) return design1_table();
    DesignConfig d;
    if (id == 2) {
        d.spec = {4, 3};
        d.thresholds = ThresholdStructure::from_interior(
            d.spec, std::vector<double>{-3.25, -3.25, -0.5, 0.5, 1.0, 5.0, 8.0, 8.0, 8.0,  // A1 rows 1..3
                                        -4.0, 0.5, -2.0, 0.5, -2.0, 0.5, 0.0, 4.0});       // A2 rows 1..4
        d.beta1 = vec({1.5, -4.0});
        d.beta2 = vec({3.0});
        d.rho = 0.5;
        d.draws = {CovariateLaw::uniform("x", -3.0, 3.0),
                   CovariateLaw::discrete("w1", {-2.5, -1.5, -0.5, 0.5}, {0.25, 0.25, 0.25, 0.25})};
        d.x1_cols = {0, 1};
        d.x2_cols = {0};
    } else if (id == 3) {
        d.spec = {7, 2};
        d.thresholds = ThresholdStructure::from_interior(
            d.spec, std::vector<double>{-8.0, -8.0, -5.0, 0.0, 0.5, 0.5, 2.0, 2.0, 3.0, 3.0, 3.5, 8.0,  // A1 rows 1..6
                                        -4.0, -2.0, -2.0, 1.0, 3.0, 7.0, 7.0});                     // A2 rows 1..7
        d.beta1 = vec({1.5, -4.0});
        d.beta2 = vec({3.0, -6.0, 1.0});
        d.rho = 0.5;
        d.draws = {CovariateLaw::uniform("x", -2.0, 2.0), CovariateLaw::student_t("w1", 5),
                   CovariateLaw::student_t("w2", 5), CovariateLaw::logistic("z2", 2.0, 1.0)};
        d.x1_cols = {0, 1};
        d.x2_cols = {0, 2, 3};
    } else {
        throw UserError("unknown design id " + std::to_string(id) + " (expected 1, 2 or 3)");
    }
    d.validate();
    return d;
}

std::pair<int, int> assign_response(const ThresholdStructure& ts, double ystar1, double ystar2) {
    for (int j1 = 1; j1 <= ts.m1(); ++j1) {
        for (int j2 = 1; j2 <= ts.m2(); ++j2) {
            if (cell_bounds(ts, j1, j2).contains(ystar1, ystar2)) return {j1, j2};
        }
    }
    throw NumericalError("assign_response: no cell contains the point; the structure is not coherent");
}

Simulation simulate_with_errors(const DesignConfig& config, std::size_t n, std::uint64_t seed, int workers) {
    config.validate();
    if (n == 0) throw UserError("simulate: n must be >= 1");
    Simulation s;
    auto& d = s.data;
    d.y1.assign(n, 0);
    d.y2.assign(n, 0);
    d.X1.resize(static_cast<Eigen::Index>(n), config.k1());
    d.X2.resize(static_cast<Eigen::Index>(n), config.k2());
    s.eps1.assign(n, 0.0);
    s.eps2.assign(n, 0.0);

    const std::size_t blocks = (n + kSimBlock - 1) / kSimBlock;
    parallel_for(blocks, workers, [&](std::size_t b) {
        Rng rng(mix_seed(seed, b));
        std::vector<double> w(config.draws.size());
        const std::size_t end = std::min(n, (b + 1) * kSimBlock);
        for (std::size_t i = b * kSimBlock; i < end; ++i) {
            for (std::size_t c = 0; c < w.size(); ++c) w[c] = config.draws[c].draw(rng);
            const auto row = static_cast<Eigen::Index>(i);
            double m1 = 0.0, m2 = 0.0;
            for (int c = 0; c < config.k1(); ++c) {
                d.X1(row, c) = w[static_cast<std::size_t>(config.x1_cols[c])];
                m1 += config.beta1[c] * d.X1(row, c);
            }
            for (int c = 0; c < config.k2(); ++c) {
                d.X2(row, c) = w[static_cast<std::size_t>(config.x2_cols[c])];
                m2 += config.beta2[c] * d.X2(row, c);
            }
            const auto [e1, e2] = sample_bvn(config.rho, rng);
            s.eps1[i] = e1;
            s.eps2[i] = e2;
            const auto [j1, j2] = assign_response(config.thresholds, m1 + e1, m2 + e2);
            d.y1[i] = j1;
            d.y2[i] = j2;
        }
    });
    return s;
}

Dataset simulate(const DesignConfig& config, std::size_t n, std::uint64_t seed, int workers) {
    return simulate_with_errors(config, n, seed, workers).data;
}

namespace {

void put_double(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += buf;
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
    s = trim(s);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw UserError("dataset CSV line " + std::to_string(line) + ": cannot parse " + what + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    std::string line = "y1,y2";
    for (int c = 1; c <= data.k1(); ++c) line += ",x1_" + std::to_string(c);
    for (int c = 1; c <= data.k2(); ++c) line += ",x2_" + std::to_string(c);
    out << line << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        line = std::to_string(data.y1[i]) + "," + std::to_string(data.y2[i]);
        for (double v : data.x1(i)) {
            line += ',';
            put_double(line, v);
        }
        for (double v : data.x2(i)) {
            line += ',';
            put_double(line, v);
        }
        out << line << '\n';
    }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UserError("cannot open '" + path + "' for writing");
    write_dataset_csv(f, data);
    if (!f) throw UserError("error writing '" + path + "'");
}

Dataset read_dataset_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw UserError("dataset CSV is empty");
    const auto cols = split_commas(header);
    if (cols.size() < 2 || trim(cols[0]) != "y1" || trim(cols[1]) != "y2") {
        throw UserError("dataset CSV header must start with y1,y2");
    }
    int k1 = 0, k2 = 0;
    for (std::size_t c = 2; c < cols.size(); ++c) {
        const auto name = trim(cols[c]);
        if (k2 == 0 && name == "x1_" + std::to_string(k1 + 1)) {
            ++k1;
        } else if (name == "x2_" + std::to_string(k2 + 1)) {
            ++k2;
        } else {
            throw UserError("dataset CSV header: unexpected column '" + std::string(name) + "'");
        }
    }
    std::vector<int> y1, y2;
    std::vector<double> x1, x2;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_commas(line);
        if (f.size() != cols.size()) {
            throw UserError("dataset CSV line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                            " fields, found " + std::to_string(f.size()));
        }
        y1.push_back(parse_number<int>(f[0], lineno, "y1"));
        y2.push_back(parse_number<int>(f[1], lineno, "y2"));
        for (int c = 0; c < k1; ++c) x1.push_back(parse_number<double>(f[2 + c], lineno, "covariate"));
        for (int c = 0; c < k2; ++c) x2.push_back(parse_number<double>(f[2 + k1 + c], lineno, "covariate"));
    }
    Dataset d;
    const auto n = static_cast<Eigen::Index>(y1.size());
    d.y1 = std::move(y1);
    d.y2 = std::move(y2);
    d.X1 = Eigen::Map<RowMatrix>(x1.data(), n, k1);
    d.X2 = Eigen::Map<RowMatrix>(x2.data(), n, k2);
    if (!d.X1.allFinite() || !d.X2.allFinite()) throw UserError("dataset CSV contains non-finite covariates");
    return d;
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UserError("cannot open dataset '" + path + "'");
    return read_dataset_csv(f);
}

}  // namespace ordino
