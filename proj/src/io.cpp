#include "ordino/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ordino/errors.hpp"

namespace ordino {

Json number_to_json(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from_json(const Json& j, const std::string& what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    if (j.is_null()) return std::nan("");
    throw UserError(what + ": expected a number or \"inf\"/\"-inf\"");
}

std::string format_number(double v) { return number_to_json(v).dump(); }

namespace {

const Json& member(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw UserError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

std::vector<std::vector<double>> grid_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw UserError(what + " must be an array of rows");
    std::vector<std::vector<double>> g;
    for (const auto& row : j) {
        if (!row.is_array()) throw UserError(what + " must be an array of rows");
        std::vector<double> r;
        for (const auto& v : row) r.push_back(number_from_json(v, what));
        g.push_back(std::move(r));
    }
    return g;
}

Json grid_to_json(const std::vector<std::vector<double>>& g) {
    Json out = Json::array();
    for (const auto& row : g) {
        Json r = Json::array();
        for (double v : row) r.push_back(number_to_json(v));
        out.push_back(std::move(r));
    }
    return out;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v[i]));
    return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw UserError(what + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i], what);
    return v;
}

std::vector<std::string> names_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw UserError(what + " must be an array of names");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& v : j) {
        if (!v.is_string()) throw UserError(what + " must be an array of names");
        if (!seen.insert(v.get<std::string>()).second) throw UserError(what + ": duplicate name " + v.get<std::string>());
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

Json structure_to_json(const ThresholdStructure& ts) {
    Json j;
    j["M"] = {ts.m1(), ts.m2()};
    j["A1"] = grid_to_json(ts.grid1());
    j["A2"] = grid_to_json(ts.grid2());
    return j;
}

ThresholdStructure structure_from_json(const Json& j) {
    const auto& m = member(j, "M", "threshold structure");
    if (!m.is_array() || m.size() != 2 || !m[0].is_number_integer() || !m[1].is_number_integer()) {
        throw UserError("threshold structure: \"M\" must be [M1, M2]");
    }
    const ResponseSpec spec{m[0].get<int>(), m[1].get<int>()};
    spec.validate();
    const auto ts = ThresholdStructure::from_grids(grid_from_json(member(j, "A1", "threshold structure"), "A1"),
                                                   grid_from_json(member(j, "A2", "threshold structure"), "A2"));
    if (!(ts.spec() == spec)) throw UserError("threshold structure: grid shapes do not match \"M\"");
    return ts;
}

std::vector<std::string> ModelSpec::exclusive(int d) const {
    const auto& own = d == 1 ? x1 : x2;
    const auto& other = d == 1 ? x2 : x1;
    std::vector<std::string> out;
    for (const auto& n : own)
        if (std::find(other.begin(), other.end(), n) == other.end()) out.push_back(n);
    return out;
}

Json spec_to_json(const ModelSpec& s) {
    Json j;
    j["schema"] = "v1";
    j["M"] = {s.spec.m1, s.spec.m2};
    j["x1"] = s.x1;
    j["x2"] = s.x2;
    if (s.thresholds) j["thresholds"] = structure_to_json(*s.thresholds);
    return j;
}

ModelSpec spec_from_json(const Json& j) {
    const auto& schema = member(j, "schema", "spec");
    if (!schema.is_string() || schema.get<std::string>() != "v1") throw UserError("spec: unsupported schema (expected \"v1\")");
    ModelSpec s;
    const auto& m = member(j, "M", "spec");
    if (!m.is_array() || m.size() != 2 || !m[0].is_number_integer() || !m[1].is_number_integer()) {
        throw UserError("spec: \"M\" must be [M1, M2]");
    }
    s.spec = {m[0].get<int>(), m[1].get<int>()};
    s.spec.validate();
    s.x1 = names_from_json(member(j, "x1", "spec"), "spec x1");
    s.x2 = names_from_json(member(j, "x2", "spec"), "spec x2");
    if (j.contains("thresholds")) {
        s.thresholds = structure_from_json(j.at("thresholds"));
        if (!(s.thresholds->spec() == s.spec)) throw UserError("spec: thresholds do not match \"M\"");
    }
    return s;
}

ModelSpec spec_for_design(const DesignConfig& d) {
    ModelSpec s;
    s.spec = d.spec;
    s.x1 = d.x1_names();
    s.x2 = d.x2_names();
    s.thresholds = d.thresholds;
    return s;
}

Json params_to_json(const ModelParams& p) {
    Json j;
    j["beta1"] = vector_to_json(p.beta1);
    j["beta2"] = vector_to_json(p.beta2);
    j["rho"] = number_to_json(p.rho);
    j["thresholds"] = structure_to_json(p.thresholds);
    return j;
}

ModelParams params_from_json(const Json& j) {
    const Json& src = j.is_object() && j.contains("params") ? j.at("params") : j;
    ModelParams p;
    p.beta1 = vector_from_json(member(src, "beta1", "params"), "beta1");
    p.beta2 = vector_from_json(member(src, "beta2", "params"), "beta2");
    p.rho = number_from_json(member(src, "rho", "params"), "rho");
    if (!(std::abs(p.rho) < 1.0)) throw UserError("params: |rho| must be < 1");
    p.thresholds = structure_from_json(member(src, "thresholds", "params"));
    return p;
}

Json result_to_json(const EstimationResult& r, const FitConfig& config) {
    Json j;
    j["schema"] = "v1";
    j["model"] = to_string(r.model);
    j["n"] = r.n;
    const auto names = r.layout.names();
    Json est = Json::array();
    for (std::size_t k = 0; k < names.size(); ++k) {
        Json e;
        e["name"] = names[k];
        e["estimate"] = number_to_json(r.theta[static_cast<Eigen::Index>(k)]);
        e["se"] = number_to_json(r.se[static_cast<Eigen::Index>(k)]);
        est.push_back(std::move(e));
    }
    j["estimates"] = std::move(est);
    j["params"] = params_to_json(r.params_hat);
    Json cov = Json::array();
    for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) row.push_back(number_to_json(r.covariance(a, b)));
        cov.push_back(std::move(row));
    }
    j["covariance"] = std::move(cov);
    j["covariance_ok"] = r.covariance_ok;
    j["information_condition"] = number_to_json(r.information_condition);
    j["active_constraints"] = r.active_constraints;
    j["loglik"] = number_to_json(r.loglik);
    j["penalty"] = number_to_json(r.penalty);
    j["objective"] = number_to_json(r.objective);
    j["lambda"] = number_to_json(r.lambda);
    Json conv;
    conv["converged"] = r.converged;
    conv["gradient_norm"] = number_to_json(r.gradient_norm);
    conv["iterations"] = r.iterations;
    conv["starts_tried"] = r.starts_tried;
    conv["starts_converged"] = r.starts_converged;
    conv["best_start"] = r.best_start;
    conv["free_parameters"] = r.free_parameters;
    j["convergence"] = std::move(conv);
    Json ties = Json::array();
    for (const auto& t : r.ties) {
        Json tj;
        Json members = Json::array();
        for (const auto& e : t.members) members.push_back(e.name());
        tj["members"] = std::move(members);
        tj["value"] = number_to_json(t.value);
        tj["spread"] = number_to_json(t.spread);
        ties.push_back(std::move(tj));
    }
    Json tie_report;
    tie_report["tolerance"] = number_to_json(config.tie_tolerance);
    tie_report["refit"] = r.refit_after_snap;
    tie_report["objective_before_snap"] = number_to_json(r.objective_before_snap);
    tie_report["classes"] = std::move(ties);
    j["ties"] = std::move(tie_report);
    j["note"] = r.note;
    Json cfg;
    cfg["model"] = to_string(r.model);
    cfg["multistart"] = config.multistart_count;
    cfg["lambda"] = config.lambda < 0.0 ? Json("n") : number_to_json(config.lambda);
    cfg["max_iterations"] = config.max_iterations;
    cfg["gradient_tolerance"] = number_to_json(config.gradient_tolerance);
    cfg["tie_tolerance"] = number_to_json(config.tie_tolerance);
    j["config"] = std::move(cfg);
    j["seed"] = config.seed;
    return j;
}

Json mrc_result_to_json(const MrcResult& r, const MrcConfig& config) {
    Json j;
    j["schema"] = "v1";
    j["dim"] = config.dim;
    Json excl = Json::array();
    for (int c : config.exclusive) excl.push_back(c + 1);
    j["exclusive"] = std::move(excl);
    Json beta = Json::array();
    for (double b : r.beta) beta.push_back(number_to_json(b));
    j["beta"] = std::move(beta);
    j["objective"] = number_to_json(r.objective);
    Json trace = Json::array();
    for (double t : r.trace) trace.push_back(number_to_json(t));
    j["trace"] = std::move(trace);
    j["resolution"] = number_to_json(r.resolution);
    j["evaluations"] = r.evaluations;
    j["localized"] = r.localized.names();
    Json bw = Json::array();
    for (double h : r.bandwidth) bw.push_back(number_to_json(h));
    j["bandwidth"] = std::move(bw);
    j["weight_mass"] = number_to_json(r.weight_mass);
    Json grid;
    grid["levels"] = config.grid_levels;
    grid["points"] = config.grid_points;
    grid["half_width"] = number_to_json(config.grid_half_width);
    j["grid"] = std::move(grid);
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw UserError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path);
    out << text;
    if (!out) throw UserError("write failed: " + path);
}

}  // namespace ordino
