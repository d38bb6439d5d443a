#include "ordino/cli.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ordino/dgp.hpp"
#include "ordino/errors.hpp"
#include "ordino/estimation.hpp"
#include "ordino/harness.hpp"
#include "ordino/io.hpp"
#include "ordino/mrc.hpp"
#include "ordino/parallel.hpp"

namespace ordino {

namespace {

struct Common {
    std::string format = "text";
    int workers = 0;
    bool json() const { return format == "json"; }
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UserError(what + ": cannot parse '" + item + "' as a number");
        }
    }
    return out;
}

std::vector<int> parse_columns(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_list(text, "--exclusive")) {
        if (v != std::floor(v) || v < 1) throw UserError("--exclusive takes 1-based column numbers");
        out.push_back(static_cast<int>(v) - 1);
    }
    return out;
}

// Response counts from the spec when given, otherwise the largest labels.
ModelSpec spec_or_default(const std::string& path, const Dataset& data) {
    if (!path.empty()) {
        auto s = spec_from_json(read_json_file(path));
        if (s.k1() != data.k1() || s.k2() != data.k2()) {
            throw UserError("spec declares " + std::to_string(s.k1()) + "+" + std::to_string(s.k2()) + " covariates, data has " +
                            std::to_string(data.k1()) + "+" + std::to_string(data.k2()));
        }
        return s;
    }
    ModelSpec s;
    int m1 = 1, m2 = 1;
    for (int v : data.y1) m1 = std::max(m1, v);
    for (int v : data.y2) m2 = std::max(m2, v);
    s.spec = {m1, m2};
    for (int c = 1; c <= data.k1(); ++c) s.x1.push_back("x1_" + std::to_string(c));
    for (int c = 1; c <= data.k2(); ++c) s.x2.push_back("x2_" + std::to_string(c));
    return s;
}

std::string fmt(double v) { return format_number(v); }

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

int cmd_simulate(const std::string& design_name, std::size_t n, std::uint64_t seed, const std::string& out_path,
                 const std::string& spec_out, const Common& c, std::ostream& out) {
    const auto d = design_by_name(design_name);
    const auto data = simulate(d, n, seed, resolve_workers(c.workers));
    write_dataset_csv(out_path, data);
    if (!spec_out.empty()) write_text_file(spec_out, spec_to_json(spec_for_design(d)).dump(2) + "\n");
    if (c.json()) {
        Json j;
        j["design"] = design_name;
        j["n"] = n;
        j["seed"] = seed;
        j["out"] = out_path;
        if (!spec_out.empty()) j["spec"] = spec_out;
        emit(out, j);
    } else {
        out << "design " << design_name << ": wrote " << n << " observations to " << out_path << " (seed " << seed << ")\n";
        if (!spec_out.empty()) out << "spec written to " << spec_out << "\n";
    }
    return 0;
}

void print_result_text(std::ostream& out, const EstimationResult& r) {
    out << "model " << to_string(r.model) << ", n = " << r.n << "\n";
    out << "loglik " << fmt(r.loglik) << ", penalty " << fmt(r.penalty) << ", objective " << fmt(r.objective) << "\n";
    const auto names = r.layout.names();
    std::size_t w = 9;
    for (const auto& n : names) w = std::max(w, n.size());
    out << std::left << std::setw(static_cast<int>(w) + 2) << "parameter" << std::setw(26) << "estimate"
        << "se\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
        out << std::setw(static_cast<int>(w) + 2) << names[k] << std::setw(26) << fmt(r.theta[static_cast<Eigen::Index>(k)])
            << fmt(r.se[static_cast<Eigen::Index>(k)]) << "\n";
    }
    out << std::right;
    out << "converged " << (r.converged ? "true" : "false") << ", gradient " << fmt(r.gradient_norm) << ", iterations "
        << r.iterations << ", starts " << r.starts_converged << "/" << r.starts_tried << " converged, best start "
        << r.best_start << "\n";
    out << "covariance " << (r.covariance_ok ? "ok" : "unavailable") << ", active constraints " << r.active_constraints
        << ", free parameters " << r.free_parameters << "\n";
    for (const auto& t : r.ties) {
        out << "tie";
        for (const auto& e : t.members) out << " " << e.name();
        out << " = " << fmt(t.value) << " (spread " << fmt(t.spread) << ")\n";
    }
    if (!r.note.empty()) out << "note: " << r.note << "\n";
}

int cmd_estimate(const std::string& data_path, const std::string& spec_path, const std::string& model, const FitConfig& fc,
                 const std::string& out_path, const Common& c, std::ostream& out) {
    const auto kind = parse_model_kind(model);
    const auto data = read_dataset_csv(data_path);
    const auto spec = spec_or_default(spec_path, data);
    FitConfig cfg = fc;
    cfg.workers = resolve_workers(c.workers);
    const auto r = fit(kind, data, spec.spec, spec.k1(), spec.k2(), cfg);
    const auto doc = result_to_json(r, cfg);
    if (!out_path.empty()) write_text_file(out_path, doc.dump(2) + "\n");
    if (c.json()) emit(out, doc);
    else print_result_text(out, r);
    return 0;
}

int cmd_mc(const std::string& design_name, int reps, std::size_t n, std::uint64_t seed, const std::string& model,
           const FitConfig& fc, const std::string& out_path, const std::string& table, const Common& c, std::ostream& out,
           std::ostream& err) {
    McConfig mc;
    mc.fit = fc;
    if (model == "nonlattice") mc.lattice = false;
    else if (model == "lattice") mc.nonlattice = false;
    else if (model != "both") throw UserError("--model must be nonlattice, lattice or both");
    mc.workers = resolve_workers(c.workers);
    const auto fmt_table = parse_table_format(table);
    const auto s = run_mc_study(design_name, reps, n, seed, mc);
    const auto doc = summary_to_json(s);
    if (!out_path.empty()) write_text_file(out_path, doc.dump(2) + "\n");
    if (c.json()) {
        emit(out, doc);
    } else {
        out << render_table(s, fmt_table);
        auto counts = [&](const char* name, bool on, const McColumn& col) {
            if (on) out << name << ": " << col.successes << " of " << s.reps << " replications used, " << col.failures << " failed\n";
        };
        counts("nonlattice", s.has_nonlattice, s.nonlattice);
        counts("lattice", s.has_lattice, s.lattice);
        if (s.sd_undefined) out << "note: fewer than 2 successful replications; SDs reported as 0\n";
    }
    err << "mc: " << std::fixed << std::setprecision(1) << s.wall_seconds << " s\n" << std::defaultfloat;
    return 0;
}

int cmd_validate(const std::string& path, bool tree, double tol, const Common& c, std::ostream& out) {
    const auto doc = read_json_file(path);
    const auto ts = doc.contains("schema") ? [&] {
        const auto s = spec_from_json(doc);
        if (!s.thresholds) throw UserError(path + ": spec has no \"thresholds\"");
        return *s.thresholds;
    }()
                                           : structure_from_json(doc);
    const auto rep = is_coherent(ts, tol);
    std::optional<DecisionTree> h;
    if (rep.coherent) h = detect_hierarchy(ts, tol);
    const auto ties = tie_groups(ts, tol);
    if (c.json()) {
        Json j;
        j["M"] = {ts.m1(), ts.m2()};
        j["coherent"] = rep.coherent;
        Json v = Json::array();
        for (const auto& k : rep.violations) {
            Json vj;
            vj["j1"] = k.j1;
            vj["j2"] = k.j2;
            vj["vertical_jump"] = number_to_json(vertical_jump(ts, k.j1, k.j2));
            vj["horizontal_jump"] = number_to_json(horizontal_jump(ts, k.j1, k.j2));
            v.push_back(std::move(vj));
        }
        j["violations"] = std::move(v);
        j["hierarchical"] = rep.coherent ? Json(h.has_value()) : Json(nullptr);
        if (h && !h->is_leaf()) {
            const auto& sp = std::get<DecisionTree::Split>(h->node);
            j["root_split"] = {{"dim", sp.dim}, {"value", number_to_json(sp.value)}};
        }
        Json tj = Json::array();
        for (const auto& cls : ties.classes) {
            if (cls.size() < 2) continue;
            Json names = Json::array();
            for (const auto& e : cls) names.push_back(e.name());
            tj.push_back(std::move(names));
        }
        j["ties"] = std::move(tj);
        if (tree && h) j["tree"] = render_tree(*h);
        emit(out, j);
    } else {
        out << "structure " << ts.m1() << "x" << ts.m2() << "\n";
        out << "coherent: " << (rep.coherent ? "yes" : "no") << "\n";
        for (const auto& k : rep.violations) {
            out << "  violation at corner (" << k.j1 << ", " << k.j2 << "): vertical jump " << fmt(vertical_jump(ts, k.j1, k.j2))
                << ", horizontal jump " << fmt(horizontal_jump(ts, k.j1, k.j2)) << "\n";
        }
        if (rep.coherent) {
            out << "hierarchical: " << (h ? "yes" : "no");
            if (h && !h->is_leaf()) {
                const auto& sp = std::get<DecisionTree::Split>(h->node);
                out << " (root split: dimension " << sp.dim << " at " << fmt(sp.value) << ")";
            }
            out << "\n";
        }
        for (const auto& cls : ties.classes) {
            if (cls.size() < 2) continue;
            out << "tied:";
            for (const auto& e : cls) out << " " << e.name();
            out << "\n";
        }
        if (tree && h) out << render_tree(*h);
    }
    return rep.coherent ? 0 : 2;
}

int cmd_probtable(const std::string& spec_path, const std::string& params_path, const std::string& x1_text,
                  const std::string& x2_text, const Common& c, std::ostream& out) {
    const auto p = params_from_json(read_json_file(params_path));
    if (!spec_path.empty()) {
        const auto s = spec_from_json(read_json_file(spec_path));
        if (!(s.spec == p.thresholds.spec())) throw UserError("params thresholds do not match the spec's M");
        if (s.k1() != p.beta1.size() || s.k2() != p.beta2.size()) throw UserError("params coefficients do not match the spec's covariates");
    }
    const auto x1 = parse_list(x1_text, "--x1");
    const auto x2 = parse_list(x2_text, "--x2");
    if (static_cast<Eigen::Index>(x1.size()) != p.beta1.size()) throw UserError("--x1 needs " + std::to_string(p.beta1.size()) + " values");
    if (static_cast<Eigen::Index>(x2.size()) != p.beta2.size()) throw UserError("--x2 needs " + std::to_string(p.beta2.size()) + " values");
    const auto P = cell_prob_matrix(p, x1, x2);
    if (c.json()) {
        Json j;
        Json cells = Json::array();
        for (Eigen::Index a = 0; a < P.rows(); ++a) {
            Json row = Json::array();
            for (Eigen::Index b = 0; b < P.cols(); ++b) row.push_back(number_to_json(P(a, b)));
            cells.push_back(std::move(row));
        }
        j["cells"] = std::move(cells);
        j["total"] = number_to_json(P.sum());
        emit(out, j);
    } else {
        out << "rows j1 = 1.." << P.rows() << ", columns j2 = 1.." << P.cols() << "\n";
        for (Eigen::Index a = 0; a < P.rows(); ++a) {
            for (Eigen::Index b = 0; b < P.cols(); ++b) out << (b ? " " : "") << fmt(P(a, b));
            out << "\n";
        }
        out << "total " << fmt(P.sum()) << "\n";
    }
    return 0;
}

int cmd_mrc(const std::string& data_path, MrcConfig cfg, const std::string& excl, const std::string& bw,
            const std::string& out_path, const Common& c, std::ostream& out) {
    const auto data = read_dataset_csv(data_path);
    cfg.exclusive = parse_columns(excl);
    cfg.bandwidth = parse_list(bw, "--bandwidth");
    cfg.workers = resolve_workers(c.workers);
    const auto r = fit_mrc(data, cfg);
    const auto doc = mrc_result_to_json(r, cfg);
    if (!out_path.empty()) write_text_file(out_path, doc.dump(2) + "\n");
    if (c.json()) {
        emit(out, doc);
    } else {
        out << "mrc dimension " << cfg.dim << ", exclusive columns";
        for (int k : cfg.exclusive) out << " " << k + 1;
        out << "\nbeta";
        for (double b : r.beta) out << " " << fmt(b);
        out << "\nobjective " << fmt(r.objective) << ", grid resolution " << fmt(r.resolution) << ", evaluations " << r.evaluations
            << "\n";
        out << "localized";
        for (const auto& n : r.localized.names()) out << " " << n;
        out << "\nbandwidth";
        for (double h : r.bandwidth) out << " " << fmt(h);
        out << "\n";
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bivariate ordered response models with non-lattice thresholds", "ordino"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", common.format, "Output mode")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--workers", common.workers, "Worker threads (capped by ORDINO_THREADS; 0 = default)")->check(CLI::NonNegativeNumber);
    };

    std::string design_name = "1", out_path, spec_out, data_path, spec_path, model = "nonlattice", params_path, x1_text, x2_text;
    std::size_t n = 5000;
    std::uint64_t seed = 1;
    FitConfig fc;
    double lambda = -1.0;

    auto* sim = app.add_subcommand("simulate", "Simulate a canned design to CSV");
    sim->add_option("--design", design_name, "1, 1-text, 1-transposed, 2 or 3")->required();
    sim->add_option("--n", n, "Observations")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Seed");
    sim->add_option("--out", out_path, "Output CSV")->required();
    sim->add_option("--spec-out", spec_out, "Also write the design's spec JSON");
    add_common(sim);

    auto* est = app.add_subcommand("estimate", "Penalized maximum likelihood");
    est->add_option("--data", data_path, "Dataset CSV")->required();
    est->add_option("--spec", spec_path, "Spec JSON (schema v1)");
    est->add_option("--model", model, "nonlattice or lattice")->check(CLI::IsMember({"nonlattice", "lattice"}));
    est->add_option("--multistart", fc.multistart_count, "Random starts")->check(CLI::PositiveNumber);
    est->add_option("--lambda", lambda, "Penalty weight (default N)")->check(CLI::NonNegativeNumber);
    est->add_option("--seed", seed, "Seed");
    est->add_option("--max-iter", fc.max_iterations, "Iteration cap per start")->check(CLI::PositiveNumber);
    est->add_option("--tie-tol", fc.tie_tolerance, "Tie snapping tolerance")->check(CLI::NonNegativeNumber);
    est->add_option("--out", out_path, "Result JSON");
    add_common(est);

    int reps = 50;
    std::string mc_model = "both", table = "markdown";
    FitConfig mc_fc;
    mc_fc.multistart_count = 16;
    auto* mc = app.add_subcommand("mc", "Monte Carlo study of a canned design");
    mc->add_option("--design", design_name, "1, 1-text, 1-transposed, 2 or 3")->required();
    mc->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
    mc->add_option("--n", n, "Observations per replication")->check(CLI::PositiveNumber);
    mc->add_option("--seed", seed, "Master seed");
    mc->add_option("--multistart", mc_fc.multistart_count, "Random starts per fit")->check(CLI::PositiveNumber);
    mc->add_option("--model", mc_model, "nonlattice, lattice or both")->check(CLI::IsMember({"nonlattice", "lattice", "both"}));
    mc->add_option("--table", table, "markdown or csv")->check(CLI::IsMember({"markdown", "csv"}));
    mc->add_option("--out", out_path, "Summary JSON");
    add_common(mc);

    bool tree = false;
    double tol = kExactTol;
    auto* val = app.add_subcommand("validate", "Coherency and hierarchy report");
    val->add_option("--spec", spec_path, "Spec JSON or threshold structure JSON")->required();
    val->add_flag("--tree", tree, "Render the decision tree");
    val->add_option("--tol", tol, "Equality tolerance")->check(CLI::NonNegativeNumber);
    add_common(val);

    auto* prob = app.add_subcommand("probtable", "Cell probabilities at one covariate point");
    prob->add_option("--spec", spec_path, "Spec JSON (checked against the params)");
    prob->add_option("--params", params_path, "Params JSON or estimation result")->required();
    prob->add_option("--x1", x1_text, "Comma-separated x1 row");
    prob->add_option("--x2", x2_text, "Comma-separated x2 row");
    add_common(prob);

    MrcConfig mcfg;
    std::string excl, bw;
    auto* mrc = app.add_subcommand("mrc", "Kernel-localized rank correlation");
    mrc->add_option("--data", data_path, "Dataset CSV")->required();
    mrc->add_option("--dim", mcfg.dim, "Response dimension")->check(CLI::IsMember({1, 2}));
    mrc->add_option("--exclusive", excl, "Comma-separated 1-based columns; the first is normalized to 1")->required();
    mrc->add_option("--bandwidth", bw, "Comma-separated bandwidths (default rule otherwise)");
    mrc->add_option("--levels", mcfg.grid_levels, "Grid refinement levels")->check(CLI::PositiveNumber);
    mrc->add_option("--points", mcfg.grid_points, "Grid points per coordinate")->check(CLI::Range(2, 100000));
    mrc->add_option("--half-width", mcfg.grid_half_width, "First-level half width")->check(CLI::PositiveNumber);
    mrc->add_option("--out", out_path, "Result JSON");
    add_common(mrc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();  // follows the selected subcommand
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(design_name, n, seed, out_path, spec_out, common, out);
        if (est->parsed()) {
            fc.lambda = lambda;
            fc.seed = seed;
            return cmd_estimate(data_path, spec_path, model, fc, out_path, common, out);
        }
        if (mc->parsed()) {
            return cmd_mc(design_name, reps, n, seed, mc_model, mc_fc, out_path, table, common, out, err);
        }
        if (val->parsed()) return cmd_validate(spec_path, tree, tol, common, out);
        if (prob->parsed()) return cmd_probtable(spec_path, params_path, x1_text, x2_text, common, out);
        if (mrc->parsed()) return cmd_mrc(data_path, mcfg, excl, bw, out_path, common, out);
    } catch (const UserError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace ordino
