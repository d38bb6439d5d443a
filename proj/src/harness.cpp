#include "ordino/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ordino/errors.hpp"
#include "ordino/parallel.hpp"

namespace ordino {

DesignConfig design_by_name(const std::string& name) {
    if (name == "1") return design(1);
    if (name == "1-text") return design1_text();
    if (name == "1-transposed") return design1_transposed();
    if (name == "2") return design(2);
    if (name == "3") return design(3);
    throw UserError("unknown design '" + name + "' (expected 1, 1-text, 1-transposed, 2 or 3)");
}

namespace {

void summarize(McColumn& col, std::size_t p) {
    col.mean.assign(p, 0.0);
    col.sd.assign(p, 0.0);
    col.successes = 0;
    col.failures = 0;
    for (const auto& d : col.draws) {
        if (!d.allFinite()) {
            ++col.failures;
            continue;
        }
        ++col.successes;
        for (std::size_t k = 0; k < p; ++k) col.mean[k] += d[static_cast<Eigen::Index>(k)];
    }
    if (col.successes == 0) {
        col.mean.assign(p, std::nan(""));
        col.sd.assign(p, std::nan(""));
        return;
    }
    for (auto& m : col.mean) m /= col.successes;
    if (col.successes < 2) return;
    for (const auto& d : col.draws) {
        if (!d.allFinite()) continue;
        for (std::size_t k = 0; k < p; ++k) {
            const double e = d[static_cast<Eigen::Index>(k)] - col.mean[k];
            col.sd[k] += e * e;
        }
    }
    for (auto& s : col.sd) s = std::sqrt(s / (col.successes - 1));
}

}  // namespace

McSummary run_mc_study(const DesignConfig& design, const std::string& label, int reps, std::size_t n, std::uint64_t seed,
                       const McConfig& config) {
    if (reps < 1) throw UserError("reps must be >= 1");
    design.validate();
    config.fit.validate();
    const auto t0 = std::chrono::steady_clock::now();
    McSummary s;
    s.design = label;
    s.reps = reps;
    s.n = n;
    s.seed = seed;
    const ParamLayout layout{design.spec, design.k1(), design.k2()};
    s.names = layout.names();
    const auto truth = layout.pack(design.params());
    s.truth.assign(truth.data(), truth.data() + truth.size());
    s.has_nonlattice = config.nonlattice;
    s.has_lattice = config.lattice;
    const auto p = static_cast<Eigen::Index>(layout.size());
    const auto nreps = static_cast<std::size_t>(reps);
    s.nonlattice.draws.assign(nreps, Eigen::VectorXd::Constant(p, std::nan("")));
    s.lattice.draws.assign(nreps, Eigen::VectorXd::Constant(p, std::nan("")));

    const int workers = config.workers > 0 ? config.workers : default_worker_count();
    parallel_for(nreps, workers, [&](std::size_t r) {
        const auto sub = mix_seed(seed, r);
        const auto data = simulate(design, n, sub);
        FitConfig fc = config.fit;
        fc.seed = sub;
        fc.workers = 1;
        auto run = [&](ModelKind kind, McColumn& col) {
            try {
                const auto res = fit(kind, data, design.spec, design.k1(), design.k2(), fc);
                if (res.converged) col.draws[r] = res.theta;
            } catch (const NumericalError&) {
            } catch (const UserError&) {
                // a replication without some category cannot be fitted
            }
        };
        if (config.nonlattice) run(ModelKind::NonLattice, s.nonlattice);
        if (config.lattice) run(ModelKind::Lattice, s.lattice);
    });
    if (config.nonlattice) summarize(s.nonlattice, layout.size());
    if (config.lattice) summarize(s.lattice, layout.size());
    auto few = [](const McColumn& c) { return c.successes < 2; };
    s.sd_undefined = (config.nonlattice && few(s.nonlattice)) || (config.lattice && few(s.lattice));
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

McSummary run_mc_study(const std::string& design_name, int reps, std::size_t n, std::uint64_t seed, const McConfig& config) {
    return run_mc_study(design_by_name(design_name), design_name, reps, n, seed, config);
}

TableFormat parse_table_format(const std::string& s) {
    if (s == "markdown" || s == "md") return TableFormat::Markdown;
    if (s == "csv") return TableFormat::Csv;
    throw UserError("unknown table format '" + s + "' (expected markdown or csv)");
}

namespace {

std::string g4(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string g17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string render_table(const McSummary& s, TableFormat format) {
    std::ostringstream os;
    if (format == TableFormat::Markdown) {
        os << "| Parameter | Truth | Nonlattice | Lattice |\n";
        os << "|---|---|---|---|\n";
        for (std::size_t k = 0; k < s.names.size(); ++k) {
            auto cell = [&](bool on, const McColumn& c) {
                return on ? g4(c.mean[k]) + " (" + g4(c.sd[k]) + ")" : std::string("-");
            };
            os << "| " << s.names[k] << " | " << g4(s.truth[k]) << " | " << cell(s.has_nonlattice, s.nonlattice) << " | "
               << cell(s.has_lattice, s.lattice) << " |\n";
        }
    } else {
        os << "parameter,truth,nonlattice_mean,nonlattice_sd,lattice_mean,lattice_sd\n";
        for (std::size_t k = 0; k < s.names.size(); ++k) {
            auto cell = [&](bool on, const McColumn& c) { return on ? g17(c.mean[k]) + "," + g17(c.sd[k]) : std::string(","); };
            os << s.names[k] << "," << g17(s.truth[k]) << "," << cell(s.has_nonlattice, s.nonlattice) << ","
               << cell(s.has_lattice, s.lattice) << "\n";
        }
    }
    return os.str();
}

Json summary_to_json(const McSummary& s) {
    Json j;
    j["schema"] = "v1";
    j["design"] = s.design;
    j["reps"] = s.reps;
    j["n"] = s.n;
    j["seed"] = s.seed;
    j["sd_undefined"] = s.sd_undefined;
    Json params = Json::array();
    for (std::size_t k = 0; k < s.names.size(); ++k) {
        Json pj;
        pj["name"] = s.names[k];
        pj["truth"] = number_to_json(s.truth[k]);
        params.push_back(std::move(pj));
    }
    j["parameters"] = std::move(params);
    auto column = [&](const McColumn& c) {
        Json cj;
        cj["successes"] = c.successes;
        cj["failures"] = c.failures;
        Json mean = Json::array(), sd = Json::array();
        for (std::size_t k = 0; k < c.mean.size(); ++k) {
            mean.push_back(number_to_json(c.mean[k]));
            sd.push_back(number_to_json(c.sd[k]));
        }
        cj["mean"] = std::move(mean);
        cj["sd"] = std::move(sd);
        Json draws = Json::array();
        for (const auto& d : c.draws) {
            Json row = Json::array();
            for (Eigen::Index k = 0; k < d.size(); ++k) row.push_back(number_to_json(d[k]));
            draws.push_back(std::move(row));
        }
        cj["replications"] = std::move(draws);
        return cj;
    };
    if (s.has_nonlattice) j["nonlattice"] = column(s.nonlattice);
    if (s.has_lattice) j["lattice"] = column(s.lattice);
    return j;
}

}  // namespace ordino
