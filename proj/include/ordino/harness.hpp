#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordino/dgp.hpp"
#include "ordino/estimation.hpp"
#include "ordino/io.hpp"

namespace ordino {

// "1" (β2 = 0.5), "1-text" (β2 = 1), "1-transposed", "2", "3".
DesignConfig design_by_name(const std::string& name);

struct McConfig {
    FitConfig fit;  // seed is replaced per replication
    bool nonlattice = true;
    bool lattice = true;
    int workers = 0;  // replications in parallel; 0 means default_worker_count()
};

struct McColumn {
    std::vector<double> mean;
    std::vector<double> sd;
    int successes = 0;
    int failures = 0;
    std::vector<Eigen::VectorXd> draws;  // one per replication; NaN when the fit failed
};

struct McSummary {
    std::string design;
    int reps = 0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> names;
    std::vector<double> truth;
    bool has_nonlattice = false;
    bool has_lattice = false;
    McColumn nonlattice;
    McColumn lattice;
    // SDs need two successful replications; they are reported as 0 otherwise.
    bool sd_undefined = false;
    double wall_seconds = 0.0;
};

// Replication r simulates with seed mix_seed(seed, r) and fits each family
// with the same sub-seed. A replication whose fit throws or does not converge
// is excluded from that family's moments and counted as a failure.
McSummary run_mc_study(const std::string& design_name, int reps, std::size_t n, std::uint64_t seed, const McConfig& config);
McSummary run_mc_study(const DesignConfig& design, const std::string& label, int reps, std::size_t n, std::uint64_t seed,
                       const McConfig& config);

enum class TableFormat { Markdown, Csv };
TableFormat parse_table_format(const std::string& s);
// Parameter | Truth | Nonlattice | Lattice. Markdown shows 4 significant
// digits as "mean (sd)"; CSV carries full precision.
std::string render_table(const McSummary& s, TableFormat format);

// Deterministic summary document; wall-clock time is left out.
Json summary_to_json(const McSummary& s);

}  // namespace ordino
