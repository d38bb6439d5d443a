#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordino/likelihood.hpp"
#include "ordino/rng.hpp"

namespace ordino {

enum class ModelKind { NonLattice, Lattice };
std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct FitConfig {
    // Penalty weight; negative means "use N".
    double lambda = -1.0;
    int multistart_count = 64;
    int max_iterations = 1000;
    double gradient_tolerance = 1e-8;
    double tie_tolerance = kTieTol;
    std::uint64_t seed = 1;
    // Parallel starts; 0 means default_worker_count().
    int workers = 0;

    void validate() const;
};

// Threshold entries snapped to a common value.
struct TieClass {
    std::vector<EntryRef> members;
    double value = 0.0;
    double spread = 0.0;  // max - min before snapping
};

struct EstimationResult {
    ModelKind model = ModelKind::NonLattice;
    ParamLayout layout;
    ModelParams params_hat;
    Eigen::VectorXd theta;       // packed params_hat
    Eigen::MatrixXd covariance;  // over layout coordinates, already divided by N
    Eigen::VectorXd se;
    double loglik = 0.0;   // mean log-likelihood at the estimate
    double penalty = 0.0;  // penalty term at the estimate (<= 0)
    double objective = 0.0;
    double lambda = 0.0;
    bool converged = false;
    double gradient_norm = 0.0;  // max-norm over the free coordinates
    int iterations = 0;
    int starts_tried = 0;
    int starts_converged = 0;
    int best_start = -1;
    std::size_t n = 0;
    std::size_t free_parameters = 0;
    std::vector<TieClass> ties;
    bool refit_after_snap = false;
    double objective_before_snap = 0.0;
    int active_constraints = 0;
    bool covariance_ok = false;
    double information_condition = 0.0;
    std::string note;
    std::vector<double> trace;  // penalized objective after each accepted step of the winning start
};

// Penalized multistart maximum likelihood with every interior threshold free.
EstimationResult fit_nonlattice(const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config);
// Lattice thresholds: one cut per A1 row and per A2 column.
EstimationResult fit_lattice(const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config);
EstimationResult fit(ModelKind kind, const Dataset& data, ResponseSpec spec, int k1, int k2, const FitConfig& config);

// Random starting point: beta ~ N(0, 0.5^2) per coordinate, thresholds at the
// normal quantiles of the observed marginal frequencies of the start index
// plus N(0, 0.25^2) jitter (sorted), rho ~ U(-0.8, 0.8).
ModelParams multistart_draw(const FitConfig& config, ResponseSpec spec, const Dataset& data, Rng& rng);

// Constrained information sandwich. With R empty returns J^{-1}; otherwise
// B J B' with B = J^{-1} - J^{-1} R' (R J^{-1} R')^{-1} R J^{-1}.
// Throws NumericalError when J (or R J^{-1} R') is singular.
Eigen::MatrixXd constrained_covariance(const Eigen::MatrixXd& J, const Eigen::MatrixXd& R);

}  // namespace ordino
