#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordino/dgp.hpp"
#include "ordino/likelihood.hpp"

namespace ordino {

struct MrcConfig {
    int dim = 1;  // response dimension, 1 or 2
    // 0-based columns of X_dim that enter only this index. The coefficient of
    // the first one is normalized to 1.
    std::vector<int> exclusive;
    // Gaussian product kernel bandwidths, one per localized column. Empty
    // means default_bandwidth.
    std::vector<double> bandwidth;
    int grid_levels = 3;
    int grid_points = 41;
    double grid_half_width = 3.0;  // first level covers [-w, w] per coordinate
    std::uint64_t seed = 1;
    int workers = 0;

    void validate() const;
};

// Non-exclusive covariate columns of both equations, with columns of X2 that
// duplicate a column of X1 dropped.
struct LocalizedColumns {
    std::vector<int> eq;   // 1 or 2
    std::vector<int> col;  // 0-based
    std::vector<std::string> names() const;
};
LocalizedColumns localized_columns(const Dataset& data, const MrcConfig& cfg);

// h_c = 1.06 * sd_c * N^(-1/6) per localized column (bandwidths, not squared).
std::vector<double> default_bandwidth(const Dataset& data, const MrcConfig& cfg);

// Sum over unordered pairs of K(delta) times 1 when the responses and the
// exclusive indices are ranked the same way strictly, 0 otherwise. The
// kernel is exp(-|delta / h|^2 / 2) so it equals 1 at delta = 0.
double mrc_objective(const std::vector<double>& b_free, const Dataset& data, const MrcConfig& cfg);

struct MrcResult {
    std::vector<double> b_free;
    std::vector<double> beta;  // (1, b_free)
    double objective = 0.0;
    std::vector<double> trace;  // best objective per grid level
    double resolution = 0.0;    // grid step of the last level
    std::vector<double> bandwidth;
    LocalizedColumns localized;
    double weight_mass = 0.0;  // sum of kernel weights over pairs with distinct responses
    std::size_t evaluations = 0;
};

// Nested grid search. Throws NumericalError when the kernel weights vanish.
MrcResult fit_mrc(const Dataset& data, const MrcConfig& cfg);

// Synthetic design with two exclusive regressors in equation 1 whose
// coefficient ratio is b, plus a shared regressor and an exclusive regressor
// in equation 2.
DesignConfig mrc_design(double b);

}  // namespace ordino
