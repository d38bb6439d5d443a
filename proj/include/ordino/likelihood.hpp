#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordino/model_core.hpp"

namespace ordino {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kProbFloor = 1e-12;

struct ModelParams {
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;
    ThresholdStructure thresholds;
    double rho = 0.0;
};

// N observations of (y1, y2) with 1-based categories and covariate rows.
struct Dataset {
    std::vector<int> y1;
    std::vector<int> y2;
    RowMatrix X1;
    RowMatrix X2;

    std::size_t n() const { return y1.size(); }
    int k1() const { return static_cast<int>(X1.cols()); }
    int k2() const { return static_cast<int>(X2.cols()); }
    std::span<const double> x1(std::size_t i) const { return {X1.data() + i * X1.cols(), static_cast<std::size_t>(X1.cols())}; }
    std::span<const double> x2(std::size_t i) const { return {X2.data() + i * X2.cols(), static_cast<std::size_t>(X2.cols())}; }

    // Lengths agree, responses lie in 1..M, covariates are finite.
    void validate(ResponseSpec spec) const;
    bool operator==(const Dataset& o) const;
};

// Coordinate layout of theta = (beta1, beta2, interior thresholds, rho).
// Thresholds follow ThresholdStructure's canonical interior order.
struct ParamLayout {
    ResponseSpec spec;
    int k1 = 0;
    int k2 = 0;

    std::size_t size() const { return k1 + k2 + ThresholdStructure::interior_count(spec) + 1; }
    std::size_t beta1_offset() const { return 0; }
    std::size_t beta2_offset() const { return k1; }
    std::size_t threshold_offset() const { return k1 + k2; }
    std::size_t rho_index() const { return size() - 1; }

    std::vector<std::string> names() const;
    Eigen::VectorXd pack(const ModelParams& p) const;
    // Throws UserError when the thresholds are not monotone or |rho| >= 1.
    ModelParams unpack(const Eigen::VectorXd& theta) const;
};

double cell_prob(const ModelParams& p, std::span<const double> x1, std::span<const double> x2, int j1, int j2);

// M1 x M2 grid of cell probabilities.
Eigen::MatrixXd cell_prob_matrix(const ModelParams& p, std::span<const double> x1, std::span<const double> x2);

// Mean log-likelihood (1/N) sum_i log max(l_i, kProbFloor).
double loglik(const ModelParams& p, const Dataset& data);

struct LoglikGrad {
    double value = 0.0;
    Eigen::VectorXd grad;
};

// Mean log-likelihood and its gradient over ParamLayout coordinates (rho
// itself, not a transform). Each threshold grid entry is its own coordinate.
LoglikGrad loglik_and_score(const ModelParams& p, const Dataset& data);
Eigen::VectorXd score(const ModelParams& p, const Dataset& data);

// N x dim(theta) matrix of per-observation score vectors.
Eigen::MatrixXd observation_scores(const ModelParams& p, const Dataset& data);

// -lambda * sum over interior corners of (vertical jump)^2 (horizontal jump)^2.
double penalty(const ModelParams& p, double lambda);
// Gradient of penalty() over ParamLayout coordinates.
Eigen::VectorXd penalty_gradient(const ModelParams& p, double lambda);

// Interior corners in (j1, j2) order; one constraint per corner.
std::vector<Corner> interior_corners(ResponseSpec spec);
// r_c = (vertical jump)^2 (horizontal jump)^2 at each interior corner.
Eigen::VectorXd constraint_vector(const ModelParams& p);
// d r / d theta' over ParamLayout coordinates (corners x dim(theta)).
Eigen::MatrixXd constraint_jacobian(const ModelParams& p);

}  // namespace ordino
