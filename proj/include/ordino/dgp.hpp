#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ordino/likelihood.hpp"
#include "ordino/rng.hpp"

namespace ordino {

struct CovariateLaw {
    enum class Kind { Uniform, Discrete, StudentT, Logistic };
    Kind kind = Kind::Uniform;
    std::string name;
    // uniform(a, b), logistic(loc = a, scale = b), student_t(df = a)
    double a = 0.0;
    double b = 1.0;
    std::vector<double> points;  // discrete support
    std::vector<double> probs;   // discrete weights, summing to 1

    static CovariateLaw uniform(std::string name, double lo, double hi);
    static CovariateLaw discrete(std::string name, std::vector<double> points, std::vector<double> probs);
    static CovariateLaw student_t(std::string name, double df);
    static CovariateLaw logistic(std::string name, double loc, double scale);

    double draw(Rng& rng) const;
    double mean() const;
    double variance() const;
    void validate() const;
};

// A simulation design. `draws` are the independent covariate draws of one
// observation; x1_cols / x2_cols pick which draw fills each column of X1 / X2,
// so a draw used in both lists is a shared regressor.
struct DesignConfig {
    ResponseSpec spec;
    ThresholdStructure thresholds;
    Eigen::VectorXd beta1;
    Eigen::VectorXd beta2;
    double rho = 0.0;
    std::vector<CovariateLaw> draws;
    std::vector<int> x1_cols;
    std::vector<int> x2_cols;

    int k1() const { return static_cast<int>(x1_cols.size()); }
    int k2() const { return static_cast<int>(x2_cols.size()); }
    ModelParams params() const;
    std::vector<std::string> x1_names() const;
    std::vector<std::string> x2_names() const;
    // Throws UserError on bad shapes, bad laws, |rho| >= 1 or incoherent thresholds.
    void validate() const;
};

// Canned designs. design(1) is the table variant (beta2 = 0.5).
DesignConfig design(int id);
DesignConfig design1_table();
DesignConfig design1_text();
// Design 1 with the roles of the two boundaries exchanged: the A1 row is flat
// at 1 and the A2 column steps from -2 to 1.5.
DesignConfig design1_transposed();

// Unique cell containing (ystar1, ystar2). Throws NumericalError when no cell
// contains the point, which only happens for incoherent structures.
std::pair<int, int> assign_response(const ThresholdStructure& ts, double ystar1, double ystar2);

struct Simulation {
    Dataset data;
    std::vector<double> eps1;
    std::vector<double> eps2;
};

// Observations are generated in blocks of kSimBlock; block b uses the stream
// Rng(mix_seed(seed, b)). Within an observation the covariate draws come first
// in `draws` order, then the error pair.
inline constexpr std::size_t kSimBlock = 4096;
Simulation simulate_with_errors(const DesignConfig& config, std::size_t n, std::uint64_t seed, int workers = 1);
Dataset simulate(const DesignConfig& config, std::size_t n, std::uint64_t seed, int workers = 1);

// Dataset CSV: header y1,y2,x1_1..x1_k1,x2_1..x2_k2; 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ordino
