#pragma once

#include <utility>

#include "ordino/rng.hpp"

namespace ordino {

// Arguments of the standard bivariate normal CDF. Limits may be +-inf;
// |rho| < 1 strictly.
struct BvnArgs {
    double a;
    double b;
    double rho;
};

double std_normal_pdf(double z);
double std_normal_cdf(double z);
// Throws UserError unless 0 < p < 1.
double std_normal_inv_cdf(double p);

// Phi_2(a, b; rho) by Genz's Gauss-Legendre decomposition of Drezner and
// Wesolowsky's single-integral form. Absolute error is around 1e-15.
double bvn_cdf(const BvnArgs& args);
double bvn_pdf(double a, double b, double rho);

struct BvnValueGrad {
    double value;
    double da;    // phi(a) Phi((b - rho a) / sqrt(1 - rho^2))
    double db;    // phi(b) Phi((a - rho b) / sqrt(1 - rho^2))
    double drho;  // phi_2(a, b; rho)
};

// Value and first derivatives, with the infinite-limit cases resolved exactly.
BvnValueGrad bvn_cdf_grad(const BvnArgs& args);

// Independent slow reference: nested adaptive Gauss-Kronrod quadrature of the
// bivariate normal density over [-8.5, min(a, 8.5)] x [-8.5, min(b, 8.5)].
// Test use only.
double bvn_cdf_oracle(const BvnArgs& args);

// (e1, e2) ~ N(0, [[1, rho], [rho, 1]]) as e1 = z1, e2 = rho z1 + sqrt(1 - rho^2) z2.
std::pair<double, double> sample_bvn(double rho, Rng& rng);

}  // namespace ordino
