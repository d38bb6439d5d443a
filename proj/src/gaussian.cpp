#include "ordino/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "ordino/errors.hpp"
#include "ordino/model_core.hpp"

namespace ordino {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_rho(double rho) {
    if (!(std::abs(rho) < 1.0)) throw UserError("bivariate normal: |rho| must be < 1");
}

// Half-node tables of the 6-, 12- and 20-point Gauss-Legendre rules on [-1, 1].
constexpr std::array<double, 3> kX6 = {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970};
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 6> kX12 = {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
                                        -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                        0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 10> kX20 = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                         -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                                         -0.5108670019508271, -0.3737060887154195, -0.2277858511416451,
                                         -0.07652652113349733};
constexpr std::array<double, 10> kW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                         0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                         0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                         0.1527533871307259};

// P(X > h, Y > k) for finite h, k.
double bvn_upper(double h, double k, double r) {
    std::span<const double> xs, ws;
    if (std::abs(r) < 0.3) {
        xs = kX6;
        ws = kW6;
    } else if (std::abs(r) < 0.75) {
        xs = kX12;
        ws = kW12;
    } else {
        xs = kX20;
        ws = kW20;
    }

    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = (h * h + k * k) / 2.0;
        const double asr = std::asin(r);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double sn = std::sin(asr * (xs[i] + 1.0) / 2.0);
            bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            sn = std::sin(asr * (-xs[i] + 1.0) / 2.0);
            bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * kTwoPi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
        const double b = std::sqrt(bs);
        bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) * b *
               (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double x2 = a * (xs[i] + 1.0);
        x2 *= x2;
        double rs = std::sqrt(1.0 - x2);
        bvn += a * ws[i] *
               (std::exp(-bs / (2.0 * x2) - hk / (1.0 + rs)) / rs - std::exp(-(bs / x2 + hk) / 2.0) * (1.0 + c * x2 * (1.0 + d * x2)));
        x2 = as * (-xs[i] + 1.0) * (-xs[i] + 1.0) / 4.0;
        rs = std::sqrt(1.0 - x2);
        bvn += a * ws[i] * std::exp(-(bs / x2 + hk) / 2.0) *
               (std::exp(-hk * x2 / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs - (1.0 + c * x2 * (1.0 + d * x2)));
    }
    bvn = -bvn / kTwoPi;

    if (r > 0.0) return bvn + std_normal_cdf(-std::max(h, k));
    bvn = -bvn;
    if (k > h) {
        if (h < 0.0) {
            bvn += std_normal_cdf(k) - std_normal_cdf(h);
        } else {
            bvn += std_normal_cdf(-h) - std_normal_cdf(-k);
        }
    }
    return bvn;
}

}  // namespace

double std_normal_pdf(double z) {
    if (std::isinf(z)) return 0.0;
    return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw UserError("std_normal_inv_cdf: p must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double bvn_cdf(const BvnArgs& args) {
    check_rho(args.rho);
    const double a = args.a, b = args.b;
    if (std::isnan(a) || std::isnan(b)) throw UserError("bvn_cdf: NaN argument");
    if (a == -kInf || b == -kInf) return 0.0;
    if (a == kInf) return std_normal_cdf(b);
    if (b == kInf) return std_normal_cdf(a);
    return std::clamp(bvn_upper(-a, -b, args.rho), 0.0, 1.0);
}

double bvn_pdf(double a, double b, double rho) {
    check_rho(rho);
    if (std::isinf(a) || std::isinf(b)) return 0.0;
    const double s2 = (1.0 - rho) * (1.0 + rho);
    return std::exp(-(a * a - 2.0 * rho * a * b + b * b) / (2.0 * s2)) / (kTwoPi * std::sqrt(s2));
}

BvnValueGrad bvn_cdf_grad(const BvnArgs& args) {
    const double a = args.a, b = args.b, rho = args.rho;
    check_rho(rho);
    if (a == -kInf || b == -kInf) return {0.0, 0.0, 0.0, 0.0};
    if (a == kInf && b == kInf) return {1.0, 0.0, 0.0, 0.0};
    if (a == kInf) return {std_normal_cdf(b), 0.0, std_normal_pdf(b), 0.0};
    if (b == kInf) return {std_normal_cdf(a), std_normal_pdf(a), 0.0, 0.0};
    const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    return {bvn_cdf(args), std_normal_pdf(a) * std_normal_cdf((b - rho * a) / s),
            std_normal_pdf(b) * std_normal_cdf((a - rho * b) / s), bvn_pdf(a, b, rho)};
}

namespace {

// Adaptive Gauss-Kronrod over [lo, hi] split into panels at center + scale * k
// for k in {-8, -4, -2, -1, 0, 1, 2, 4, 8}, so no panel hides a narrow peak.
template <class F>
double paneled_integral(F&& f, double lo, double hi, double center, double scale, unsigned depth, double tol) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    constexpr std::array<double, 9> offsets = {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0};
    double total = 0.0;
    double left = lo;
    for (double k : offsets) {
        const double cut = center + scale * k;
        if (cut <= left) continue;
        if (cut >= hi) break;
        total += Rule::integrate(f, left, cut, depth, tol);
        left = cut;
    }
    if (hi > left) total += Rule::integrate(f, left, hi, depth, tol);
    return total;
}

}  // namespace

double bvn_cdf_oracle(const BvnArgs& args) {
    check_rho(args.rho);
    constexpr double lo = -8.5;
    const double hi1 = std::min(args.a, 8.5);
    const double hi2 = std::min(args.b, 8.5);
    if (hi1 <= lo || hi2 <= lo) return 0.0;
    const double rho = args.rho;
    const double s2 = (1.0 - rho) * (1.0 + rho);
    const double sd = std::sqrt(s2);
    const double norm = 1.0 / (kTwoPi * sd);
    auto inner = [&](double x) {
        auto density = [&](double y) { return norm * std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s2)); };
        return paneled_integral(density, lo, hi2, rho * x, sd, 2, 1e-11);
    };
    return paneled_integral(inner, lo, hi1, 0.0, 1.0, 4, 1e-11);
}

std::pair<double, double> sample_bvn(double rho, Rng& rng) {
    check_rho(rho);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {z1, rho * z1 + std::sqrt((1.0 - rho) * (1.0 + rho)) * z2};
}

}  // namespace ordino
