#include "ordino/rng.hpp"

#include <cmath>

#include "ordino/errors.hpp"

namespace ordino {

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    // (k + 0.5) / 2^53 for k in [0, 2^53)
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw UserError("Rng::below: n must be positive");
    // rejection to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return r % n;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * f;
    has_cached_ = true;
    return u * f;
}

double Rng::student_t(int df) {
    if (df < 1) throw UserError("student_t: degrees of freedom must be a positive integer");
    const double z = normal();
    double chi2 = 0.0;
    for (int k = 0; k < df; ++k) {
        const double g = normal();
        chi2 += g * g;
    }
    return z / std::sqrt(chi2 / df);
}

double Rng::logistic(double loc, double scale) {
    const double u = uniform_open();
    return loc + scale * std::log(u / (1.0 - u));
}

}  // namespace ordino
