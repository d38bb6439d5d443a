#pragma once

#include <cstdint>
#include <random>

namespace ordino {

// 64-bit avalanche mixer (splitmix64 finalizer) used to derive independent
// sub-seeds from (master seed, index) pairs.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

// Seeded generator with pinned transforms. The engine is mt19937_64, whose
// output sequence is fixed by the standard; every variate below is built from
// raw engine words so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on the open interval (0, 1).
    double uniform_open();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Integer uniform on [0, n).
    std::uint64_t below(std::uint64_t n);

    // Standard normal by the Marsaglia polar method (pairs cached).
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Student-t via Z / sqrt(chi2_df / df), chi2 built from df squared normals
    // for integer df; non-integer df is rejected.
    double student_t(int df);
    // Logistic by inverse CDF.
    double logistic(double loc, double scale);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace ordino
