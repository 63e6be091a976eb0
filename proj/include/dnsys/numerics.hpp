#pragma once

#include <cstdint>
#include <vector>

#include "dnsys/types.hpp"

namespace dnsys {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// least squares of log(y) against log(x); non-positive y values are skipped
LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1]
    std::vector<double> weights;
};

GaussRule gauss_legendre(int p);

// Counter-based generator: the k-th draw is splitmix64(seed + k * golden).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed ^ mix(stream + 0x51ed27u)) {}
    std::uint64_t next() { return mix(seed_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal();
    cplx complex_normal() { return {normal(), normal()}; }
    std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

struct InverseResult {
    CMat inverse;
    double condition = 0.0;
};

// LU inverse with a 2-norm condition number (SVD for small matrices, LU estimate otherwise)
InverseResult checked_inverse(const CMat& M, double cond_cap, const std::string& context);

double condition_number(const CMat& M);

double spectral_norm(const CMat& M);

inline double lambda_bracket(cplx lambda) { return std::sqrt(1.0 + std::norm(lambda)); }

}  // namespace dnsys
