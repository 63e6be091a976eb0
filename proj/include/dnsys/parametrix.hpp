#pragma once

#include <map>
#include <vector>

#include "dnsys/ellipticity.hpp"
#include "dnsys/numerics.hpp"
#include "dnsys/symbols.hpp"

namespace dnsys {

// A derivative d_xi^alpha d_x^beta of A, used as a factor in a product word.
struct DerivKey {
    MultiIndex alpha{};
    MultiIndex beta{};
    auto operator<=>(const DerivKey&) const = default;
};

// Sum of words c * G0 F1 G0 F2 ... Fk G0 with F = d_xi^alpha d_x^beta A.
// The empty word is G0 itself.
struct TermTree {
    std::map<std::vector<DerivKey>, cplx> words;

    static TermTree identity_g0();
    TermTree d_xi(int axis) const;
    TermTree d_xi(const MultiIndex& alpha, int n) const;
    // append c * F G0
    TermTree append(const DerivKey& f, cplx c) const;
    void add(const TermTree& o, cplx c = 1.0);
    size_t size() const { return words.size(); }
    int max_factors() const;
};

struct TermRecord {
    int m = 0;
    MultiIndex alpha{};
};

struct ParametrixTerm {
    int nu = 0;
    TermTree tree;
    std::vector<TermRecord> records;  // (m, alpha) pairs of the recursion
};

// Pointwise data shared by every term evaluation at one (x, xi, lambda).
class PointContext {
public:
    PointContext(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda, double cond_cap = 1e12);
    const CMat& g0() const { return g0_; }
    const CMat& A() const { return A_; }
    const CMat& deriv(const DerivKey& k);
    CMat eval(const TermTree& t);

private:
    const DNSystem* sys_;
    RVec x_, xi_;
    CMat A_, g0_;
    std::map<DerivKey, CMat> cache_;
};

CMat g0_eval(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda, double cond_cap = 1e12);

// Recursion G^nu = -sum_{m+|alpha|=nu, m<nu} (1/alpha!) d_xi^alpha G^m  D_x^alpha A  G^0.
std::vector<ParametrixTerm> build_terms(int n, int nu_max);

CMat gnu_eval(const DNSystem& sys, int nu, const RVec& x, const RVec& xi, cplx lambda);

struct ExcisionConfig {
    double eps1 = 0.0;  // <= 0: calibrate
    int calibration_kmax = 12;
    int max_halvings = 40;
};

struct TruncatedParametrix {
    const DNSystem* sys = nullptr;
    int N = 1;
    std::vector<ParametrixTerm> terms;
    std::vector<double> eps;  // eps[nu] for nu >= 1, eps[0] unused

    CMat eval(const RVec& x, const RVec& xi, cplx lambda) const;
    CMat eval(PointContext& ctx, const RVec& xi) const;
};

TruncatedParametrix build_truncated_parametrix(const DNSystem& sys, int N, const Sector& sector,
                                               const ExcisionConfig& cfg = {});

enum class ProbeQuantity { J_minus_1, G_minus_G0, g0_diag_bound, g0_offdiag_bound, gnu_bound };

const char* quantity_name(ProbeQuantity q);

struct ProbeSample {
    double xi_norm = 0.0;
    double lambda_abs = 0.0;
    int i = 0, j = 0;
    double value = 0.0;
};

struct DecayProbe {
    ProbeQuantity quantity = ProbeQuantity::J_minus_1;
    int N = 1;
    double fitted_slope = 0.0;  // -inf when every sample vanishes
    double sup = 0.0;
    bool lambda_decay_ok = false;
    std::vector<ProbeSample> samples;
};

struct ProbeConfig {
    std::vector<cplx> lambdas;  // empty: {0, boundary points at |lambda| = 1, 16}
    int kmin = 2;
    int kmax = 10;
    int x_points = 8;
    double cap = 1e12;
    // false: the literal |alpha| < N range of the remainder sum
    bool full_leading_remainder = true;
};

// sum over nu < N, |alpha| <= N (or < N), nu + |alpha| >= N of (1/alpha!) d_xi^alpha G^nu D_x^alpha A
CMat j_minus_1(const DNSystem& sys, const std::vector<ParametrixTerm>& terms, int N, const RVec& x, const RVec& xi,
               cplx lambda, bool full_leading_remainder = true);

DecayProbe decay_probe(const DNSystem& sys, ProbeQuantity quantity, int N, const Sector& sector,
                       const ProbeConfig& cfg = {});

}  // namespace dnsys
