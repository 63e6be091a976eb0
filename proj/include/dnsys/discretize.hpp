#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dnsys/ellipticity.hpp"
#include "dnsys/parametrix.hpp"
#include "dnsys/symbols.hpp"

namespace dnsys {

// Torus [0, 2 pi L)^n with N points per axis. Frequencies k/L in FFT order;
// the Nyquist mode is stored as -N/2.
struct TorusGrid {
    int n = 1;
    int N = 32;
    double L = 1.0;
    std::vector<RVec> points;
    std::vector<RVec> freqs;
    std::vector<std::array<int, 2>> freq_index;  // integer lattice labels

    static TorusGrid make(int n, int N, double L = 1.0);
    int size() const { return static_cast<int>(points.size()); }
};

using PointSymbol = std::function<CMat(const RVec& x, const RVec& xi)>;

inline constexpr size_t kDefaultDenseCap = 8192;

// Dense Kohn-Nirenberg quantization of a q x q point symbol; block (i, j) occupies
// rows i*N^n.. and columns j*N^n..
CMat quantize(const TorusGrid& g, int q, const PointSymbol& f, bool x_independent, size_t cap = kDefaultDenseCap);

// unitary DFT on one component: F[k, a] = exp(-i xi_k x_a) / sqrt(N^n)
CMat dft_matrix(const TorusGrid& g);
CMat block_dft(const TorusGrid& g, int q);

// fields are stacked by component: u = (u_1 on the grid, ..., u_q on the grid)
CVec apply_pdo(const DNSystem& sys, const TorusGrid& g, const CVec& u);
CVec apply_pdo(const ScalarSymbol& a, const TorusGrid& g, const CVec& u);

struct Perturbation {
    double epsilon = 1.0;
    double amplitude = 0.1;
    std::uint64_t seed = 0;
    double phi_max = 0.0;  // max |phi_ij|, the weighted norm of each block
    CMat matrix;
};

// K_ij = <D>^{l_i - s} phi_ij(x) <D>^{s + m_j - eps} with phi_ij uniform in [-amp, amp]
Perturbation make_perturbation(const DNSystem& sys, const TorusGrid& g, double epsilon, double amplitude,
                               std::uint64_t seed, double s = 0.0);

struct DiscreteOperator {
    CMat matrix;
    TorusGrid grid;
    int q = 1;
    RVec l, m;
    double s = 0.0;
    RVec w_target;  // <xi_k>^{s - l_i}, stacked like the fields
    RVec w_source;  // <xi_k>^{s + m_j}
    CMat F;         // block unitary DFT
};

DiscreteOperator assemble_dense(const DNSystem& sys, const TorusGrid& g, cplx alpha = 0.0,
                                const Perturbation* K = nullptr, double s = 0.0, size_t cap = kDefaultDenseCap);

// Wrap an arbitrary matrix with the weights of `like`.
DiscreteOperator with_matrix(const DiscreteOperator& like, CMat M);

// norm of T as a map H -> H, H = prod H^{s - l_i}
double weighted_norm(const DiscreteOperator& op, const CMat& T);
// same norm through the generalized eigenproblem T* G T v = mu G v, G = F* W^2 F
double weighted_norm_gram(const DiscreteOperator& op, const CMat& T);

struct SweepRow {
    cplx lambda;
    double norm = 0.0;  // H-operator norm of the resolvent
    double norm_times_bracket = 0.0;
    bool singular = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double max_weighted = 0.0;
    int singular_count = 0;
};

// boundary rays at radii 2^k, k = kmin..kmax, both sides
std::vector<cplx> sweep_lambdas(const Sector& sector, int kmin, int kmax);
std::vector<cplx> ray_lambdas(cplx direction, int kmin, int kmax);

SweepResult resolvent_sweep(const DiscreteOperator& op, const Sector& sector, const std::vector<cplx>& lambdas);

// log-log slope of the resolvent norm along the given rows
double sweep_slope(const SweepResult& r);

struct PvRRow {
    cplx lambda;
    double diff_norm = 0.0;
    double resolvent_norm = 0.0;
};

struct PvRResult {
    std::vector<PvRRow> rows;
    double fitted_slope = 0.0;
    double epsilon_read = 0.0;  // -1 - slope
};

PvRResult parametrix_vs_resolvent(const DNSystem& sys, const TorusGrid& g, const Sector& sector, int N,
                                  const std::vector<cplx>& lambdas, const Perturbation* K = nullptr,
                                  const ExcisionConfig& excision = {}, cplx alpha = 0.0);

}  // namespace dnsys
