#pragma once

#include <vector>

#include "dnsys/discretize.hpp"
#include "dnsys/ellipticity.hpp"
#include "dnsys/symbols.hpp"

namespace dnsys {

// B = L A L^{-1} with L = diag(<D>^{-l_i}); entry (i, j) has order r_j.
struct ReducedSystem {
    const DNSystem* base = nullptr;
    DNSystem sys;  // l = 0, m = r of the base
    RVec l;        // reduction vector of the base
    int Nc = 2;    // Leibniz truncation used for variable entries
};

ReducedSystem reduce_orders(const DNSystem& sys, int Nc = 2);

struct LeadingColumn {
    CVec s;  // column j of S^(0), unit entry at j
    cplx d;  // d_jj^(0)
};

// pointwise solve of the column-j equations (0-based j)
LeadingColumn leading_column(const CMat& B, int j);

struct PointDiagonalization {
    CMat S;  // sum of the S^(nu) terms
    CVec d;  // sum of the d^(nu) terms
    std::vector<CMat> S_terms;
    std::vector<CVec> D_terms;
    int iterations = 0;
    bool eigen_fallback = false;
};

// S^(0), d^(0) from the truncated equations
PointDiagonalization leading_diagonalization(const CMat& B);

// constant-coefficient closure: iterate the column solves on the full residual
// B S - S D until it vanishes; eigenvectors matched to the leading quotients otherwise
PointDiagonalization closed_diagonalization(const CMat& B, double tol = 1e-14, int max_iter = 500);

// Variable-coefficient conjugator at one point, corrections up to N (1 or 2)
// with Nc-truncated Leibniz products. Returns S, d and the residual sum B#S - S#D.
struct VariableDiagonalization {
    CMat S;
    CVec d;
    CMat residual;
    std::vector<CMat> S_terms;
    std::vector<CVec> D_terms;
};

VariableDiagonalization diagonalize_at(const ReducedSystem& red, const RVec& x, const RVec& xi, int N);

struct DiagSample {
    double xi_norm = 0.0;
    int j = 0;
    double d_abs = 0.0;
    double offdiag_residual = 0.0;
};

struct DiagProbe {
    int N = 1;
    double fitted_slope = 0.0;  // -inf when the residual vanishes
    double max_residual = 0.0;
    std::vector<DiagSample> samples;
};

struct DiagProbeConfig {
    int kmin = 2;
    int kmax = 10;
    int x_points = 8;
    // constant systems: close the equations exactly (false keeps the truncated S^(0))
    bool closure = true;
};

// Constant systems: ||offdiag(S^-1 B S)|| / ||B|| per xi. Variable systems:
// max_ij |(B#S - S#D)_ij| <xi>^{-r_j}.
DiagProbe offdiag_decay_probe(const ReducedSystem& red, int N, const DiagProbeConfig& cfg = {});

struct DiagEllipticity {
    EllipticityReport report;
    double quotient_identity_error = 0.0;  // constant systems only
};

DiagEllipticity diag_lambda_ellipticity_check(const ReducedSystem& red, const Sector& sector, const SampleGrid& grid,
                                              const EllipticityConfig& cfg = {});

// V = L^{-1} S L and W = V^{-1} at one frequency (constant systems)
struct BackConjugation {
    CMat V, W;
};
BackConjugation back_conjugation(const ReducedSystem& red, const RVec& xi);

// max condition number of S^(0) over the grid frequencies (constant systems) or of
// the quantized S^(0) (variable systems)
double conjugator_condition(const ReducedSystem& red, const TorusGrid& g);

}  // namespace dnsys
