#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dnsys/discretize.hpp"
#include "dnsys/ellipticity.hpp"

namespace dnsys {

// Holomorphic function on the complement of the sector.
struct HFunction {
    std::function<cplx(cplx)> f;
    double decay_s = 1.0;
    double sup_norm = 0.0;  // filled by estimate_sup_norm
    std::string label;
    int k = 0;
    double phi = 0.0;

    cplx operator()(cplx z) const { return f(z); }
};

// f_k(e^{i phi} lambda) with f_k(z) = z^k (1+z)^{-2k}
HFunction rational_member(int k, double phi = 0.0);
HFunction product(const HFunction& a, const HFunction& b);
HFunction zero_function();
// (c + lambda)^{-1}, holomorphic away from -c
HFunction shifted_inverse(cplx c = 1.0);

// members k = 1..kmax; rotated copies with phi = +-(pi - theta)/2 keep the poles in the sector
std::vector<HFunction> default_family(const Sector& sector, int kmax = 8, bool rotated = true);

// sup |f| over both boundary rays (log-spaced) plus 64 points on interior rays
double estimate_sup_norm(const HFunction& f, const Sector& sector);
void fill_sup_norms(std::vector<HFunction>& fam, const Sector& sector);

struct QuadNode {
    cplx lambda;
    cplx weight;  // includes d lambda and 1/(2 pi i)
};

struct SectorContour {
    double theta = kPi / 2;
    double r_min = 1e-6;
    double R_max = 1e6;
    int nodes_per_panel = 16;
    std::vector<QuadNode> nodes;
};

// out along the e^{-i theta} ray, in along the e^{i theta} ray, Gauss-Legendre on
// [0, r_min], geometric ratio-2 panels up to R_max and a tail panel in u = 1/r
SectorContour make_sector_contour(const Sector& sector, int nodes_per_panel = 16, double r_min = 1e-6,
                                  double R_max = 1e6);
SectorContour refined(const SectorContour& c);

// f(M) by eigendecomposition, or by circles around eigenvalue clusters when the
// eigenvector matrix is ill-conditioned; circles stay inside the complement of `domain`
CMat matrix_holo_calc(const HFunction& f, const CMat& M, const Sector& domain = Sector{kPi * 0.999});

struct CalculusEntry {
    std::string label;
    int k = 0;
    double phi = 0.0;
    double sup_norm = 0.0;
    double op_norm = 0.0;
    double ratio = 0.0;
};

struct CalculusResult {
    std::vector<CMat> ops;                // dense route
    std::vector<std::vector<CMat>> modes;  // multiplier route: modes[f][k]
    std::vector<CMat> ops_refined;
    std::vector<std::vector<CMat>> modes_refined;
    std::vector<CalculusEntry> entries;
    double M_estimate = 0.0;
    double M_refined = 0.0;  // same estimate from the refined rule
    int nodes = 0;
    double refinement_change = 0.0;  // max relative change under refinement
};

// (1/2 pi i) sum w f(lambda) (lambda - A)^{-1}, shared resolvents over the family.
// With check_refinement the rule is refined once and a change above tol raises a
// quadrature error.
CalculusResult dunford_eval(const DiscreteOperator& op, const std::vector<HFunction>& family,
                            const SectorContour& contour, bool check_refinement = true, double tol = 1e-6);

// multiplier route: per-mode q x q blocks A(xi_k) (+ alpha)
std::vector<CMat> multiplier_blocks(const DNSystem& sys, const TorusGrid& g, cplx alpha = 0.0);
CalculusResult dunford_eval_modes(const std::vector<CMat>& blocks, const DiscreteOperator& weights,
                                  const std::vector<HFunction>& family, const SectorContour& contour,
                                  bool check_refinement = true, double tol = 1e-6);

// per-mode H-weighted norm of a block-diagonal multiplier
double modes_norm(const std::vector<CMat>& blocks, const DiscreteOperator& weights);

CalculusResult hinfty_bound_probe(const DiscreteOperator& op, std::vector<HFunction> family, const Sector& sector,
                                  const SectorContour& contour);

struct PacmanSample {
    double xi_norm = 0.0;
    RVec x;
    cplx value;
    double ratio = 0.0;  // |a_f| / ||f||_inf
};

struct PacmanResult {
    double c = 0.0;
    double C_sup = 0.0;
    int grown = 0;
    std::vector<PacmanSample> samples;
};

// a_f(x, xi) = (1/2 pi i) int_C(xi) f(lambda) (lambda - a(x, xi))^{-1} d lambda over the
// pac-man path of radius c <xi>^r with c = 2 * sampled ||a||_{delta,0}
PacmanResult pacman_symbol_calc(const ScalarSymbol& a, const HFunction& f, const Sector& sector,
                                const std::vector<RVec>& xis, const std::vector<RVec>& xs, int nodes_per_panel = 16);

}  // namespace dnsys
