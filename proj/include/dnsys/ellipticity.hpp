#pragma once

#include <optional>
#include <vector>

#include "dnsys/symbols.hpp"

namespace dnsys {

struct LambdaSampling {
    int kmin = -4;
    int kmax = 40;
    bool bisector = true;
    bool include_zero = true;
    // add spectral points (eigenvalues, minor quotients) lying in the sector and
    // their projections onto the boundary rays
    bool spectral = true;
};

// closed sector {r e^{i phi} : theta <= phi <= 2 pi - theta}
struct Sector {
    double theta = kPi / 2;

    static Sector make(double theta);
    bool contains(cplx lambda, double angle_tol = 1e-12) const;
    // side 0: arg = theta, side 1: arg = -theta
    cplx boundary(int side, double r) const { return std::polar(r, side == 0 ? theta : -theta); }
    std::vector<cplx> samples(const LambdaSampling& s) const;
    // nearest point of the sector boundary to mu
    cplx project_to_boundary(cplx mu) const;
};

struct EllipticityConfig {
    LambdaSampling lambda;
    double threshold = 1e-6;
    double scaling_cutoff = 1e4;
};

enum class EllipticityMode { determinant, minors };

struct Witness {
    RVec x, xi;
    cplx lambda;
    int kappa = 0;
};

struct EllipticityReport {
    bool passed = false;
    double C_lower = 0.0;
    double R_used = 0.0;
    std::optional<Witness> witness;
    EllipticityMode mode = EllipticityMode::determinant;
    long samples = 0;
};

struct ShiftResult {
    double alpha0 = 0.0;
    EllipticityReport report_at_alpha0;
};

cplx char_poly(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda);

// det(A[kappa] - lambda E_kappa), kappa = 1..q
cplx minor_det(const CMat& A, cplx lambda, int kappa);

// |P| / prod(<xi>^{r_i} + |lambda|), raw and through the D1/D2 rescaling
double det_ratio_raw(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda);
double det_ratio_scaled(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda);
double minor_ratio_raw(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda, int kappa);
double minor_ratio_scaled(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda, int kappa);

EllipticityReport check_det_ellipticity(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, double R,
                                        const EllipticityConfig& cfg = {});
EllipticityReport check_minor_ellipticity(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, double R,
                                          const EllipticityConfig& cfg = {});

// smallest R on the ladder {0, 1, 2, 4, ..., R_max} at which the checker passes;
// the returned report is the one at that R, or at R_max when none passes
EllipticityReport search_R(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, EllipticityMode mode,
                           double R_max, const EllipticityConfig& cfg = {});

ShiftResult find_shift(const DNSystem& sys, const Sector& sector, const SampleGrid& grid,
                       const EllipticityConfig& cfg = {}, double alpha_max = 1e6, double rel_tol = 1e-6);

// pass/fail agreement of the two checkers with slack: a disagreement is recorded
// only if one passes at `threshold` while the other fails at threshold/slack
bool checkers_agree(const EllipticityReport& det, const EllipticityReport& minors, double threshold, double slack);

const char* mode_name(EllipticityMode m);

}  // namespace dnsys
