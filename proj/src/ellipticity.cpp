#include "dnsys/ellipticity.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace dnsys {

Sector Sector::make(double theta) {
    if (!(theta > 0.0 && theta < kPi)) throw Error(ErrorKind::input, "sector angle must lie in (0, pi)");
    Sector s;
    s.theta = theta;
    return s;
}

bool Sector::contains(cplx lambda, double angle_tol) const {
    if (std::abs(lambda) == 0.0) return true;
    return std::abs(std::arg(lambda)) >= theta - angle_tol;
}

std::vector<cplx> Sector::samples(const LambdaSampling& s) const {
    std::vector<cplx> out;
    if (s.include_zero) out.emplace_back(0.0);
    for (int k = s.kmin; k <= s.kmax; ++k) {
        double r = std::ldexp(1.0, k);
        out.push_back(boundary(0, r));
        out.push_back(boundary(1, r));
        if (s.bisector) out.emplace_back(-r);
    }
    return out;
}

cplx Sector::project_to_boundary(cplx mu) const {
    cplx best = 0.0;
    double bd = std::abs(mu);
    for (int side = 0; side < 2; ++side) {
        cplx d = boundary(side, 1.0);
        double t = std::max(0.0, (mu * std::conj(d)).real());
        cplx p = t * d;
        if (std::abs(mu - p) < bd) {
            bd = std::abs(mu - p);
            best = p;
        }
    }
    return best;
}

const char* mode_name(EllipticityMode m) { return m == EllipticityMode::determinant ? "determinant" : "minors"; }

cplx char_poly(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda) {
    CMat A = eval_matrix(sys, x, xi);
    A.diagonal().array() -= lambda;
    return Eigen::PartialPivLU<CMat>(A).determinant();
}

cplx minor_det(const CMat& A, cplx lambda, int kappa) {
    CMat M = A.topLeftCorner(kappa, kappa);
    M(kappa - 1, kappa - 1) -= lambda;
    return Eigen::PartialPivLU<CMat>(M).determinant();
}

double det_ratio_raw(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda) {
    CMat M = A;
    M.diagonal().array() -= lambda;
    double br = bracket(xi), la = std::abs(lambda);
    double den = 1.0;
    RVec r = sys.r();
    for (int i = 0; i < sys.q; ++i) den *= std::pow(br, r[i]) + la;
    return std::abs(Eigen::PartialPivLU<CMat>(M).determinant()) / den;
}

double det_ratio_scaled(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda) {
    const int q = sys.q;
    double br = bracket(xi), la = std::abs(lambda);
    CMat M = A;
    M.diagonal().array() -= lambda;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) M(i, j) *= std::pow(br, -sys.l[i] - sys.m[j]);
    RVec r = sys.r();
    double den = 1.0;
    for (int i = 0; i < q; ++i) den *= 1.0 + la * std::pow(br, -r[i]);
    return std::abs(Eigen::PartialPivLU<CMat>(M).determinant()) / den;
}

double minor_ratio_raw(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda, int kappa) {
    double br = bracket(xi), la = std::abs(lambda);
    RVec r = sys.r();
    double lead = 0.0;
    for (int i = 0; i + 1 < kappa; ++i) lead += r[i];
    double den = std::pow(br, lead) * (std::pow(br, r[kappa - 1]) + la);
    return std::abs(minor_det(A, lambda, kappa)) / den;
}

double minor_ratio_scaled(const DNSystem& sys, const CMat& A, const RVec& xi, cplx lambda, int kappa) {
    double br = bracket(xi), la = std::abs(lambda);
    CMat M = A.topLeftCorner(kappa, kappa);
    M(kappa - 1, kappa - 1) -= lambda;
    for (int i = 0; i < kappa; ++i)
        for (int j = 0; j < kappa; ++j) M(i, j) *= std::pow(br, -sys.l[i] - sys.m[j]);
    double den = 1.0 + la * std::pow(br, -sys.r()[kappa - 1]);
    return std::abs(Eigen::PartialPivLU<CMat>(M).determinant()) / den;
}

namespace {

struct PointMin {
    double xi_norm = 0.0;
    double ratio = std::numeric_limits<double>::infinity();
    Witness witness;
    long count = 0;
};

std::vector<cplx> spectral_points(const CMat& A, const Sector& sector) {
    std::vector<cplx> pts;
    const int q = static_cast<int>(A.rows());
    std::vector<cplx> cand;
    Eigen::ComplexEigenSolver<CMat> es(A, false);
    for (int i = 0; i < q; ++i) cand.push_back(es.eigenvalues()[i]);
    cplx prev = 1.0;
    for (int k = 1; k <= q; ++k) {
        cplx d = Eigen::PartialPivLU<CMat>(A.topLeftCorner(k, k)).determinant();
        if (std::abs(prev) > 0.0) cand.push_back(d / prev);
        prev = d;
    }
    for (cplx mu : cand) {
        if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) continue;
        if (sector.contains(mu)) pts.push_back(mu);
        pts.push_back(sector.project_to_boundary(mu));
    }
    return pts;
}

std::vector<PointMin> profile(const DNSystem& sys, const Sector& sector, const SampleGrid& grid,
                              EllipticityMode mode, const EllipticityConfig& cfg) {
    if (grid.xs.empty() || grid.xis.empty()) throw Error(ErrorKind::input, "empty sampling grid");
    const std::vector<cplx> base = sector.samples(cfg.lambda);
    std::vector<RVec> xs = grid.xs;
    if (sys.constant_coefficient()) xs.resize(1);
    std::vector<PointMin> out(grid.xis.size());
    for (size_t k = 0; k < grid.xis.size(); ++k) {
        const RVec& xi = grid.xis[k];
        PointMin& pm = out[k];
        pm.xi_norm = xi.norm();
        const bool scaled = bracket(xi) > cfg.scaling_cutoff;
        for (const auto& x : xs) {
            CMat A = eval_matrix(sys, x, xi);
            std::vector<cplx> lams = base;
            if (cfg.lambda.spectral) {
                auto sp = spectral_points(A, sector);
                lams.insert(lams.end(), sp.begin(), sp.end());
            }
            for (cplx lam : lams) {
                if (mode == EllipticityMode::determinant) {
                    double v = scaled ? det_ratio_scaled(sys, A, xi, lam) : det_ratio_raw(sys, A, xi, lam);
                    ++pm.count;
                    if (!(v >= pm.ratio)) {
                        pm.ratio = v;
                        pm.witness = {x, xi, lam, 0};
                    }
                } else {
                    for (int kappa = 1; kappa <= sys.q; ++kappa) {
                        double v = scaled ? minor_ratio_scaled(sys, A, xi, lam, kappa)
                                          : minor_ratio_raw(sys, A, xi, lam, kappa);
                        ++pm.count;
                        if (!(v >= pm.ratio)) {
                            pm.ratio = v;
                            pm.witness = {x, xi, lam, kappa};
                        }
                    }
                }
            }
        }
    }
    return out;
}

EllipticityReport reduce(const std::vector<PointMin>& prof, double R, EllipticityMode mode, double threshold) {
    EllipticityReport rep;
    rep.mode = mode;
    rep.R_used = R;
    rep.C_lower = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& pm : prof) {
        if (pm.xi_norm < R) continue;
        any = true;
        rep.samples += pm.count;
        if (!(pm.ratio >= rep.C_lower)) {
            rep.C_lower = pm.ratio;
            rep.witness = pm.witness;
        }
    }
    if (!any) throw Error(ErrorKind::input, "no xi samples with |xi| >= R");
    if (std::isnan(rep.C_lower)) rep.C_lower = 0.0;
    rep.passed = rep.C_lower >= threshold;
    return rep;
}

}  // namespace

EllipticityReport check_det_ellipticity(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, double R,
                                        const EllipticityConfig& cfg) {
    auto prof = profile(sys, sector, grid, EllipticityMode::determinant, cfg);
    return reduce(prof, R, EllipticityMode::determinant, cfg.threshold);
}

EllipticityReport check_minor_ellipticity(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, double R,
                                          const EllipticityConfig& cfg) {
    auto prof = profile(sys, sector, grid, EllipticityMode::minors, cfg);
    return reduce(prof, R, EllipticityMode::minors, cfg.threshold);
}

EllipticityReport search_R(const DNSystem& sys, const Sector& sector, const SampleGrid& grid, EllipticityMode mode,
                           double R_max, const EllipticityConfig& cfg) {
    auto prof = profile(sys, sector, grid, mode, cfg);
    EllipticityReport rep = reduce(prof, 0.0, mode, cfg.threshold);
    if (rep.passed) return rep;
    for (double R = 1.0; R <= R_max; R *= 2.0) {
        rep = reduce(prof, R, mode, cfg.threshold);
        if (rep.passed) return rep;
    }
    return rep;
}

ShiftResult find_shift(const DNSystem& sys, const Sector& sector, const SampleGrid& grid,
                       const EllipticityConfig& cfg, double alpha_max, double rel_tol) {
    auto check = [&](double a) { return check_det_ellipticity(shifted(sys, a), sector, grid, 0.0, cfg); };
    ShiftResult res;
    EllipticityReport r0 = check(0.0);
    if (r0.passed) {
        res.alpha0 = 0.0;
        res.report_at_alpha0 = r0;
        return res;
    }
    double lo = 0.0, hi = 1.0;
    EllipticityReport rh = check(hi);
    while (!rh.passed) {
        lo = hi;
        hi *= 2.0;
        if (hi > alpha_max) throw Error(ErrorKind::not_found, "no admissible shift below alpha_max");
        rh = check(hi);
    }
    while (hi - lo > rel_tol * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        EllipticityReport rm = check(mid);
        if (rm.passed) {
            hi = mid;
            rh = rm;
        } else {
            lo = mid;
        }
    }
    res.alpha0 = hi;
    res.report_at_alpha0 = rh;
    return res;
}

bool checkers_agree(const EllipticityReport& det, const EllipticityReport& minors, double threshold, double slack) {
    bool det_hi = det.C_lower >= threshold, det_lo = det.C_lower >= threshold / slack;
    bool min_hi = minors.C_lower >= threshold, min_lo = minors.C_lower >= threshold / slack;
    return !((det_hi && !min_lo) || (min_hi && !det_lo));
}

}  // namespace dnsys
