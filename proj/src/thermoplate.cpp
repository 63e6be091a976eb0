#include "dnsys/thermoplate.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace dnsys {

namespace {

template <class T>
T plate_entry(const PlateParams& p, int i, int j, const Arr2<T>& xi, int n) {
    const double ae = 2.0 * p.alpha * p.eta, be = 2.0 * p.beta * p.eta;
    if (i == 0 && j == 0) return norm_pow(xi, n, ae);
    if (i == 0 && j == 1) return norm_pow(xi, n, be);
    if (i == 1 && j == 0) return norm_pow(xi, n, be) * cplx(-1.0);
    if (i == 1 && j == 2) return norm_pow(xi, n, p.eta);
    if (i == 2 && j == 1) return norm_pow(xi, n, p.eta) * cplx(-1.0);
    return lift(xi[0], 0.0);
}

}  // namespace

bool parabolic(const PlateParams& p) { return p.alpha > p.beta && 2.0 * p.beta - p.alpha > 0.5; }

PlateOrders plate_orders(const PlateParams& p) {
    PlateOrders o;
    const double e = p.eta, a = p.alpha, b = p.beta;
    o.m = RVec(3);
    o.l = RVec(3);
    o.m << 2 * e * (a - b), 0.0, 2 * e * (0.5 + a - 2 * b);
    o.l << 2 * b * e, 2 * e * (2 * b - a), e;
    o.r = o.l + o.m;
    return o;
}

PlateSystem build_plate_system(const PlateParams& p, int n) {
    if (!(p.eta > 0.0)) throw Error(ErrorKind::input, "eta must be positive");
    if (p.alpha < 0.0 || p.alpha > 1.0 || p.beta < 0.0 || p.beta > 1.0)
        throw Error(ErrorKind::input, "alpha and beta must lie in [0, 1]");
    PlateSystem ps;
    ps.params = p;
    ps.orders = plate_orders(p);
    ps.parabolic = parabolic(p);
    std::vector<ScalarSymbol> entries;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const bool ex = p.excised;
            auto f = [p, i, j, ex](const auto&, const auto& xi, int dim) {
                auto v = plate_entry(p, i, j, xi, dim);
                return ex ? excision(xi, dim, 1.0) * v : v;
            };
            entries.push_back(make_symbol(f, ps.orders.l[i] + ps.orders.m[j], 0.0, SymbolKind::constant_coefficient,
                                          n, "plate" + std::to_string(i + 1) + std::to_string(j + 1)));
        }
    ps.system = DNSystem::make(std::move(entries), ps.orders.l, ps.orders.m, 0.0);
    return ps;
}

CMat plate_matrix(const PlateParams& p, const RVec& xi, bool excised) {
    const int n = static_cast<int>(xi.size());
    Arr2<cplx> a{};
    for (int i = 0; i < n; ++i) a[i] = xi[i];
    CMat A(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = plate_entry(p, i, j, a, n);
    if (excised) A *= excision(a, n, 1.0);
    return A;
}

CMat unreduced_plate_matrix(const PlateParams& p, const RVec& xi) {
    if (!(p.c > 0.0)) throw Error(ErrorKind::input, "damping c must be positive");
    CMat A = plate_matrix(p, xi, false);
    A.row(0) /= p.c;
    return A;
}

cplx plate_minor_det(const PlateParams& p, double s, cplx lambda, int kappa) {
    const PlateOrders o = plate_orders(p);
    auto pw = [s](double e) { return s == 0.0 ? (e == 0.0 ? 1.0 : 0.0) : std::pow(s, e); };
    switch (kappa) {
        case 1: return pw(o.r[0]) - lambda;
        case 2: return pw(o.r[0]) * (pw(o.r[1]) - lambda);
        case 3: return pw(o.r[0] + o.r[1]) * (pw(o.r[2]) - lambda);
        default: throw Error(ErrorKind::input, "kappa must be 1, 2 or 3");
    }
}

bool plate_sector_inequality(double s, cplx lambda, double theta, double rel_tol) {
    const double lhs = std::norm(s - lambda);
    const double rhs = std::min(1.0, 1.0 - std::cos(theta)) * (s * s + std::norm(lambda));
    return lhs >= rhs * (1.0 - rel_tol);
}

double plate_energy(const CVec& coefficients) { return coefficients.norm(); }

PlateTrajectory evolve_plate(const PlateParams& p, const TorusGrid& g, const CVec& u0, const PlateForcing& f,
                             const EvolveConfig& cfg) {
    const int M = g.size();
    if (u0.size() != 3 * M) throw Error(ErrorKind::input, "initial field has the wrong size");
    if (cfg.steps < 1 || cfg.samples < 1 || cfg.steps % cfg.samples != 0)
        throw Error(ErrorKind::input, "steps must be a positive multiple of samples");
    if (!(cfg.T > 0.0)) throw Error(ErrorKind::input, "T must be positive");
    const CMat F = dft_matrix(g);
    const double dt = cfg.T / cfg.steps;

    auto to_modes = [&](const CVec& u) {
        CMat c(3, M);
        for (int i = 0; i < 3; ++i) c.row(i) = (F * u.segment(i * M, M)).transpose();
        return c;
    };

    std::vector<CMat> E11(M), E12(M);
    for (int k = 0; k < M; ++k) {
        CMat B = cfg.unreduced ? unreduced_plate_matrix(p, g.freqs[k]) : plate_matrix(p, g.freqs[k], false);
        B.diagonal().array() += cfg.shift;
        CMat aug = CMat::Zero(6, 6);
        aug.topLeftCorner(3, 3) = -dt * B;
        aug.topRightCorner(3, 3) = dt * CMat::Identity(3, 3);
        CMat E = aug.exp();
        if (!E.allFinite()) throw Error(ErrorKind::numerical, "matrix exponential failed");
        E11[k] = E.topLeftCorner(3, 3);
        E12[k] = E.topRightCorner(3, 3);
    }

    PlateTrajectory tr;
    CMat modes = to_modes(u0);
    auto record = [&](double t) {
        CVec flat(3 * M);
        for (int i = 0; i < 3; ++i) flat.segment(i * M, M) = modes.row(i).transpose();
        tr.times.push_back(t);
        tr.states.push_back(flat);
        tr.energy.push_back(plate_energy(flat));
        for (int k = 0; k < M; ++k) {
            PlateTrajectoryRow r;
            r.t = t;
            r.mode = k;
            for (int i = 0; i < 3; ++i) r.abs_u[i] = std::abs(modes(i, k));
            tr.rows.push_back(r);
        }
    };
    record(0.0);
    const int every = cfg.steps / cfg.samples;
    for (int s = 0; s < cfg.steps; ++s) {
        CMat fm;
        if (f) fm = to_modes(f((s + 0.5) * dt));
        for (int k = 0; k < M; ++k) {
            CVec next = E11[k] * modes.col(k);
            if (f) next += E12[k] * fm.col(k);
            modes.col(k) = next;
        }
        if ((s + 1) % every == 0) record((s + 1) * dt);
    }
    tr.final_field.resize(3 * M);
    for (int i = 0; i < 3; ++i) tr.final_field.segment(i * M, M) = F.adjoint() * modes.row(i).transpose();
    return tr;
}

}  // namespace dnsys
