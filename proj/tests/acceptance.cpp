// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dnsys/diagonalize.hpp"
#include "dnsys/discretize.hpp"
#include "dnsys/ellipticity.hpp"
#include "dnsys/funcalc.hpp"
#include "dnsys/numerics.hpp"
#include "dnsys/parametrix.hpp"
#include "dnsys/thermoplate.hpp"

#include <Eigen/Eigenvalues>

using namespace dnsys;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

RVec v1(double a) { return RVec::Constant(1, a); }

std::vector<cplx> sorted_by_modulus(CVec v) {
    std::vector<cplx> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    return out;
}

// random constant DN system with strictly decreasing diagonal orders; roughly one
// in four has a diagonal coefficient pointing into the sector
DNSystem random_constant_system(CounterRng& rng, int q, const Sector& s) {
    RVec r(q), l(q);
    double top = rng.uniform(2.5, 4.0);
    for (int i = 0; i < q; ++i) {
        r[i] = top;
        l[i] = rng.uniform(0.0, 0.5 * r[i]);
        top -= rng.uniform(0.4, 1.0);
    }
    RVec m = r - l;
    std::vector<ScalarSymbol> e;
    const bool bad = rng.uniform(0, 1) < 0.25;
    const int bad_i = static_cast<int>(rng.uniform(0, q - 1e-9));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            cplx c;
            if (i == j) {
                double ang = bad && i == bad_i ? rng.uniform(s.theta + 0.1, kPi) : rng.uniform(0, s.theta - 0.3);
                if (rng.uniform(0, 1) < 0.5) ang = -ang;
                c = std::polar(rng.uniform(1.0, 3.0), ang);
            } else {
                c = 0.3 * rng.complex_normal();
            }
            e.push_back(bracket_power_symbol(l[i] + m[j], c));
        }
    return DNSystem::make(e, l, m);
}

Outcome c1_equivalence() {
    CounterRng rng(101);
    const Sector s{kPi / 2};
    SampleGrid grid = dyadic_grid(1, -2, 10, 8, 1);
    EllipticityConfig cfg;
    int disagree = 0, passed = 0;
    for (int t = 0; t < 200; ++t) {
        DNSystem sys = random_constant_system(rng, 2 + t % 2, s);
        auto det = search_R(sys, s, grid, EllipticityMode::determinant, 16.0, cfg);
        auto mins = search_R(sys, s, grid, EllipticityMode::minors, 16.0, cfg);
        if (!checkers_agree(det, mins, cfg.threshold, 10.0)) ++disagree;
        if (det.passed) ++passed;
    }
    return {disagree == 0, fmt("disagreements=%.0f det_passed=%.0f/200", disagree, passed)};
}

Outcome c2_minors() {
    PlateParams p;
    CounterRng rng(202);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        double s = std::pow(2.0, rng.uniform(-4, 10));
        cplx lam = std::polar(std::pow(2.0, rng.uniform(-4, 14)), rng.uniform(-kPi, kPi));
        int kappa = 1 + static_cast<int>(rng.uniform(0, 3 - 1e-9));
        cplx cf = plate_minor_det(p, s, lam, kappa);
        worst = std::max(worst, std::abs(minor_det(plate_matrix(p, v1(s)), lam, kappa) - cf) / std::abs(cf));
    }
    return {worst <= 1e-12, fmt("max_rel_err=%.3g", worst)};
}

Outcome c3_parametrix() {
    auto sys = DNSystem::make({modulated_bracket_symbol(2.0, 2.0, 1.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    const Sector s{3 * kPi / 4};
    ProbeConfig pc;
    pc.kmin = 2;
    pc.kmax = 10;
    bool ok = true;
    double sl[2];
    for (int N = 1; N <= 2; ++N) {
        DecayProbe p = decay_probe(sys, ProbeQuantity::J_minus_1, N, s, pc);
        sl[N - 1] = p.fitted_slope;
        ok = ok && std::isfinite(p.fitted_slope) && std::abs(p.fitted_slope + N) <= 0.3;
    }
    return {ok, fmt("slope_N1=%.3f slope_N2=%.3f octaves=%.0f", sl[0], sl[1], pc.kmax - pc.kmin)};
}

SweepResult plate_sweep(const Sector& s) {
    auto ps = build_plate_system(PlateParams{});
    auto op = assemble_dense(ps.system, TorusGrid::make(1, 32), 1.0);
    return resolvent_sweep(op, s, sweep_lambdas(s, 0, 19));
}

Outcome c4_resolvent() {
    const Sector s{kPi / 2};
    SweepResult r = plate_sweep(s);
    SweepResult tail;
    for (const auto& row : r.rows)
        if (std::abs(row.lambda) >= std::ldexp(1.0, 16) && row.lambda.imag() >= 0.0) tail.rows.push_back(row);
    double slope = sweep_slope(tail);
    bool ok = r.rows.size() == 40 && r.singular_count == 0 && std::isfinite(r.max_weighted) &&
              std::abs(slope + 1.0) <= 0.1;
    return {ok, fmt("points=%.0f max_bracket_norm=%.4g tail_slope=%.3f", r.rows.size(), r.max_weighted, slope)};
}

Outcome c5_pvr() {
    auto sys = DNSystem::make({modulated_bracket_symbol(2.0, 2.0, 1.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    auto r = parametrix_vs_resolvent(sys, TorusGrid::make(1, 32), Sector{3 * kPi / 4}, 2, ray_lambdas(-1.0, 2, 16));
    return {r.fitted_slope <= -1.25, fmt("slope=%.3f", r.fitted_slope)};
}

struct PlateCalc {
    DiscreteOperator op;
    std::vector<HFunction> fam;
    CalculusResult res;
};

PlateCalc plate_calc(const Sector& s, int N = 32) {
    auto ps = build_plate_system(PlateParams{});
    PlateCalc pc;
    pc.op = assemble_dense(ps.system, TorusGrid::make(1, N), 1.0);
    pc.fam = default_family(s, 8, false);
    fill_sup_norms(pc.fam, s);
    pc.res = dunford_eval(pc.op, pc.fam, make_sector_contour(s), true, 1e-6);
    return pc;
}

Outcome c6_oracle() {
    const Sector s{kPi / 2};
    PlateCalc pc = plate_calc(s);
    auto ps = build_plate_system(PlateParams{});
    const TorusGrid& g = pc.op.grid;
    auto blocks = multiplier_blocks(ps.system, g, 1.0);
    const int M = g.size();
    double worst = 0.0;
    for (size_t k = 0; k < pc.fam.size(); ++k) {
        CMat D = CMat::Zero(3 * M, 3 * M);
        for (int m = 0; m < M; ++m) {
            CMat fb = matrix_holo_calc(pc.fam[k], blocks[m], s);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) D(i * M + m, j * M + m) = fb(i, j);
        }
        CMat dense = pc.op.F.adjoint() * D * pc.op.F;
        worst = std::max(worst, weighted_norm(pc.op, dense - pc.res.ops[k]) / weighted_norm(pc.op, dense));
    }
    return {worst <= 1e-6 && pc.res.refinement_change <= 1e-6,
            fmt("max_rel_err=%.3g refinement_change=%.3g members=%.0f", worst, pc.res.refinement_change,
                pc.fam.size())};
}

Outcome c7_hinfty() {
    const Sector s{kPi / 2};
    PlateCalc pc = plate_calc(s);
    const double drift = std::abs(pc.res.M_refined - pc.res.M_estimate) / pc.res.M_estimate;
    // identity operator: f1(1) = 1/4 against sup |f1| = 1/2 on the imaginary axis
    auto id = DNSystem::make({constant_symbol(1.0)}, RVec::Zero(1), RVec::Zero(1));
    auto op = assemble_dense(id, TorusGrid::make(1, 4));
    std::vector<HFunction> f1 = {rational_member(1)};
    fill_sup_norms(f1, s);
    double ident = dunford_eval(op, f1, make_sector_contour(s), false).entries[0].ratio;
    bool ok = std::isfinite(pc.res.M_estimate) && drift <= 0.05 && std::abs(ident - 0.5) <= 1e-6 &&
              pc.res.M_estimate >= ident;
    return {ok, fmt("M=%.4f M_refined=%.4f drift=%.3g identity_ratio=%.6f", pc.res.M_estimate, pc.res.M_refined,
                    drift, ident)};
}

Outcome c8_diagonalization() {
    CounterRng rng(808);
    const Sector s{kPi / 2};
    double off_worst = 0.0, eig_worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        auto red = reduce_orders(random_constant_system(rng, 3, s));
        for (int k = 0; k <= 10; ++k) {
            CMat B = eval_matrix(red.sys, v1(0), v1(std::ldexp(1.0, k)));
            auto D = closed_diagonalization(B);
            CMat X = D.S.partialPivLu().solve(B * D.S);
            CMat off = X;
            off.diagonal().setZero();
            off_worst = std::max(off_worst, off.norm() / B.norm());
            auto e1 = sorted_by_modulus(Eigen::ComplexEigenSolver<CMat>(B).eigenvalues());
            auto e2 = sorted_by_modulus(D.d);
            for (int j = 0; j < 3; ++j) eig_worst = std::max(eig_worst, std::abs(e1[j] - e2[j]) / std::abs(e1[j]));
        }
    }
    return {off_worst <= 1e-8 && eig_worst <= 1e-8, fmt("max_offdiag=%.3g max_eig_err=%.3g", off_worst, eig_worst)};
}

Outcome c9_evolution() {
    PlateParams p;
    auto g = TorusGrid::make(1, 32);
    const int M = g.size();

    const int k0 = 5;
    Eigen::ComplexEigenSolver<CMat> es(plate_matrix(p, g.freqs[k0]));
    double decay_err = 0.0;
    for (int e = 0; e < 3; ++e) {
        cplx mu = es.eigenvalues()[e];
        CVec v = es.eigenvectors().col(e);
        CVec u(3 * M);
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < M; ++a) u[i * M + a] = v[i] * std::exp(cplx(0, g.freqs[k0][0] * g.points[a][0]));
        EvolveConfig ec;
        ec.T = 0.05;
        ec.steps = 50;
        ec.samples = 1;
        auto tr = evolve_plate(p, g, u, nullptr, ec);
        decay_err = std::max(decay_err, (tr.final_field - std::exp(-ec.T * mu) * u).norm() / u.norm());
    }

    CounterRng rng(909);
    CVec u0(3 * M);
    for (int i = 0; i < 3; ++i) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        for (int x = 0; x < M; ++x) u0[i * M + x] = a * std::cos(g.points[x][0]) + b * std::sin(2 * g.points[x][0]);
    }
    PlateForcing f = [&](double t) {
        CVec out(3 * M);
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < M; ++a) out[i * M + a] = std::sin(2 * t + i) * std::cos(g.points[a][0]);
        return out;
    };
    EvolveConfig c1;
    c1.T = 1.0;
    c1.steps = 2000;
    c1.samples = 1;
    EvolveConfig c2 = c1;
    c2.steps = 4000;
    auto a = evolve_plate(p, g, u0, f, c1);
    auto b = evolve_plate(p, g, u0, f, c2);
    double halving = (a.final_field - b.final_field).norm() / b.final_field.norm();

    EvolveConfig ce;
    ce.T = 1.0;
    ce.steps = 200;
    ce.samples = 200;
    auto free = evolve_plate(p, g, u0, nullptr, ce);
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < free.energy.size(); ++i) worst_rise = std::max(worst_rise, free.energy[i] - free.energy[i - 1]);
    return {decay_err <= 1e-8 && halving <= 1e-6 && worst_rise <= 1e-10,
            fmt("decay_err=%.3g halving=%.3g max_energy_step=%.3g", decay_err, halving, worst_rise)};
}

Outcome c10_conjugation() {
    const Sector s{kPi / 2};
    auto ps = build_plate_system(PlateParams{});
    auto op = assemble_dense(ps.system, TorusGrid::make(1, 32), 1.0);
    const int D = static_cast<int>(op.matrix.rows());
    auto fam = default_family(s, 8, false);
    auto contour = make_sector_contour(s);
    auto base = dunford_eval(op, fam, contour, false);
    CounterRng rng(1010);
    double worst = 0.0, worst_cond = 0.0;
    for (int t = 0; t < 3; ++t) {
        CMat V = CMat::Identity(D, D);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) V(i, j) += 0.2 * rng.complex_normal() / std::sqrt(double(D));
        worst_cond = std::max(worst_cond, condition_number(V));
        CMat Vi = V.inverse();
        auto conj = dunford_eval(with_matrix(op, Vi * op.matrix * V), fam, contour, false);
        for (size_t k = 0; k < fam.size(); ++k)
            worst = std::max(worst, spectral_norm(conj.ops[k] - Vi * base.ops[k] * V));
    }
    return {worst <= 1e-8, fmt("max_diff=%.3g max_cond_V=%.3g", worst, worst_cond)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {"ellipticity checker equivalence", 60, c1_equivalence},
        {"closed form plate minors", 5, c2_minors},
        {"parametrix remainder exponent", 120, c3_parametrix},
        {"resolvent decay", 180, c4_resolvent},
        {"parametrix vs resolvent", 300, c5_pvr},
        {"functional calculus oracle", 300, c6_oracle},
        {"H-infinity bound", 120, c7_hinfty},
        {"diagonalization exactness", 60, c8_diagonalization},
        {"plate evolution", 60, c9_evolution},
        {"conjugation invariance", 120, c10_conjugation},
    };
    int failed = 0;
    for (size_t i = 0; i < all.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = o.ok && el <= all[i].limit_s;
        if (!ok) ++failed;
        std::printf("%s %2zu %-34s %s time=%.2fs/%.0fs\n", ok ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), el,
                    all[i].limit_s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
