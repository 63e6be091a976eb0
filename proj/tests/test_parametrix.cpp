#include "doctest.h"
#include "dnsys/parametrix.hpp"
#include "dnsys/thermoplate.hpp"

#include <cmath>

using namespace dnsys;

namespace {
RVec v1(double a) { return RVec::Constant(1, a); }
DNSystem modulated() {
    return DNSystem::make({modulated_bracket_symbol(2.0, 2.0, 1.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
}
}  // namespace

TEST_CASE("g0 of diagonal and triangular systems") {
    RVec l(2), m(2);
    l << 0, 0;
    m << 0, 0;
    // constant 2x2 [[a, b], [0, c]] with orders 0 (l = m = 0 forbids ties, so use distinct r)
    l << 0.5, 0;
    m << 0.5, 0;
    auto a = constant_symbol(3.0, 1, 1.0), b = constant_symbol(2.0, 1, 0.5), z = constant_symbol(0.0, 1, 0.5),
         c = constant_symbol(-1.0, 1, 0.0);
    auto sys = DNSystem::make({a, b, z, c}, l, m);
    cplx lam(0.5, 2.0);
    CMat G = g0_eval(sys, v1(0), v1(1), lam);
    CHECK(std::abs(G(0, 0) - 1.0 / (3.0 - lam)) < 1e-14);
    CHECK(std::abs(G(1, 1) - 1.0 / (-1.0 - lam)) < 1e-14);
    CHECK(std::abs(G(0, 1) + 2.0 / ((3.0 - lam) * (-1.0 - lam))) < 1e-14);
    CHECK(std::abs(G(1, 0)) < 1e-15);
}

TEST_CASE("g0 of the plate at lambda = 0 matches the adjugate formula") {
    PlateParams p;
    p.excised = false;
    auto ps = build_plate_system(p);
    for (double s : {0.7, 2.0, 9.0}) {
        CMat A = plate_matrix(p, v1(s));
        CMat G = g0_eval(ps.system, v1(0), v1(s), 0.0);
        cplx det = A.determinant();
        CHECK(std::abs(det - std::pow(s, ps.orders.r.sum())) < 1e-10 * std::abs(det));
        CMat adj(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                CMat minor(2, 2);
                int rr = 0;
                for (int a = 0; a < 3; ++a) {
                    if (a == j) continue;
                    int cc = 0;
                    for (int b = 0; b < 3; ++b) {
                        if (b == i) continue;
                        minor(rr, cc++) = A(a, b);
                    }
                    ++rr;
                }
                adj(i, j) = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
            }
        CHECK((G - adj / det).norm() < 1e-10 * G.norm());
    }
}

TEST_CASE("g0 singularity is reported") {
    auto sys = DNSystem::make({bracket_power_symbol(2.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    CHECK_THROWS_AS(g0_eval(sys, v1(0), v1(0), 1.0), Error);
}

TEST_CASE("left inverse residual") {
    auto sys = modulated();
    for (double s : {0.0, 3.0, 100.0})
        for (cplx lam : {cplx(-1.0), cplx(-3.0, 4.0)}) {
            CMat A = eval_matrix(sys, v1(0.4), v1(s));
            CMat G = g0_eval(sys, v1(0.4), v1(s), lam);
            CMat M = A - lam * CMat::Identity(1, 1);
            CHECK((G * M - CMat::Identity(1, 1)).norm() <= 1e-10 * std::max(1.0, (M.norm() * G.norm())));
        }
}

TEST_CASE("corrections vanish for constant systems") {
    auto sys = DNSystem::make({bracket_power_symbol(2.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    CHECK(gnu_eval(sys, 1, v1(0.2), v1(4.0), -1.0).norm() == 0.0);
    CHECK(gnu_eval(sys, 2, v1(0.2), v1(4.0), -1.0).norm() == 0.0);
    CHECK_THROWS_AS(gnu_eval(sys, 0, v1(0.2), v1(4.0), -1.0), Error);
    auto P = build_truncated_parametrix(sys, 3, Sector{kPi / 2});
    CHECK((P.eval(v1(0.3), v1(5.0), -2.0) - g0_eval(sys, v1(0.3), v1(5.0), -2.0)).norm() < 1e-15);
}

TEST_CASE("first correction matches the hand formula") {
    auto sys = modulated();
    for (double x : {0.3, 2.0})
        for (double xi : {1.5, 6.0})
            for (cplx lam : {cplx(-1.0), cplx(-2.0, 3.0)}) {
                const double br2 = 1 + xi * xi;
                const cplx a = (2 + std::sin(x)) * br2;
                // G1 = -d_xi G0 * D_x a * G0, D_x = -i d_x
                const cplx dxi_a = (2 + std::sin(x)) * 2 * xi;
                const cplx Dx_a = cplx(0, -1) * std::cos(x) * br2;
                const cplx expected = dxi_a * Dx_a / std::pow(a - lam, 3);
                CHECK(std::abs(gnu_eval(sys, 1, v1(x), v1(xi), lam)(0, 0) - expected) <= 1e-8 * std::abs(expected));
            }
}

TEST_CASE("term trees of the second correction") {
    auto terms = build_terms(1, 2);
    REQUIRE(terms.size() == 3);
    CHECK(terms[0].tree.size() == 1);
    CHECK(terms[1].records.size() == 1);
    CHECK(terms[1].tree.size() == 1);
    // (m, |alpha|) in {(0, 2), (1, 1)}
    CHECK(terms[2].records.size() == 2);
    // d_xi^2 G0 Dxx A G0 gives two words, d_xi G1 Dx A G0 gives four distinct words
    CHECK(terms[2].tree.size() == 6);
    CHECK(terms[2].tree.max_factors() == 4);
    for (const auto& [w, c] : terms[2].tree.words) CHECK(w.size() >= 2);
}

TEST_CASE("truncated parametrix with N = 1 is G0 and excision removes corrections at small xi") {
    auto sys = modulated();
    auto P1 = build_truncated_parametrix(sys, 1, Sector{3 * kPi / 4});
    CHECK((P1.eval(v1(0.5), v1(3.0), -2.0) - g0_eval(sys, v1(0.5), v1(3.0), -2.0)).norm() == 0.0);
    auto P2 = build_truncated_parametrix(sys, 2, Sector{3 * kPi / 4});
    REQUIRE(P2.eps.size() == 2);
    CHECK(P2.eps[1] > 0.0);
    const double small = 0.9 / P2.eps[1];
    CHECK((P2.eval(v1(0.5), v1(small), -2.0) - g0_eval(sys, v1(0.5), v1(small), -2.0)).norm() == 0.0);
    auto P3 = build_truncated_parametrix(sys, 3, Sector{3 * kPi / 4});
    CHECK(P3.eps[1] > P3.eps[2]);
}

TEST_CASE("remainder decay exponents") {
    auto sys = modulated();
    const Sector s{3 * kPi / 4};
    auto c0 = decay_probe(DNSystem::make({bracket_power_symbol(2.0)}, RVec::Zero(1), RVec::Constant(1, 2.0)),
                          ProbeQuantity::J_minus_1, 2, s);
    CHECK(std::isinf(c0.fitted_slope));
    CHECK(c0.fitted_slope < 0);
    for (int N = 1; N <= 2; ++N) {
        auto p = decay_probe(sys, ProbeQuantity::J_minus_1, N, s);
        CHECK(std::abs(p.fitted_slope + N) <= 0.3);
        CHECK(p.lambda_decay_ok);
    }
}

TEST_CASE("G0 bounds on the plate are finite and grid stable") {
    PlateParams pp;
    auto ps = build_plate_system(pp);
    const Sector s{3 * kPi / 4};
    ProbeConfig coarse;
    coarse.kmin = 2;
    coarse.kmax = 6;
    ProbeConfig fine = coarse;
    fine.kmax = 10;
    for (auto q : {ProbeQuantity::g0_diag_bound, ProbeQuantity::g0_offdiag_bound}) {
        auto a = decay_probe(ps.system, q, 1, s, coarse);
        auto b = decay_probe(ps.system, q, 1, s, fine);
        CHECK(std::isfinite(a.sup));
        CHECK(b.sup <= 2.0 * a.sup);
    }
}

TEST_CASE("correction bounds of the variable example") {
    auto sys = modulated();
    auto g = decay_probe(sys, ProbeQuantity::gnu_bound, 2, Sector{3 * kPi / 4});
    CHECK(std::isfinite(g.sup));
    CHECK(g.sup > 0.0);
}
