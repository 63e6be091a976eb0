#include "doctest.h"
#include "dnsys/diagonalize.hpp"
#include "dnsys/numerics.hpp"
#include "dnsys/thermoplate.hpp"

#include <algorithm>
#include <cmath>

using namespace dnsys;

namespace {
RVec v1(double a) { return RVec::Constant(1, a); }

DNSystem two_by_two() {
    // [[2<xi>, <xi>^(1/2)], [<xi>^(1/2), 1]] with l = m = (1/2, 0)
    RVec l(2), m(2);
    l << 0.5, 0;
    m << 0.5, 0;
    return DNSystem::make({bracket_power_symbol(1.0, 2.0), bracket_power_symbol(0.5), bracket_power_symbol(0.5),
                           constant_symbol(1.0, 1, 0.0)},
                          l, m);
}

DNSystem variable_two_by_two() {
    RVec l(2), m(2);
    l << 1, 0;
    m << 1, 0.5;
    std::vector<ScalarSymbol> e;
    e.push_back(modulated_bracket_symbol(2.0, 2.0, 1.0));
    e.push_back(bracket_power_symbol(1.5, 0.3));
    e.push_back(make_symbol(
        [](const auto& x, const auto& xi, int n) { return (cos(x[0]) * cplx(0.2) + cplx(0.5)) * bracket_pow(xi, n, 1.0); },
        1.0, 0.0, SymbolKind::variable, 1));
    e.push_back(bracket_power_symbol(0.5));
    return DNSystem::make(e, l, m);
}

std::vector<cplx> sorted_by_modulus(CVec v) {
    std::vector<cplx> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    return out;
}
}  // namespace

TEST_CASE("order reduction of simple systems") {
    auto z = constant_symbol(0.0, 1, 1.5);
    RVec l(2), m(2);
    l << 1, 0.5;
    m << 1, 0.5;
    auto d = DNSystem::make({bracket_power_symbol(2.0), z, z, bracket_power_symbol(1.0)}, l, m);
    auto red = reduce_orders(d);
    for (double s : {0.0, 2.0, 50.0}) CHECK((eval_matrix(red.sys, v1(0), v1(s)) - eval_matrix(d, v1(0), v1(s))).norm() < 1e-12 * (1 + s * s));
    CHECK(red.sys.l.norm() == 0.0);
    CHECK((red.sys.r() - d.r()).norm() < 1e-15);

    auto q1 = DNSystem::make({modulated_bracket_symbol(2.0, 2.0, 1.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    auto r1 = reduce_orders(q1);
    CHECK(std::abs(r1.sys(0, 0)(v1(0.3), v1(4.0)) - q1(0, 0)(v1(0.3), v1(4.0))) < 1e-12);
}

TEST_CASE("reduced plate entries carry the column order") {
    PlateParams p;
    auto ps = build_plate_system(p);
    auto red = reduce_orders(ps.system);
    double worst = 0.0;
    for (int k = 0; k <= 14; ++k) {
        RVec xi = v1(std::ldexp(1.0, k));
        CMat B = eval_matrix(red.sys, v1(0), xi);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(B(i, j)) / std::pow(bracket(xi), ps.orders.r[j]));
        // b_12 = <xi>^{-l_1} |xi|^{2 beta eta} chi <xi>^{l_2}
        const double s = xi[0];
        const double b12 = std::pow(bracket(xi), -ps.orders.l[0] + ps.orders.l[1]) * std::pow(s, 2 * p.beta * p.eta) * ramp(s);
        CHECK(std::abs(B(0, 1) - b12) < 1e-10 * std::abs(b12) + 1e-300);
    }
    CHECK(worst <= 1.0 + 1e-10);
}

TEST_CASE("leading columns of [[2,1],[1,1]]") {
    CMat B(2, 2);
    B << 2, 1, 1, 1;
    auto c0 = leading_column(B, 0);
    CHECK(std::abs(c0.d - 2.0) < 1e-15);
    CHECK(std::abs(c0.s[0] - 1.0) < 1e-15);
    auto c1 = leading_column(B, 1);
    CHECK(std::abs(c1.d - 0.5) < 1e-15);
    CHECK(std::abs(c1.s[0] + 0.5) < 1e-15);
    CHECK(std::abs(c1.s[1] - 1.0) < 1e-15);
    auto D = leading_diagonalization(B);
    CHECK(std::abs(D.S(1, 0) - 0.5) < 1e-15);
    // d_22 = det B / det B[1]
    CHECK(std::abs(D.d[1] - B.determinant() / B(0, 0)) < 1e-15);
}

TEST_CASE("upper triangular B keeps its diagonal") {
    CMat B(3, 3);
    B << 5, 1, 2, 0, 3, -1, 0, 0, 1;
    auto D = leading_diagonalization(B);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(D.d[j] - B(j, j)) < 1e-14);
        CHECK(std::abs(D.S(j, j) - 1.0) < 1e-15);
        for (int i = j + 1; i < 3; ++i) CHECK(std::abs(D.S(i, j)) < 1e-15);
    }
}

TEST_CASE("plate leading quotients follow the column orders") {
    PlateParams p;
    auto ps = build_plate_system(p);
    auto red = reduce_orders(ps.system);
    for (double s : {16.0, 256.0}) {
        CMat B = eval_matrix(red.sys, v1(0), v1(s));
        auto D = leading_diagonalization(B);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(D.d[j]) / std::pow(s, ps.orders.r[j]) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("closed diagonalization of random constant systems") {
    CounterRng rng(11);
    for (int t = 0; t < 10; ++t) {
        CMat B(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) B(i, j) = rng.complex_normal();
        B.diagonal() += CVec::LinSpaced(3, 9.0, 1.0);
        auto D = closed_diagonalization(B);
        CMat X = D.S.partialPivLu().solve(B * D.S);
        CMat off = X;
        off.diagonal().setZero();
        CHECK(off.norm() <= 1e-8 * B.norm());
        for (int j = 0; j < 3; ++j) CHECK(std::abs(D.S(j, j) - 1.0) < 1e-12);
        auto e1 = sorted_by_modulus(Eigen::ComplexEigenSolver<CMat>(B).eigenvalues());
        auto e2 = sorted_by_modulus(D.d);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(e1[j] - e2[j]) <= 1e-8 * std::abs(e1[j]));
    }
}

TEST_CASE("off-diagonal probes") {
    auto q1 = DNSystem::make({bracket_power_symbol(2.0)}, RVec::Zero(1), RVec::Constant(1, 2.0));
    auto p1 = offdiag_decay_probe(reduce_orders(q1), 1);
    CHECK(p1.max_residual == 0.0);

    auto cst = offdiag_decay_probe(reduce_orders(two_by_two()), 1);
    CHECK(cst.max_residual <= 1e-12);

    auto red = reduce_orders(variable_two_by_two());
    auto n1 = offdiag_decay_probe(red, 1);
    auto n2 = offdiag_decay_probe(red, 2);
    CHECK(n1.fitted_slope == doctest::Approx(-1.0).epsilon(0.3));
    CHECK(n1.fitted_slope - n2.fitted_slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("diagonal entries are elliptic and satisfy the quotient identity") {
    auto red = reduce_orders(two_by_two());
    auto grid = dyadic_grid(1, 0, 10);
    auto r = diag_lambda_ellipticity_check(red, Sector{kPi / 2}, grid);
    CHECK(r.report.passed);
    CHECK(r.quotient_identity_error <= 1e-8);
    CMat B = eval_matrix(red.sys, v1(0), v1(3.0));
    auto D = leading_diagonalization(B);
    cplx lam(-1.0, 2.0);
    CMat B1 = B.topLeftCorner(1, 1);
    CMat Bl = B;
    Bl(1, 1) -= lam;
    CHECK(std::abs((D.d[1] - lam) - Bl.determinant() / B1.determinant()) < 1e-12 * std::abs(D.d[1] - lam));

    PlateParams p;
    auto ps = build_plate_system(p);
    auto rp = diag_lambda_ellipticity_check(reduce_orders(ps.system), Sector{3 * kPi / 4}, dyadic_grid(1, 1, 10));
    CHECK(rp.report.passed);
}

TEST_CASE("back conjugation and conjugator conditioning") {
    auto red = reduce_orders(two_by_two());
    for (double s : {1.0, 10.0, 1000.0}) {
        auto bc = back_conjugation(red, v1(s));
        CHECK((bc.V * bc.W - CMat::Identity(2, 2)).norm() < 1e-10);
    }
    double c = conjugator_condition(red, TorusGrid::make(1, 32));
    CHECK(std::isfinite(c));
    CHECK(c < 1e10);
}
