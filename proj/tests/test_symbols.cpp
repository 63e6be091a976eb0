#include "doctest.h"
#include "dnsys/symbols.hpp"
#include "dnsys/thermoplate.hpp"

#include <cmath>

using namespace dnsys;

namespace {
RVec v1(double a) { return RVec::Constant(1, a); }
RVec v2(double a, double b) {
    RVec v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("eval_matrix on simple systems") {
    auto one = constant_symbol(1.0, 1, 0.0);
    auto sys = DNSystem::make({one}, v1(0), v1(0));
    CMat A = eval_matrix(sys, v1(0.3), v1(5.0));
    CHECK(A.rows() == 1);
    CHECK(std::abs(A(0, 0) - 1.0) < 1e-15);

    auto d = DNSystem::make({bracket_power_symbol(2.0), constant_symbol(0.0, 1, 1.5),
                             constant_symbol(0.0, 1, 1.5), bracket_power_symbol(1.0)},
                            v2(1, 0.5), v2(1, 0.5));
    CMat D = eval_matrix(d, v1(0), v1(0));
    CHECK((D - CMat::Identity(2, 2)).norm() < 1e-15);

    CHECK_THROWS_AS(eval_matrix(sys, v2(0, 0), v1(0)), Error);
}

TEST_CASE("untruncated plate matrix at unit frequency") {
    PlateParams p;
    p.excised = false;
    auto ps = build_plate_system(p, 2);
    CMat A = eval_matrix(ps.system, v2(0, 0), v2(1, 0));
    CMat E(3, 3);
    E << 1, 1, 0, -1, 0, 1, 0, -1, 0;
    CHECK((A - E).norm() < 1e-14);
}

TEST_CASE("strict order decrease is enforced") {
    auto a = bracket_power_symbol(2.0);
    auto z = constant_symbol(0.0, 1, 2.0);
    CHECK_THROWS_WITH(DNSystem::make({a, z, z, a}, v2(0, 0), v2(2, 2)), "orders not strictly decreasing");
}

TEST_CASE("seminorm examples") {
    SampleGrid g = dyadic_grid(1, -3, 12);
    CHECK(std::abs(estimate_seminorm(bracket_power_symbol(3.0), 0, g).value - 1.0) < 1e-12);
    auto s = make_symbol([](const auto& x, const auto& xi, int n) { return sin(x[0]) * bracket_pow(xi, n, 1.0); }, 1.0,
                         0.0, SymbolKind::variable, 1);
    SampleGrid gx = dyadic_grid(1, 0, 4, 2, 64);
    double v = estimate_seminorm(s, 0, gx).value;
    CHECK(v <= 1.0 + 1e-12);
    CHECK(v > 0.99);

    // k = 1 on a dense xi grid: sup 2|xi|/<xi> -> 2
    SampleGrid dense = dyadic_grid(1, -2, 20);
    double v1s = estimate_seminorm(bracket_power_symbol(2.0), 1, dense).value;
    CHECK(v1s == doctest::Approx(2.0).epsilon(1e-3));
    // monotone in k
    CHECK(estimate_seminorm(bracket_power_symbol(2.0), 2, dense).value >= v1s);
}

TEST_CASE("seminorm grows under grid refinement") {
    auto a = modulated_bracket_symbol(2.0, 2.0, 1.0);
    SampleGrid coarse = dyadic_grid(1, 0, 4, 2, 4);
    SampleGrid fine = dyadic_grid(1, -2, 8, 2, 16);
    CHECK(estimate_seminorm(a, 1, coarse).value <= estimate_seminorm(a, 1, fine).value + 1e-12);
}

TEST_CASE("analytic derivatives agree with finite differences") {
    auto a = modulated_bracket_symbol(2.0, 2.0, 1.0);
    RVec x = v1(0.4), xi = v1(3.0);
    Jet exact = symbol_jet(a, x, xi, 2);
    Jet fd = finite_difference_jet(a, x, xi, 2);
    for (int k = 0; k < exact.space().size(); ++k) CHECK(std::abs(exact.coeff(k) - fd.coeff(k)) < 1e-4 * (1 + std::abs(exact.coeff(k))));
    // (0,0) entry of the derivative evaluator is the value
    CHECK(std::abs(a.derivative_evaluator({0, 0}, {0, 0}, x, xi) - a(x, xi)) < 1e-14);
}

TEST_CASE("truncated Leibniz products") {
    auto a1 = bracket_power_symbol(1.0);
    auto a2 = bracket_power_symbol(2.0, cplx(0.0, 1.0));
    for (int N = 1; N <= 3; ++N) {
        auto c = leibniz_compose_truncated(a1, a2, N);
        CHECK(c.order == doctest::Approx(3.0));
        for (double s : {0.0, 1.5, 40.0})
            CHECK(std::abs(c(v1(0.2), v1(s)) - a1(v1(0.2), v1(s)) * a2(v1(0.2), v1(s))) < 1e-12 * std::pow(1 + s, 3));
    }
    auto xi1 = make_symbol([](const auto&, const auto& xi, int) { return xi[0]; }, 1.0, 0.0, SymbolKind::constant_coefficient, 1);
    auto x1 = make_symbol([](const auto& x, const auto&, int) { return x[0]; }, 0.0, 0.0, SymbolKind::variable, 1);
    auto c2 = leibniz_compose_truncated(xi1, x1, 2);
    CHECK(std::abs(c2(v1(0.7), v1(3.0)) - cplx(2.1, -1.0)) < 1e-12);
    auto c1 = leibniz_compose_truncated(xi1, x1, 1);
    CHECK(std::abs(c1(v1(0.7), v1(3.0)) - 2.1) < 1e-12);
}

TEST_CASE("entries stay bounded against their DN weight") {
    PlateParams p;
    auto ps = build_plate_system(p);
    double worst = 0.0;
    for (int k = 0; k <= 14; ++k) {
        RVec xi = v1(std::ldexp(1.0, k));
        CMat A = eval_matrix(ps.system, v1(0), xi);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                worst = std::max(worst, std::abs(A(i, j)) / std::pow(bracket(xi), ps.orders.l[i] + ps.orders.m[j]));
    }
    CHECK(worst <= 1.0 + 1e-12);
}

TEST_CASE("constant symbols ignore x") {
    auto a = bracket_power_symbol(1.5, 2.0, 2);
    CHECK(std::abs(a(v2(0.1, 0.2), v2(3, 4)) - a(v2(5, -1), v2(3, 4))) == 0.0);
}
