#include "doctest.h"
#include "dnsys/discretize.hpp"
#include "dnsys/numerics.hpp"
#include "dnsys/thermoplate.hpp"

#include <cmath>

using namespace dnsys;

namespace {
DNSystem scalar(const ScalarSymbol& a) { return DNSystem::make({a}, RVec::Zero(1), RVec::Constant(1, a.order)); }

CVec random_field(CounterRng& rng, int size) {
    CVec u(size);
    for (int i = 0; i < size; ++i) u[i] = rng.complex_normal();
    return u;
}
}  // namespace

TEST_CASE("torus grid frequencies") {
    auto g = TorusGrid::make(1, 8, 2.0);
    CHECK(g.size() == 8);
    CHECK(g.freqs[1][0] == doctest::Approx(0.5));
    CHECK(g.freqs[4][0] == doctest::Approx(-2.0));
    CHECK(g.freqs[7][0] == doctest::Approx(-0.5));
    CHECK(g.points[1][0] == doctest::Approx(2.0 * kPi * 2.0 / 8));
    CHECK_THROWS_AS(TorusGrid::make(1, 12), Error);
    auto g2 = TorusGrid::make(2, 4);
    CHECK(g2.size() == 16);
}

TEST_CASE("apply_pdo examples") {
    auto g = TorusGrid::make(1, 16);
    CounterRng rng(3);
    CVec u = random_field(rng, 16);
    CHECK((apply_pdo(constant_symbol(1.0), g, u) - u).norm() < 1e-13);

    CVec e(16);
    for (int a = 0; a < 16; ++a) e[a] = std::polar(1.0, g.points[a][0]);
    CHECK((apply_pdo(bracket_power_symbol(2.0), g, e) - 2.0 * e).norm() < 1e-12);

    auto sinx = make_symbol([](const auto& x, const auto&, int) { return sin(x[0]); }, 0.0, 0.0, SymbolKind::variable, 1);
    CVec v = apply_pdo(sinx, g, u);
    for (int a = 0; a < 16; ++a) CHECK(std::abs(v[a] - std::sin(g.points[a][0]) * u[a]) < 1e-12);
}

TEST_CASE("dense assembly") {
    auto g2 = TorusGrid::make(1, 2);
    auto id = assemble_dense(scalar(constant_symbol(1.0)), g2);
    CHECK((id.matrix - CMat::Identity(2, 2)).norm() < 1e-14);

    auto g = TorusGrid::make(1, 16);
    PlateParams p;
    auto plate = build_plate_system(p);
    auto op = assemble_dense(plate.system, g, 1.0);
    CMat T = op.F * op.matrix * op.F.adjoint();
    const int M = g.size();
    double off = 0.0;
    for (int r = 0; r < 3 * M; ++r)
        for (int c = 0; c < 3 * M; ++c)
            if (r % M != c % M) off += std::norm(T(r, c));
    CHECK(std::sqrt(off) <= 1e-10 * T.norm());

    auto var = scalar(modulated_bracket_symbol(2.0, 2.0, 1.0));
    auto opv = assemble_dense(var, g);
    CounterRng rng(5);
    for (int t = 0; t < 10; ++t) {
        CVec u = random_field(rng, M);
        CHECK((opv.matrix * u - apply_pdo(var, g, u)).norm() <= 1e-10 * (opv.matrix * u).norm());
    }
    CHECK_THROWS_AS(assemble_dense(var, TorusGrid::make(1, 64), 0.0, nullptr, 0.0, 32), Error);
}

TEST_CASE("weighted norm duality") {
    auto g = TorusGrid::make(1, 16);
    PlateParams p;
    auto plate = build_plate_system(p);
    auto op = assemble_dense(plate.system, g, 1.0);
    CMat R = (op.matrix + 3.0 * CMat::Identity(op.matrix.rows(), op.matrix.cols())).inverse();
    CHECK(weighted_norm(op, R) == doctest::Approx(weighted_norm_gram(op, R)).epsilon(1e-10));
}

TEST_CASE("resolvent of a scalar multiplier is diagonal in Fourier space") {
    auto g = TorusGrid::make(1, 32);
    auto op = assemble_dense(scalar(bracket_power_symbol(2.0)), g);
    const Sector s{kPi / 2};
    auto lams = sweep_lambdas(s, -2, 8);
    auto r = resolvent_sweep(op, s, lams);
    REQUIRE(r.rows.size() == lams.size());
    for (const auto& row : r.rows) {
        double mn = 1e300;
        for (const auto& xi : g.freqs) mn = std::min(mn, std::abs(1.0 + xi.squaredNorm() - row.lambda));
        CHECK(row.norm == doctest::Approx(1.0 / mn).epsilon(1e-8));
        CHECK(row.norm_times_bracket == doctest::Approx(lambda_bracket(row.lambda) / mn).epsilon(1e-8));
    }
    CHECK(r.singular_count == 0);
}

TEST_CASE("singular points are findings, not exceptions") {
    auto g = TorusGrid::make(1, 8);
    auto op = assemble_dense(scalar(bracket_power_symbol(2.0, -1.0)), g);
    auto r = resolvent_sweep(op, Sector{kPi / 2}, {cplx(-2.0)});
    CHECK(r.singular_count == 1);
}

TEST_CASE("shifted plate resolvent") {
    PlateParams p;
    auto plate = build_plate_system(p);
    const Sector s{kPi / 2};
    auto lams = sweep_lambdas(s, 0, 19);
    auto r32 = resolvent_sweep(assemble_dense(plate.system, TorusGrid::make(1, 32), 1.0), s, lams);
    auto r64 = resolvent_sweep(assemble_dense(plate.system, TorusGrid::make(1, 64), 1.0), s, lams);
    CHECK(std::isfinite(r32.max_weighted));
    CHECK(std::abs(r64.max_weighted - r32.max_weighted) <= 0.25 * r32.max_weighted);

    auto ray = resolvent_sweep(assemble_dense(plate.system, TorusGrid::make(1, 32), 1.0), s, ray_lambdas(-1.0, 16, 22));
    CHECK(sweep_slope(ray) == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("parametrix against the discrete resolvent") {
    auto g = TorusGrid::make(1, 32);
    const Sector s{3 * kPi / 4};
    auto lams = ray_lambdas(-1.0, 2, 16);
    auto c = parametrix_vs_resolvent(scalar(bracket_power_symbol(2.0)), g, s, 2, lams);
    for (const auto& row : c.rows) CHECK(row.diff_norm <= 1e-12 * row.resolvent_norm);

    auto var = scalar(modulated_bracket_symbol(2.0, 2.0, 1.0));
    auto r = parametrix_vs_resolvent(var, g, s, 2, lams);
    CHECK(r.fitted_slope <= -1.25);
    CHECK(r.epsilon_read >= 0.25);

    auto K = make_perturbation(var, g, 1.0, 0.5, 7);
    CHECK(K.phi_max > 0.0);
    auto rk = parametrix_vs_resolvent(var, g, s, 2, lams, &K);
    CHECK(rk.epsilon_read > 0.0);
}

TEST_CASE("perturbation blocks are bounded with the shifted weights") {
    auto g = TorusGrid::make(1, 16);
    PlateParams p;
    auto plate = build_plate_system(p);
    auto K = make_perturbation(plate.system, g, 1.0, 0.2, 9);
    auto op = assemble_dense(plate.system, g, 1.0);
    CHECK(std::isfinite(weighted_norm(op, K.matrix)));
    auto K2 = make_perturbation(plate.system, g, 1.0, 0.2, 9);
    CHECK((K.matrix - K2.matrix).norm() == 0.0);
}
