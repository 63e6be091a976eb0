#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dnsys/jet.hpp"
#include "dnsys/types.hpp"

namespace dnsys {

using MultiIndex = std::array<int, 2>;

enum class SymbolKind { constant_coefficient, variable };

template <class T>
using Arr2 = std::array<T, 2>;

struct FdConfig {
    double h_xi = 1e-4;  // relative to <xi>
    double h_x = 1e-4;   // absolute
    int budget = 4;      // max |alpha|+|beta|
};

// Scalar symbol a(x, xi) on R^n x R^n, n in {1, 2}.
struct ScalarSymbol {
    std::function<cplx(const RVec& x, const RVec& xi)> evaluator;
    std::function<Jet(const Arr2<Jet>& x, const Arr2<Jet>& xi)> jet_evaluator;
    std::function<cplx(const MultiIndex& alpha, const MultiIndex& beta, const RVec& x, const RVec& xi)>
        derivative_evaluator;
    double order = 0.0;
    double delta = 0.0;
    SymbolKind kind = SymbolKind::variable;
    int dim = 1;
    std::string label;

    cplx operator()(const RVec& x, const RVec& xi) const { return evaluator(x, xi); }
    bool constant() const { return kind == SymbolKind::constant_coefficient; }
    bool has_jet() const { return static_cast<bool>(jet_evaluator); }
};

// Jet of all mixed derivatives up to total order K. Variable order is
// (x_1..x_n, xi_1..xi_n). Uses the analytic jet when present, finite
// differences otherwise.
Jet symbol_jet(const ScalarSymbol& a, const RVec& x, const RVec& xi, int order, const FdConfig& fd = {});
Jet finite_difference_jet(const ScalarSymbol& a, const RVec& x, const RVec& xi, int order, const FdConfig& fd = {});

cplx symbol_derivative(const ScalarSymbol& a, const MultiIndex& alpha, const MultiIndex& beta, const RVec& x,
                       const RVec& xi, const FdConfig& fd = {});

inline Mono jet_mono(int n, const MultiIndex& alpha, const MultiIndex& beta) {
    Mono m{};
    for (int i = 0; i < n; ++i) {
        m[i] = beta[i];
        m[n + i] = alpha[i];
    }
    return m;
}

// Build a symbol from a generic callable f(x, xi, n) usable with T = cplx and T = Jet.
template <class F>
ScalarSymbol make_symbol(F f, double order, double delta, SymbolKind kind, int n, std::string label = {}) {
    ScalarSymbol s;
    s.order = order;
    s.delta = delta;
    s.kind = kind;
    s.dim = n;
    s.label = std::move(label);
    s.evaluator = [f, n](const RVec& x, const RVec& xi) {
        Arr2<cplx> ax{}, axi{};
        for (int i = 0; i < n; ++i) {
            ax[i] = x[i];
            axi[i] = xi[i];
        }
        return f(ax, axi, n);
    };
    s.jet_evaluator = [f, n](const Arr2<Jet>& x, const Arr2<Jet>& xi) { return f(x, xi, n); };
    s.derivative_evaluator = [n, jf = s.jet_evaluator](const MultiIndex& alpha, const MultiIndex& beta,
                                                       const RVec& x, const RVec& xi) {
        int order = 0;
        for (int i = 0; i < n; ++i) order += alpha[i] + beta[i];
        const JetSpace& sp = JetSpace::get(2 * n, order);
        Arr2<Jet> jx, jxi;
        for (int i = 0; i < n; ++i) {
            jx[i] = Jet::variable(sp, i, x[i]);
            jxi[i] = Jet::variable(sp, n + i, xi[i]);
        }
        return jf(jx, jxi).derivative(jet_mono(n, alpha, beta));
    };
    return s;
}

// helpers for generic symbol bodies
inline cplx lift(const cplx&, cplx c) { return c; }
inline Jet lift(const Jet& like, cplx c) { return Jet(like.space(), c); }

template <class T>
T squared_norm(const Arr2<T>& v, int n) {
    T s = v[0] * v[0];
    for (int i = 1; i < n; ++i) s = s + v[i] * v[i];
    return s;
}

// <xi>^t
template <class T>
T bracket_pow(const Arr2<T>& xi, int n, double t) {
    using std::pow;
    return pow(squared_norm(xi, n) + cplx(1.0), 0.5 * t);
}

// |xi|^p, with the value 0 at xi = 0 for p > 0
template <class T>
T norm_pow(const Arr2<T>& xi, int n, double p) {
    using std::pow;
    T s = squared_norm(xi, n);
    if (std::abs(value_of(s)) == 0.0) return lift(xi[0], p == 0.0 ? 1.0 : 0.0);
    return pow(s, 0.5 * p);
}

// quintic smoothstep: 0 for t <= 1, 1 for t >= 2
template <class T>
T ramp(const T& t) {
    double tv = value_of(t).real();
    if (tv <= 1.0) return lift(t, 0.0);
    if (tv >= 2.0) return lift(t, 1.0);
    T u = t - cplx(1.0);
    return u * u * u * (cplx(10.0) + u * (cplx(-15.0) + u * cplx(6.0)));
}
double ramp(double t);

template <class T>
T excision(const Arr2<T>& xi, int n, double eps = 1.0) {
    using std::sqrt;
    T s = squared_norm(xi, n);
    if (value_of(s).real() * eps * eps <= 1.0) return lift(xi[0], 0.0);
    return ramp(sqrt(s) * cplx(eps));
}

// built-in families
ScalarSymbol constant_symbol(cplx c, int n = 1, double order = 0.0);
ScalarSymbol bracket_power_symbol(double mu, cplx coeff = 1.0, int n = 1, cplx shift = 0.0);
// (a0 + a1 sin x_1) <xi>^mu
ScalarSymbol modulated_bracket_symbol(double mu, double a0, double a1, int n = 1);
// sin(x_1) <xi>^mu with order mu
ScalarSymbol sine_modulated_symbol(double mu, int n = 1);

struct DNSystem {
    int q = 0;
    int dim = 1;
    std::vector<ScalarSymbol> entries;  // row-major
    RVec l, m;
    double delta = 0.0;

    static DNSystem make(std::vector<ScalarSymbol> entries, const RVec& l, const RVec& m, double delta = 0.0);

    RVec r() const { return l + m; }
    const ScalarSymbol& operator()(int i, int j) const { return entries[i * q + j]; }
    bool constant_coefficient() const;
};

CMat eval_matrix(const DNSystem& sys, const RVec& x, const RVec& xi);

// Matrix of derivatives d_xi^alpha d_x^beta A at one point.
CMat eval_matrix_derivative(const DNSystem& sys, const MultiIndex& alpha, const MultiIndex& beta, const RVec& x,
                            const RVec& xi, const FdConfig& fd = {});

// Add alpha to each diagonal entry.
DNSystem shifted(const DNSystem& sys, cplx alpha);

struct SampleGrid {
    std::vector<RVec> xs;
    std::vector<RVec> xis;
    std::string descriptor;
};

// dyadic shells |xi| = 2^k for k in [kmin, kmax] (plus xi = 0 when with_origin),
// 2 directions for n = 1, `directions` for n = 2; x on a uniform torus lattice.
SampleGrid dyadic_grid(int n, int kmin, int kmax, int directions = 8, int x_per_axis = 16,
                       double period = 2.0 * kPi, bool with_origin = true);

struct SeminormEstimate {
    int k = 0;
    double value = 0.0;
    std::string grid_used;
};

SeminormEstimate estimate_seminorm(const ScalarSymbol& a, int k, const SampleGrid& grid, const FdConfig& fd = {});

ScalarSymbol leibniz_compose_truncated(const ScalarSymbol& a1, const ScalarSymbol& a2, int N,
                                       const FdConfig& fd = {});

// Leibniz product truncated at |alpha| < N acting on jets; inputs must carry order
// at least target + N - 1. Variables are (x..., xi...) with dimension n.
Jet leibniz_jet(const Jet& a1, const Jet& a2, int n, int N, int target_order);

std::vector<MultiIndex> multi_indices(int n, int total);
double multi_factorial(const MultiIndex& a, int n);

}  // namespace dnsys
