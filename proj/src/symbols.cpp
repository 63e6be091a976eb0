#include "dnsys/symbols.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dnsys {

double ramp(double t) {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return 1.0;
    double u = t - 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

std::vector<MultiIndex> multi_indices(int n, int total) {
    std::vector<MultiIndex> out;
    if (n == 1) {
        out.push_back({total, 0});
    } else {
        for (int a = total; a >= 0; --a) out.push_back({a, total - a});
    }
    return out;
}

double multi_factorial(const MultiIndex& a, int n) {
    double f = 1.0;
    for (int i = 0; i < n; ++i)
        for (int k = 2; k <= a[i]; ++k) f *= k;
    return f;
}

namespace {

double fd_step(int total_order, double base) {
    if (total_order <= 1) return base;
    return std::max(base, std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (total_order + 2)));
}

double binomial(int m, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (m - k + i) / i;
    return b;
}

std::string point_string(const RVec& x, const RVec& xi) {
    std::ostringstream os;
    os << "x=(";
    for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ") xi=(";
    for (int i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
    os << ")";
    return os.str();
}

cplx checked_eval(const ScalarSymbol& a, const RVec& x, const RVec& xi) {
    cplx v = a.evaluator(x, xi);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::evaluation, "non-finite symbol value at " + point_string(x, xi));
    return v;
}

}  // namespace

Jet finite_difference_jet(const ScalarSymbol& a, const RVec& x, const RVec& xi, int order, const FdConfig& fd) {
    if (order > fd.budget)
        throw Error(ErrorKind::capability, "derivative order " + std::to_string(order) + " exceeds the FD budget");
    const int n = a.dim;
    const JetSpace& sp = JetSpace::get(2 * n, order);
    Jet out(sp, 0.0);
    const double br = bracket(xi);
    for (int k = 0; k < sp.size(); ++k) {
        const Mono& mono = sp.mono(k);
        int total = sp.degree(k);
        std::array<double, kMaxJetVars> h{};
        for (int v = 0; v < 2 * n; ++v) {
            h[v] = fd_step(total, v < n ? fd.h_x : fd.h_xi) * (v < n ? 1.0 : br);
            const double pt = v < n ? x[v] : xi[v - n];
            if (mono[v] > 0 && (!(h[v] > 0.0) || pt + h[v] == pt))
                throw Error(ErrorKind::numerical, "finite-difference step underflow at " + point_string(x, xi));
        }
        // tensor product of central m-th differences
        std::array<int, kMaxJetVars> idx{};
        cplx acc = 0.0;
        while (true) {
            RVec px = x, pxi = xi;
            double w = 1.0;
            for (int v = 0; v < 2 * n; ++v) {
                int m = mono[v];
                if (m == 0) continue;
                double off = (0.5 * m - idx[v]) * h[v];
                if (v < n)
                    px[v] += off;
                else
                    pxi[v - n] += off;
                w *= ((idx[v] % 2) ? -1.0 : 1.0) * binomial(m, idx[v]) / std::pow(h[v], m);
            }
            acc += w * checked_eval(a, px, pxi);
            int v = 0;
            for (; v < 2 * n; ++v) {
                if (idx[v] < mono[v]) {
                    ++idx[v];
                    break;
                }
                idx[v] = 0;
            }
            if (v == 2 * n) break;
        }
        double f = 1.0;
        for (int v = 0; v < 2 * n; ++v)
            for (int j = 2; j <= mono[v]; ++j) f *= j;
        out.coeff(k) = acc / f;
    }
    return out;
}

Jet symbol_jet(const ScalarSymbol& a, const RVec& x, const RVec& xi, int order, const FdConfig& fd) {
    const int n = a.dim;
    if (x.size() != n || xi.size() != n) throw Error(ErrorKind::input, "dimension mismatch in symbol evaluation");
    if (!a.has_jet()) return finite_difference_jet(a, x, xi, order, fd);
    const JetSpace& sp = JetSpace::get(2 * n, order);
    Arr2<Jet> jx, jxi;
    for (int i = 0; i < n; ++i) {
        jx[i] = Jet::variable(sp, i, x[i]);
        jxi[i] = Jet::variable(sp, n + i, xi[i]);
    }
    Jet j = a.jet_evaluator(jx, jxi);
    for (int k = 0; k < sp.size(); ++k) {
        cplx c = j.coeff(k);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error(ErrorKind::evaluation, "non-finite symbol derivative at " + point_string(x, xi));
    }
    return j;
}

cplx symbol_derivative(const ScalarSymbol& a, const MultiIndex& alpha, const MultiIndex& beta, const RVec& x,
                       const RVec& xi, const FdConfig& fd) {
    const int n = a.dim;
    int order = 0;
    for (int i = 0; i < n; ++i) order += alpha[i] + beta[i];
    if (order == 0) return checked_eval(a, x, xi);
    if (a.derivative_evaluator) return a.derivative_evaluator(alpha, beta, x, xi);
    return finite_difference_jet(a, x, xi, order, fd).derivative(jet_mono(n, alpha, beta));
}

ScalarSymbol constant_symbol(cplx c, int n, double order) {
    return make_symbol([c](const auto&, const auto& xi, int) { return lift(xi[0], c); }, order, 0.0,
                       SymbolKind::constant_coefficient, n, "constant");
}

ScalarSymbol bracket_power_symbol(double mu, cplx coeff, int n, cplx shift) {
    return make_symbol(
        [mu, coeff, shift](const auto&, const auto& xi, int dim) { return bracket_pow(xi, dim, mu) * coeff + shift; },
        mu, 0.0, SymbolKind::constant_coefficient, n, "bracket_power");
}

ScalarSymbol modulated_bracket_symbol(double mu, double a0, double a1, int n) {
    return make_symbol(
        [mu, a0, a1](const auto& x, const auto& xi, int dim) {
            using std::sin;
            return (sin(x[0]) * cplx(a1) + cplx(a0)) * bracket_pow(xi, dim, mu);
        },
        mu, 0.0, SymbolKind::variable, n, "modulated_bracket");
}

ScalarSymbol sine_modulated_symbol(double mu, int n) { return modulated_bracket_symbol(mu, 0.0, 1.0, n); }

DNSystem DNSystem::make(std::vector<ScalarSymbol> entries, const RVec& l, const RVec& m, double delta) {
    DNSystem s;
    const int q = static_cast<int>(l.size());
    if (q < 1 || m.size() != q || static_cast<int>(entries.size()) != q * q)
        throw Error(ErrorKind::input, "DN system needs q*q entries and order vectors of length q");
    s.q = q;
    s.l = l;
    s.m = m;
    s.delta = delta;
    s.dim = entries[0].dim;
    if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorKind::input, "delta must lie in [0,1)");
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            const auto& e = entries[i * q + j];
            if (std::abs(e.order - (l[i] + m[j])) > 1e-9)
                throw Error(ErrorKind::input, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                  ") does not have order l_i + m_j");
            if (e.dim != s.dim) throw Error(ErrorKind::input, "entries disagree on the space dimension");
            if (std::abs(e.delta - delta) > 1e-15) throw Error(ErrorKind::input, "entries must share delta");
        }
    }
    RVec r = l + m;
    for (int i = 0; i + 1 < q; ++i)
        if (!(r[i] > r[i + 1])) throw Error(ErrorKind::input, "orders not strictly decreasing");
    if (r[q - 1] < 0.0) throw Error(ErrorKind::input, "diagonal orders must be non-negative");
    s.entries = std::move(entries);
    return s;
}

bool DNSystem::constant_coefficient() const {
    for (const auto& e : entries)
        if (!e.constant()) return false;
    return true;
}

CMat eval_matrix(const DNSystem& sys, const RVec& x, const RVec& xi) {
    if (x.size() != sys.dim || xi.size() != sys.dim)
        throw Error(ErrorKind::input, "dimension mismatch: expected n=" + std::to_string(sys.dim));
    CMat A(sys.q, sys.q);
    for (int i = 0; i < sys.q; ++i)
        for (int j = 0; j < sys.q; ++j) A(i, j) = sys(i, j).evaluator(x, xi);
    return A;
}

CMat eval_matrix_derivative(const DNSystem& sys, const MultiIndex& alpha, const MultiIndex& beta, const RVec& x,
                            const RVec& xi, const FdConfig& fd) {
    CMat A(sys.q, sys.q);
    for (int i = 0; i < sys.q; ++i)
        for (int j = 0; j < sys.q; ++j) A(i, j) = symbol_derivative(sys(i, j), alpha, beta, x, xi, fd);
    return A;
}

DNSystem shifted(const DNSystem& sys, cplx alpha) {
    DNSystem s = sys;
    for (int i = 0; i < sys.q; ++i) {
        ScalarSymbol& e = s.entries[i * sys.q + i];
        ScalarSymbol base = e;
        e.evaluator = [base, alpha](const RVec& x, const RVec& xi) { return base.evaluator(x, xi) + alpha; };
        if (base.jet_evaluator) {
            e.jet_evaluator = [base, alpha](const Arr2<Jet>& x, const Arr2<Jet>& xi) {
                return base.jet_evaluator(x, xi) + alpha;
            };
        }
        // derivatives of positive order are unchanged
        e.derivative_evaluator = [base, alpha](const MultiIndex& a, const MultiIndex& b, const RVec& x,
                                               const RVec& xi) {
            bool zero = true;
            for (int k = 0; k < base.dim; ++k) zero = zero && a[k] == 0 && b[k] == 0;
            cplx v = symbol_derivative(base, a, b, x, xi);
            return zero ? v + alpha : v;
        };
    }
    return s;
}

SampleGrid dyadic_grid(int n, int kmin, int kmax, int directions, int x_per_axis, double period, bool with_origin) {
    SampleGrid g;
    std::vector<RVec> dirs;
    if (n == 1) {
        dirs.push_back(RVec::Constant(1, 1.0));
        dirs.push_back(RVec::Constant(1, -1.0));
    } else {
        for (int d = 0; d < directions; ++d) {
            RVec v(2);
            double t = 2.0 * kPi * d / directions;
            v << std::cos(t), std::sin(t);
            dirs.push_back(v);
        }
    }
    if (with_origin) g.xis.push_back(RVec::Zero(n));
    for (int k = kmin; k <= kmax; ++k)
        for (const auto& d : dirs) g.xis.push_back(std::ldexp(1.0, k) * d);
    if (n == 1) {
        for (int a = 0; a < x_per_axis; ++a) g.xs.push_back(RVec::Constant(1, period * a / x_per_axis));
    } else {
        for (int a = 0; a < x_per_axis; ++a)
            for (int b = 0; b < x_per_axis; ++b) {
                RVec v(2);
                v << period * a / x_per_axis, period * b / x_per_axis;
                g.xs.push_back(v);
            }
    }
    std::ostringstream os;
    os << "dyadic n=" << n << " k=" << kmin << ".." << kmax << " dirs=" << dirs.size() << " x=" << g.xs.size();
    g.descriptor = os.str();
    return g;
}

SeminormEstimate estimate_seminorm(const ScalarSymbol& a, int k, const SampleGrid& grid, const FdConfig& fd) {
    if (k < 0) throw Error(ErrorKind::input, "seminorm order must be non-negative");
    if (grid.xs.empty() || grid.xis.empty()) throw Error(ErrorKind::input, "empty sampling grid");
    const int n = a.dim;
    SeminormEstimate est;
    est.k = k;
    est.grid_used = grid.descriptor;
    std::vector<RVec> xs = grid.xs;
    if (a.constant()) xs.resize(1);
    for (const auto& x : xs) {
        for (const auto& xi : grid.xis) {
            Jet j = symbol_jet(a, x, xi, k, fd);
            const JetSpace& sp = j.space();
            double br = bracket(xi);
            for (int c = 0; c < sp.size(); ++c) {
                const Mono& mono = sp.mono(c);
                int na = 0, nb = 0;
                for (int i = 0; i < n; ++i) {
                    nb += mono[i];
                    na += mono[n + i];
                }
                double w = std::pow(br, -a.order + na - a.delta * nb);
                est.value = std::max(est.value, std::abs(j.derivative(mono)) * w);
            }
        }
    }
    return est;
}

Jet leibniz_jet(const Jet& a1, const Jet& a2, int n, int N, int target_order) {
    const JetSpace& sp = JetSpace::get(2 * n, target_order);
    Jet out(sp, 0.0);
    for (int t = 0; t < N; ++t) {
        for (const auto& al : multi_indices(n, t)) {
            Jet d1 = a1, d2 = a2;
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < al[i]; ++c) {
                    d1 = d1.diff(n + i);
                    d2 = d2.diff(i);
                }
            cplx coef = std::pow(cplx(0.0, -1.0), t) / multi_factorial(al, n);
            out += d1.truncate(target_order) * d2.truncate(target_order) * coef;
        }
    }
    return out;
}

ScalarSymbol leibniz_compose_truncated(const ScalarSymbol& a1, const ScalarSymbol& a2, int N, const FdConfig& fd) {
    if (N < 1) throw Error(ErrorKind::input, "truncation order must be at least 1");
    if (a1.dim != a2.dim) throw Error(ErrorKind::input, "symbols live in different dimensions");
    if (std::abs(a1.delta - a2.delta) > 1e-15) throw Error(ErrorKind::input, "symbols must share delta");
    if ((!a1.has_jet() || !a2.has_jet()) && N - 1 > fd.budget)
        throw Error(ErrorKind::capability, "Leibniz truncation needs derivatives beyond the FD budget");
    ScalarSymbol s;
    s.order = a1.order + a2.order;
    s.delta = a1.delta;
    s.dim = a1.dim;
    s.kind = (a1.constant() && a2.constant()) ? SymbolKind::constant_coefficient : SymbolKind::variable;
    s.label = "leibniz(" + a1.label + "," + a2.label + ")";
    const int n = a1.dim;
    if (s.constant()) N = 1;
    s.evaluator = [a1, a2, N, n, fd](const RVec& x, const RVec& xi) {
        if (N == 1) return a1.evaluator(x, xi) * a2.evaluator(x, xi);
        Jet j1 = symbol_jet(a1, x, xi, N - 1, fd);
        Jet j2 = symbol_jet(a2, x, xi, N - 1, fd);
        return leibniz_jet(j1, j2, n, N, 0).value();
    };
    if (a1.has_jet() && a2.has_jet()) {
        // valid for canonical variable jets: reads the point and the requested order
        s.jet_evaluator = [a1, a2, N, n](const Arr2<Jet>& x, const Arr2<Jet>& xi) {
            int order = x[0].space().order();
            RVec px(n), pxi(n);
            for (int i = 0; i < n; ++i) {
                px[i] = x[i].value().real();
                pxi[i] = xi[i].value().real();
            }
            Jet j1 = symbol_jet(a1, px, pxi, order + N - 1);
            Jet j2 = symbol_jet(a2, px, pxi, order + N - 1);
            return leibniz_jet(j1, j2, n, N, order);
        };
        s.derivative_evaluator = [s_jet = s.jet_evaluator, n](const MultiIndex& alpha, const MultiIndex& beta,
                                                              const RVec& x, const RVec& xi) {
            int order = 0;
            for (int i = 0; i < n; ++i) order += alpha[i] + beta[i];
            const JetSpace& sp = JetSpace::get(2 * n, order);
            Arr2<Jet> jx, jxi;
            for (int i = 0; i < n; ++i) {
                jx[i] = Jet::variable(sp, i, x[i]);
                jxi[i] = Jet::variable(sp, n + i, xi[i]);
            }
            return s_jet(jx, jxi).derivative(jet_mono(n, alpha, beta));
        };
    }
    return s;
}

}  // namespace dnsys
