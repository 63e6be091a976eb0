#include "dnsys/diagonalize.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dnsys/numerics.hpp"

namespace dnsys {

ReducedSystem reduce_orders(const DNSystem& sys, int Nc) {
    if (Nc < 1) throw Error(ErrorKind::input, "Leibniz truncation must be >= 1");
    ReducedSystem red;
    red.base = &sys;
    red.l = sys.l;
    red.Nc = Nc;
    const int q = sys.q, n = sys.dim;
    std::vector<ScalarSymbol> entries;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            ScalarSymbol left = bracket_power_symbol(-sys.l[i], 1.0, n);
            ScalarSymbol right = bracket_power_symbol(sys.l[j], 1.0, n);
            left.delta = right.delta = sys.delta;
            ScalarSymbol inner = leibniz_compose_truncated(sys(i, j), right, Nc);
            ScalarSymbol b = leibniz_compose_truncated(left, inner, Nc);
            b.label = "b" + std::to_string(i + 1) + std::to_string(j + 1);
            entries.push_back(std::move(b));
        }
    red.sys = DNSystem::make(std::move(entries), RVec::Zero(q), sys.r(), sys.delta);
    return red;
}

namespace {

template <class T>
using Mat = std::vector<T>;  // row-major q x q

double mag(const cplx& v) { return std::abs(v); }
double mag(const Jet& v) { return std::abs(v.value()); }

cplx zero_like(const cplx&) { return 0.0; }
Jet zero_like(const Jet& j) { return Jet(j.space(), 0.0); }

// solve the leading k x k block of B: B[k] y = rhs (Gaussian elimination with partial pivoting)
template <class T>
std::vector<T> solve_block(const Mat<T>& B, int q, int k, std::vector<T> rhs) {
    Mat<T> M(static_cast<size_t>(k) * k, zero_like(B[0]));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M[i * k + j] = B[i * q + j];
    double scale = 0.0;
    for (const auto& v : M) scale = std::max(scale, mag(v));
    for (int c = 0; c < k; ++c) {
        int p = c;
        for (int r = c + 1; r < k; ++r)
            if (mag(M[r * k + c]) > mag(M[p * k + c])) p = r;
        if (!(mag(M[p * k + c]) > 1e-13 * scale))
            throw Error(ErrorKind::singularity, "singular principal minor of order " + std::to_string(k));
        if (p != c) {
            for (int j = 0; j < k; ++j) std::swap(M[c * k + j], M[p * k + j]);
            std::swap(rhs[c], rhs[p]);
        }
        T inv = cplx(1.0) / M[c * k + c];
        for (int r = c + 1; r < k; ++r) {
            T f = M[r * k + c] * inv;
            for (int j = c; j < k; ++j) M[r * k + j] = M[r * k + j] - f * M[c * k + j];
            rhs[r] = rhs[r] - f * rhs[c];
        }
    }
    for (int c = k - 1; c >= 0; --c) {
        T acc = rhs[c];
        for (int j = c + 1; j < k; ++j) acc = acc - M[c * k + j] * rhs[j];
        rhs[c] = acc / M[c * k + c];
    }
    return rhs;
}

// Column j of the truncated equations. Leading: rhs = column j of B, S0/d0 unused.
// Correction: rhs = column j of the residual, with the -S0_ij dd coupling below the diagonal.
template <class T>
void column_solve(const Mat<T>& B, int q, int j, const std::vector<T>& rhs, bool correction, const Mat<T>* S0,
                  const std::vector<T>* d0, Mat<T>& S, std::vector<T>& d) {
    const T zero = zero_like(B[0]);
    std::vector<T> y;
    if (j > 0) {
        std::vector<T> r(j, zero);
        for (int i = 0; i < j; ++i) r[i] = zero - rhs[i];
        y = solve_block(B, q, j, r);
    }
    T dj = rhs[j];
    for (int m = 0; m < j; ++m) dj = dj + B[j * q + m] * y[m];
    d[j] = dj;
    for (int m = 0; m < j; ++m) S[m * q + j] = y[m];
    S[j * q + j] = correction ? zero : zero + cplx(1.0);
    const T& denom = correction ? (*d0)[j] : dj;
    if (j + 1 < q && !(mag(denom) > 0.0)) throw Error(ErrorKind::singularity, "vanishing diagonal quotient");
    for (int i = j + 1; i < q; ++i) {
        T acc = rhs[i];
        for (int m = 0; m < j; ++m) acc = acc + B[i * q + m] * y[m];
        if (correction) acc = acc - (*S0)[i * q + j] * dj;
        S[i * q + j] = acc / denom;
    }
}

template <class T>
void leading(const Mat<T>& B, int q, Mat<T>& S, std::vector<T>& d) {
    S.assign(static_cast<size_t>(q) * q, zero_like(B[0]));
    d.assign(q, zero_like(B[0]));
    for (int j = 0; j < q; ++j) {
        std::vector<T> rhs(q, zero_like(B[0]));
        for (int i = 0; i < q; ++i) rhs[i] = B[i * q + j];
        column_solve(B, q, j, rhs, false, static_cast<const Mat<T>*>(nullptr),
                     static_cast<const std::vector<T>*>(nullptr), S, d);
    }
}

template <class T>
void correction(const Mat<T>& B, int q, const Mat<T>& E, const Mat<T>& S0, const std::vector<T>& d0, Mat<T>& dS,
                std::vector<T>& dd) {
    dS.assign(static_cast<size_t>(q) * q, zero_like(B[0]));
    dd.assign(q, zero_like(B[0]));
    for (int j = 0; j < q; ++j) {
        std::vector<T> rhs(q, zero_like(B[0]));
        for (int i = 0; i < q; ++i) rhs[i] = E[i * q + j];
        column_solve(B, q, j, rhs, true, &S0, &d0, dS, dd);
    }
}

Mat<cplx> to_mat(const CMat& A) {
    const int q = static_cast<int>(A.rows());
    Mat<cplx> M(static_cast<size_t>(q) * q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) M[i * q + j] = A(i, j);
    return M;
}

CMat from_mat(const Mat<cplx>& M, int q) {
    CMat A(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) A(i, j) = M[i * q + j];
    return A;
}

CVec from_vec(const std::vector<cplx>& v) {
    CVec out(static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

PointDiagonalization eigen_closure(const CMat& B, const CVec& d0) {
    const int q = static_cast<int>(B.rows());
    Eigen::ComplexEigenSolver<CMat> es(B);
    std::vector<int> perm(q), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (int j = 0; j < q; ++j) c += std::abs(es.eigenvalues()[perm[j]] - d0[j]) / (std::abs(d0[j]) + 1e-300);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    PointDiagonalization P;
    P.S = CMat(q, q);
    P.d = CVec(q);
    for (int j = 0; j < q; ++j) {
        CVec v = es.eigenvectors().col(best[j]);
        if (!(std::abs(v[j]) > 1e-14 * v.norm()))
            throw Error(ErrorKind::singularity, "eigenvector cannot be normalized at its diagonal index");
        P.S.col(j) = v / v[j];
        P.d[j] = es.eigenvalues()[best[j]];
    }
    P.eigen_fallback = true;
    P.S_terms = {P.S};
    P.D_terms = {P.d};
    return P;
}

}  // namespace

LeadingColumn leading_column(const CMat& B, int j) {
    const int q = static_cast<int>(B.rows());
    if (j < 0 || j >= q) throw Error(ErrorKind::input, "column index out of range");
    Mat<cplx> M = to_mat(B), S(static_cast<size_t>(q) * q, 0.0);
    std::vector<cplx> d(q, 0.0), rhs(q);
    for (int i = 0; i < q; ++i) rhs[i] = B(i, j);
    column_solve(M, q, j, rhs, false, static_cast<const Mat<cplx>*>(nullptr),
                 static_cast<const std::vector<cplx>*>(nullptr), S, d);
    LeadingColumn c;
    c.s = from_mat(S, q).col(j);
    c.d = d[j];
    return c;
}

PointDiagonalization leading_diagonalization(const CMat& B) {
    const int q = static_cast<int>(B.rows());
    Mat<cplx> S;
    std::vector<cplx> d;
    leading(to_mat(B), q, S, d);
    PointDiagonalization P;
    P.S = from_mat(S, q);
    P.d = from_vec(d);
    P.S_terms = {P.S};
    P.D_terms = {P.d};
    return P;
}

PointDiagonalization closed_diagonalization(const CMat& B, double tol, int max_iter) {
    const int q = static_cast<int>(B.rows());
    PointDiagonalization P = leading_diagonalization(B);
    const CVec d0 = P.d;
    const double bn = B.norm();
    Mat<cplx> Bm = to_mat(B);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        CMat E = B * P.S - P.S * P.d.asDiagonal();
        double en = E.norm();
        if (!std::isfinite(en)) break;
        if (en <= tol * bn) {
            P.iterations = it;
            return P;
        }
        if (it > 8 && en > 0.9 * prev) break;
        prev = en;
        Mat<cplx> dS;
        std::vector<cplx> dd;
        correction(Bm, q, to_mat(E), to_mat(P.S), std::vector<cplx>(P.d.data(), P.d.data() + q), dS, dd);
        CMat dSm = from_mat(dS, q);
        CVec ddv = from_vec(dd);
        P.S += dSm;
        P.d += ddv;
        P.S_terms.push_back(dSm);
        P.D_terms.push_back(ddv);
    }
    PointDiagonalization F = eigen_closure(B, d0);
    F.iterations = max_iter;
    return F;
}

namespace {

Mat<Jet> leibniz_product(const Mat<Jet>& X, const Mat<Jet>& Y, int q, int n, int Nc, int target) {
    const JetSpace& sp = JetSpace::get(2 * n, target);
    Mat<Jet> Z(static_cast<size_t>(q) * q, Jet(sp, 0.0));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            for (int m = 0; m < q; ++m) Z[i * q + j] += leibniz_jet(X[i * q + m], Y[m * q + j], n, Nc, target);
    return Z;
}

Mat<Jet> diag_mat(const std::vector<Jet>& d) {
    const int q = static_cast<int>(d.size());
    Mat<Jet> D(static_cast<size_t>(q) * q, Jet(d[0].space(), 0.0));
    for (int j = 0; j < q; ++j) D[j * q + j] = d[j];
    return D;
}

template <class V>
V truncate_all(const V& v, int order) {
    V out;
    for (const auto& e : v) out.push_back(e.truncate(order));
    return out;
}

}  // namespace

VariableDiagonalization diagonalize_at(const ReducedSystem& red, const RVec& x, const RVec& xi, int N) {
    if (N < 1 || N > 2) throw Error(ErrorKind::capability, "corrections are implemented for N in {1, 2}");
    const int q = red.sys.q, n = red.sys.dim, step = red.Nc - 1;
    int order = N * step;
    Mat<Jet> B;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) B.push_back(symbol_jet(red.sys(i, j), x, xi, order));
    Mat<Jet> S;
    std::vector<Jet> d;
    leading(B, q, S, d);
    VariableDiagonalization out;
    auto value_mat = [q](const Mat<Jet>& M) {
        CMat A(q, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) A(i, j) = M[i * q + j].value();
        return A;
    };
    auto value_vec = [q](const std::vector<Jet>& v) {
        CVec a(q);
        for (int i = 0; i < q; ++i) a[i] = v[i].value();
        return a;
    };
    out.S_terms.push_back(value_mat(S));
    out.D_terms.push_back(value_vec(d));
    for (int stage = 1; stage <= N; ++stage) {
        int target = order - step;
        Mat<Jet> E = leibniz_product(B, S, q, n, red.Nc, target);
        Mat<Jet> SD = leibniz_product(S, diag_mat(d), q, n, red.Nc, target);
        for (size_t k = 0; k < E.size(); ++k) E[k] -= SD[k];
        B = truncate_all(B, target);
        S = truncate_all(S, target);
        d = truncate_all(d, target);
        order = target;
        if (stage == N) {
            out.residual = value_mat(E);
            break;
        }
        Mat<Jet> dS;
        std::vector<Jet> dd;
        correction(B, q, E, S, d, dS, dd);
        out.S_terms.push_back(value_mat(dS));
        out.D_terms.push_back(value_vec(dd));
        for (size_t k = 0; k < S.size(); ++k) S[k] += dS[k];
        for (int j = 0; j < q; ++j) d[j] += dd[j];
    }
    out.S = value_mat(S);
    out.d = value_vec(d);
    return out;
}

DiagProbe offdiag_decay_probe(const ReducedSystem& red, int N, const DiagProbeConfig& cfg) {
    const int q = red.sys.q, n = red.sys.dim;
    const bool constant = red.sys.constant_coefficient();
    DiagProbe P;
    P.N = N;
    RVec r = red.sys.r();
    std::vector<double> brs, prof;
    for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
        RVec xi = RVec::Zero(n);
        xi[0] = std::ldexp(1.0, k);
        const double br = bracket(xi);
        double vmax = 0.0;
        if (constant) {
            CMat B = eval_matrix(red.sys, RVec::Zero(n), xi);
            PointDiagonalization D = cfg.closure ? closed_diagonalization(B) : leading_diagonalization(B);
            CMat X = D.S.partialPivLu().solve(B * D.S);
            const double bn = B.norm();
            for (int j = 0; j < q; ++j) {
                double off = 0.0;
                for (int i = 0; i < q; ++i)
                    if (i != j) off += std::norm(X(i, j));
                off = std::sqrt(off) / bn;
                P.samples.push_back({xi.norm(), j, std::abs(D.d[j]), off});
                vmax = std::max(vmax, off);
            }
        } else {
            std::vector<double> dmax(q, 0.0), rmax(q, 0.0);
            for (int a = 0; a < cfg.x_points; ++a) {
                RVec x = RVec::Constant(n, 2.0 * kPi * a / cfg.x_points + 0.1);
                VariableDiagonalization V = diagonalize_at(red, x, xi, N);
                for (int j = 0; j < q; ++j) {
                    dmax[j] = std::max(dmax[j], std::abs(V.d[j]));
                    for (int i = 0; i < q; ++i)
                        rmax[j] = std::max(rmax[j], std::abs(V.residual(i, j)) * std::pow(br, -r[j]));
                }
            }
            for (int j = 0; j < q; ++j) {
                P.samples.push_back({xi.norm(), j, dmax[j], rmax[j]});
                vmax = std::max(vmax, rmax[j]);
            }
        }
        brs.push_back(br);
        prof.push_back(vmax);
        P.max_residual = std::max(P.max_residual, vmax);
    }
    bool nz = false;
    for (double v : prof) nz = nz || v > (constant ? 1e-12 : 0.0);
    P.fitted_slope = nz ? fit_loglog(brs, prof).slope : -std::numeric_limits<double>::infinity();
    return P;
}

DiagEllipticity diag_lambda_ellipticity_check(const ReducedSystem& red, const Sector& sector, const SampleGrid& grid,
                                              const EllipticityConfig& cfg) {
    DiagEllipticity out;
    EllipticityReport& rep = out.report;
    rep.mode = EllipticityMode::minors;
    rep.C_lower = std::numeric_limits<double>::infinity();
    const int q = red.sys.q;
    const bool constant = red.sys.constant_coefficient();
    std::vector<RVec> xs = grid.xs;
    if (constant) xs.resize(1);
    const std::vector<cplx> lams = sector.samples(cfg.lambda);
    RVec r = red.sys.r();
    bool any = false;
    for (const auto& xi : grid.xis) {
        if (xi.norm() < 1.0) continue;
        const double br = bracket(xi);
        for (const auto& x : xs) {
            CMat B = eval_matrix(red.sys, x, xi);
            PointDiagonalization D = leading_diagonalization(B);
            for (int j = 0; j < q; ++j) {
                cplx prev = j == 0 ? cplx(1.0) : minor_det(B, 0.0, j);
                for (cplx lam : lams) {
                    any = true;
                    ++rep.samples;
                    double v = std::abs(D.d[j] - lam) / (std::pow(br, r[j]) + std::abs(lam));
                    if (!(v >= rep.C_lower)) {
                        rep.C_lower = v;
                        rep.witness = Witness{x, xi, lam, j + 1};
                    }
                    if (constant) {
                        cplx quot = minor_det(B, lam, j + 1) / prev;
                        double e = std::abs((D.d[j] - lam) - quot) / std::max(std::abs(quot), 1e-300);
                        out.quotient_identity_error = std::max(out.quotient_identity_error, e);
                    }
                }
            }
        }
    }
    if (!any) throw Error(ErrorKind::input, "no xi samples with |xi| >= 1");
    rep.passed = rep.C_lower >= cfg.threshold;
    return out;
}

BackConjugation back_conjugation(const ReducedSystem& red, const RVec& xi) {
    if (!red.sys.constant_coefficient())
        throw Error(ErrorKind::capability, "back-conjugation is provided for constant-coefficient systems only");
    const int q = red.sys.q;
    CMat B = eval_matrix(red.sys, RVec::Zero(red.sys.dim), xi);
    PointDiagonalization D = closed_diagonalization(B);
    const double br = bracket(xi);
    RVec up(q), down(q);
    for (int i = 0; i < q; ++i) {
        up[i] = std::pow(br, red.l[i]);
        down[i] = 1.0 / up[i];
    }
    BackConjugation bc;
    bc.V = up.asDiagonal() * D.S * down.asDiagonal();
    bc.W = checked_inverse(bc.V, 1e14, "back-conjugation").inverse;
    return bc;
}

double conjugator_condition(const ReducedSystem& red, const TorusGrid& g) {
    const int q = red.sys.q;
    if (red.sys.constant_coefficient()) {
        double worst = 0.0;
        bool any = false;
        for (const auto& xi : g.freqs) {
            if (xi.norm() < 1.0) continue;
            CMat B = eval_matrix(red.sys, g.points[0], xi);
            PointDiagonalization D;
            try {
                D = leading_diagonalization(B);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::singularity) continue;
                throw;
            }
            any = true;
            worst = std::max(worst, condition_number(D.S));
        }
        if (!any) throw Error(ErrorKind::singularity, "no frequency admits the leading construction");
        return worst;
    }
    CMat S = quantize(
        g, q,
        [&red](const RVec& x, const RVec& xi) {
            if (xi.norm() < 1.0) return CMat(CMat::Identity(red.sys.q, red.sys.q));
            return leading_diagonalization(eval_matrix(red.sys, x, xi)).S;
        },
        false);
    Eigen::BDCSVD<CMat> svd(S);
    const auto& s = svd.singularValues();
    return s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : std::numeric_limits<double>::infinity();
}

}  // namespace dnsys
