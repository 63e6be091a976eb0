#include "dnsys/parametrix.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dnsys {

TermTree TermTree::identity_g0() {
    TermTree t;
    t.words[{}] = 1.0;
    return t;
}

void TermTree::add(const TermTree& o, cplx c) {
    for (const auto& [w, v] : o.words) words[w] += c * v;
}

TermTree TermTree::d_xi(int axis) const {
    TermTree out;
    for (const auto& [w, c] : words) {
        DerivKey e{};
        e.alpha[axis] = 1;
        // d G0 = -G0 (d A) G0 at each of the k+1 G0 positions
        for (size_t p = 0; p <= w.size(); ++p) {
            std::vector<DerivKey> nw = w;
            nw.insert(nw.begin() + static_cast<long>(p), e);
            out.words[nw] -= c;
        }
        for (size_t p = 0; p < w.size(); ++p) {
            std::vector<DerivKey> nw = w;
            nw[p].alpha[axis] += 1;
            out.words[nw] += c;
        }
    }
    return out;
}

TermTree TermTree::d_xi(const MultiIndex& alpha, int n) const {
    TermTree t = *this;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < alpha[i]; ++c) t = t.d_xi(i);
    return t;
}

TermTree TermTree::append(const DerivKey& f, cplx c) const {
    TermTree out;
    for (const auto& [w, v] : words) {
        std::vector<DerivKey> nw = w;
        nw.push_back(f);
        out.words[nw] += c * v;
    }
    return out;
}

int TermTree::max_factors() const {
    int k = 0;
    for (const auto& [w, v] : words) k = std::max(k, static_cast<int>(w.size()));
    return k;
}

namespace {

std::string point_desc(const RVec& x, const RVec& xi, cplx lambda) {
    std::ostringstream os;
    os << "x=(";
    for (int i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << ") xi=(";
    for (int i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
    os << ") lambda=" << lambda.real() << (lambda.imag() < 0 ? "" : "+") << lambda.imag() << "i";
    return os.str();
}

}  // namespace

PointContext::PointContext(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda, double cond_cap)
    : sys_(&sys), x_(x), xi_(xi) {
    A_ = eval_matrix(sys, x, xi);
    CMat M = A_;
    M.diagonal().array() -= lambda;
    g0_ = checked_inverse(M, cond_cap, point_desc(x, xi, lambda)).inverse;
}

const CMat& PointContext::deriv(const DerivKey& k) {
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(k, eval_matrix_derivative(*sys_, k.alpha, k.beta, x_, xi_)).first->second;
}

CMat PointContext::eval(const TermTree& t) {
    const int q = static_cast<int>(g0_.rows());
    CMat out = CMat::Zero(q, q);
    for (const auto& [w, c] : t.words) {
        if (c == cplx(0.0)) continue;
        CMat M = g0_;
        for (const auto& f : w) M = (M * deriv(f)) * g0_;
        out += c * M;
    }
    return out;
}

CMat g0_eval(const DNSystem& sys, const RVec& x, const RVec& xi, cplx lambda, double cond_cap) {
    return PointContext(sys, x, xi, lambda, cond_cap).g0();
}

std::vector<ParametrixTerm> build_terms(int n, int nu_max) {
    std::vector<ParametrixTerm> terms(nu_max + 1);
    terms[0].tree = TermTree::identity_g0();
    for (int nu = 1; nu <= nu_max; ++nu) {
        ParametrixTerm& t = terms[nu];
        t.nu = nu;
        for (int m = 0; m < nu; ++m) {
            for (const auto& al : multi_indices(n, nu - m)) {
                t.records.push_back({m, al});
                cplx coef = -std::pow(cplx(0.0, -1.0), nu - m) / multi_factorial(al, n);
                DerivKey f{};
                f.beta = al;
                t.tree.add(terms[m].tree.d_xi(al, n).append(f, coef));
            }
        }
    }
    return terms;
}

CMat gnu_eval(const DNSystem& sys, int nu, const RVec& x, const RVec& xi, cplx lambda) {
    if (nu < 1) throw Error(ErrorKind::input, "gnu_eval requires nu >= 1");
    auto terms = build_terms(sys.dim, nu);
    PointContext ctx(sys, x, xi, lambda);
    return ctx.eval(terms[nu].tree);
}

CMat TruncatedParametrix::eval(PointContext& ctx, const RVec& xi) const {
    CMat G = ctx.g0();
    double s = xi.norm();
    for (int nu = 1; nu < N; ++nu) {
        double chi = ramp(eps[nu] * s);
        if (chi == 0.0) continue;
        G += chi * ctx.eval(terms[nu].tree);
    }
    return G;
}

CMat TruncatedParametrix::eval(const RVec& x, const RVec& xi, cplx lambda) const {
    PointContext ctx(*sys, x, xi, lambda);
    return eval(ctx, xi);
}

TruncatedParametrix build_truncated_parametrix(const DNSystem& sys, int N, const Sector& sector,
                                               const ExcisionConfig& cfg) {
    if (N < 1) throw Error(ErrorKind::input, "truncation order N must be >= 1");
    TruncatedParametrix P;
    P.sys = &sys;
    P.N = N;
    P.terms = build_terms(sys.dim, N - 1);
    P.eps.assign(N, 0.0);
    auto set_eps = [&](double e1) {
        for (int nu = 1; nu < N; ++nu) P.eps[nu] = e1 * std::ldexp(1.0, -(nu - 1));
    };
    if (cfg.eps1 > 0.0 || N == 1 || sys.constant_coefficient()) {
        set_eps(cfg.eps1 > 0.0 ? cfg.eps1 : 1.0);
        return P;
    }
    // calibration: chi(eps_nu |xi|) |G^nu| <= 2^-nu |G^0| on a dyadic sweep
    const int n = sys.dim;
    std::vector<cplx> lams = {0.0, sector.boundary(0, 1.0), sector.boundary(1, 1.0)};
    struct Sample {
        double s, g0, gnu[8];
    };
    std::vector<Sample> samples;
    for (int k = 0; k <= cfg.calibration_kmax; ++k) {
        RVec xi = RVec::Zero(n);
        xi[0] = std::ldexp(1.0, k);
        for (int a = 0; a < 8; ++a) {
            RVec x = RVec::Constant(n, 2.0 * kPi * a / 8.0);
            for (cplx lam : lams) {
                PointContext ctx(sys, x, xi, lam);
                Sample smp{};
                smp.s = xi.norm();
                smp.g0 = spectral_norm(ctx.g0());
                for (int nu = 1; nu < N && nu < 8; ++nu) smp.gnu[nu] = spectral_norm(ctx.eval(P.terms[nu].tree));
                samples.push_back(smp);
            }
        }
    }
    double e1 = 1.0;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
        set_eps(e1);
        bool ok = true;
        for (const auto& smp : samples)
            for (int nu = 1; nu < N && nu < 8 && ok; ++nu)
                if (ramp(P.eps[nu] * smp.s) * smp.gnu[nu] > std::ldexp(1.0, -nu) * smp.g0) ok = false;
        if (ok) break;
        e1 *= 0.5;
    }
    set_eps(e1);
    return P;
}

const char* quantity_name(ProbeQuantity q) {
    switch (q) {
        case ProbeQuantity::J_minus_1: return "J_minus_1";
        case ProbeQuantity::G_minus_G0: return "G_minus_G0";
        case ProbeQuantity::g0_diag_bound: return "g0_diag_bound";
        case ProbeQuantity::g0_offdiag_bound: return "g0_offdiag_bound";
        case ProbeQuantity::gnu_bound: return "gnu_bound";
    }
    return "?";
}

namespace {

CMat j_minus_1_ctx(PointContext& ctx, const std::vector<ParametrixTerm>& terms, int n, int N, bool full) {
    const int q = static_cast<int>(ctx.g0().rows());
    CMat J = CMat::Zero(q, q);
    for (int nu = 0; nu < N; ++nu) {
        int amax = full ? N : N - 1;
        for (int t = std::max(1, N - nu); t <= amax; ++t) {
            for (const auto& al : multi_indices(n, t)) {
                DerivKey f{};
                f.beta = al;
                cplx coef = std::pow(cplx(0.0, -1.0), t) / multi_factorial(al, n);
                J += coef * ctx.eval(terms[nu].tree.d_xi(al, n)) * ctx.deriv(f);
            }
        }
    }
    return J;
}

}  // namespace

CMat j_minus_1(const DNSystem& sys, const std::vector<ParametrixTerm>& terms, int N, const RVec& x, const RVec& xi,
               cplx lambda, bool full_leading_remainder) {
    PointContext ctx(sys, x, xi, lambda);
    return j_minus_1_ctx(ctx, terms, sys.dim, N, full_leading_remainder);
}

DecayProbe decay_probe(const DNSystem& sys, ProbeQuantity quantity, int N, const Sector& sector,
                       const ProbeConfig& cfg) {
    if (N < 1) throw Error(ErrorKind::input, "truncation order N must be >= 1");
    const int n = sys.dim, q = sys.q;
    DecayProbe P;
    P.quantity = quantity;
    P.N = N;
    std::vector<cplx> lams = cfg.lambdas;
    if (lams.empty())
        lams = {0.0, sector.boundary(0, 1.0), sector.boundary(1, 1.0), sector.boundary(0, 16.0), cplx(-16.0)};
    for (cplx l : lams)
        if (!sector.contains(l, 1e-9)) throw Error(ErrorKind::input, "probe lambda outside the sector");
    if (cfg.kmax - cfg.kmin + 1 < 3) throw Error(ErrorKind::fit, "fewer than 3 dyadic points");

    int nu_top = std::max(N - 1, quantity == ProbeQuantity::gnu_bound ? std::max(N - 1, 1) : 0);
    auto terms = build_terms(n, nu_top);
    RVec r = sys.r();
    std::vector<RVec> xs;
    const int xp = sys.constant_coefficient() ? 1 : cfg.x_points;
    for (int a = 0; a < xp; ++a) xs.push_back(RVec::Constant(n, 2.0 * kPi * a / xp + 0.1));

    // per lambda: profile of the sup over x and (i, j) against <xi>
    std::vector<std::vector<double>> prof(lams.size());
    std::vector<double> brs;
    bool all_zero = true;
    for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
        RVec xi = RVec::Zero(n);
        xi[0] = std::ldexp(1.0, k);
        const double br = bracket(xi);
        brs.push_back(br);
        for (size_t li = 0; li < lams.size(); ++li) {
            const cplx lam = lams[li];
            const double la = std::abs(lam);
            double vmax = 0.0;
            for (const auto& x : xs) {
                PointContext ctx(sys, x, xi, lam);
                CMat V;
                switch (quantity) {
                    case ProbeQuantity::J_minus_1:
                        V = j_minus_1_ctx(ctx, terms, n, N, cfg.full_leading_remainder);
                        break;
                    case ProbeQuantity::G_minus_G0:
                        V = CMat::Zero(q, q);
                        for (int nu = 1; nu < N; ++nu) V += ctx.eval(terms[nu].tree);
                        break;
                    case ProbeQuantity::g0_diag_bound:
                    case ProbeQuantity::g0_offdiag_bound:
                        V = ctx.g0();
                        break;
                    case ProbeQuantity::gnu_bound:
                        V = CMat::Zero(q, q);
                        for (int nu = 1; nu <= nu_top; ++nu) V += ctx.eval(terms[nu].tree);
                        break;
                }
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j) {
                        double w = 0.0;
                        const double di = std::pow(br, r[i]) + la, dj = std::pow(br, r[j]) + la;
                        switch (quantity) {
                            case ProbeQuantity::J_minus_1:
                                w = std::pow(br, -(sys.l[i] + sys.m[j])) * di;
                                break;
                            case ProbeQuantity::g0_diag_bound:
                                if (i != j) continue;
                                w = di;
                                break;
                            case ProbeQuantity::g0_offdiag_bound:
                                if (i == j) continue;
                                w = di * dj * std::pow(br, -(sys.l[i] + sys.m[j]));
                                break;
                            case ProbeQuantity::G_minus_G0:
                                w = di * dj * std::pow(br, -(sys.l[i] + sys.m[j]));
                                break;
                            case ProbeQuantity::gnu_bound:
                                w = di * dj * std::pow(br, -(sys.l[i] + sys.m[j]) + (1.0 - sys.delta) * nu_top);
                                break;
                        }
                        double v = std::abs(V(i, j)) * w;
                        if (!std::isfinite(v)) throw Error(ErrorKind::numerical, "non-finite probe value");
                        if (v != 0.0) all_zero = false;
                        vmax = std::max(vmax, v);
                        P.samples.push_back({xi.norm(), la, i, j, v});
                    }
            }
            prof[li].push_back(vmax);
            P.sup = std::max(P.sup, vmax);
        }
    }
    if (P.samples.empty()) throw Error(ErrorKind::fit, "probe produced no samples");
    if (all_zero) {
        P.fitted_slope = -std::numeric_limits<double>::infinity();
    } else {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : prof) {
            bool nz = false;
            for (double v : p) nz = nz || v > 0.0;
            if (!nz) continue;
            worst = std::max(worst, fit_loglog(brs, p).slope);
        }
        P.fitted_slope = worst;
    }
    P.lambda_decay_ok = std::isfinite(P.sup) && P.sup < cfg.cap;
    return P;
}

}  // namespace dnsys
