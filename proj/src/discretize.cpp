#include "dnsys/discretize.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dnsys/numerics.hpp"

namespace dnsys {

TorusGrid TorusGrid::make(int n, int N, double L) {
    if (n < 1 || n > 2) throw Error(ErrorKind::input, "torus dimension must be 1 or 2");
    if (N < 2 || (N & (N - 1)) != 0) throw Error(ErrorKind::input, "points per axis must be a power of two");
    if (!(L > 0.0)) throw Error(ErrorKind::input, "period scale L must be positive");
    TorusGrid g;
    g.n = n;
    g.N = N;
    g.L = L;
    auto label = [N](int k) { return k < N / 2 ? k : k - N; };
    const int total = n == 1 ? N : N * N;
    for (int idx = 0; idx < total; ++idx) {
        int a0 = n == 1 ? idx : idx / N;
        int a1 = n == 1 ? 0 : idx % N;
        RVec x(n), xi(n);
        x[0] = 2.0 * kPi * L * a0 / N;
        xi[0] = label(a0) / L;
        std::array<int, 2> lab{label(a0), 0};
        if (n == 2) {
            x[1] = 2.0 * kPi * L * a1 / N;
            xi[1] = label(a1) / L;
            lab[1] = label(a1);
        }
        g.points.push_back(x);
        g.freqs.push_back(xi);
        g.freq_index.push_back(lab);
    }
    return g;
}

namespace {

// E[a, k] = exp(i xi_k . x_a)
CMat exp_matrix(const TorusGrid& g) {
    const int M = g.size();
    CMat E(M, M);
    for (int a = 0; a < M; ++a)
        for (int k = 0; k < M; ++k) {
            double ph = 0.0;
            for (int d = 0; d < g.n; ++d)
                ph += 2.0 * kPi * g.freq_index[k][d] * (g.n == 1 ? a : (d == 0 ? a / g.N : a % g.N)) / g.N;
            E(a, k) = std::polar(1.0, ph);
        }
    return E;
}

void check_finite(const CMat& v, const RVec& x, const RVec& xi) {
    if (!v.allFinite()) {
        std::string s = "non-finite symbol value at x=" + std::to_string(x[0]) + " xi=" + std::to_string(xi[0]);
        throw Error(ErrorKind::evaluation, s);
    }
}

class Fft {
public:
    Fft(const TorusGrid& g, int sign) : M_(g.size()) {
        buf_ = fftw_alloc_complex(M_);
        if (g.n == 1)
            plan_ = fftw_plan_dft_1d(g.N, buf_, buf_, sign, FFTW_ESTIMATE);
        else
            plan_ = fftw_plan_dft_2d(g.N, g.N, buf_, buf_, sign, FFTW_ESTIMATE);
    }
    ~Fft() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    CVec run(const CVec& in) {
        auto* p = reinterpret_cast<cplx*>(buf_);
        for (int i = 0; i < M_; ++i) p[i] = in[i];
        fftw_execute(plan_);
        CVec out(M_);
        for (int i = 0; i < M_; ++i) out[i] = p[i];
        return out;
    }

private:
    int M_;
    fftw_complex* buf_;
    fftw_plan plan_;
};

}  // namespace

CMat quantize(const TorusGrid& g, int q, const PointSymbol& f, bool x_independent, size_t cap) {
    const int M = g.size();
    if (static_cast<size_t>(q) * M > cap) throw Error(ErrorKind::resource, "dense size exceeds the configured cap");
    CMat E = exp_matrix(g);
    std::vector<CMat> vals(static_cast<size_t>(q) * q, CMat(M, M));
    if (x_independent) {
        for (int k = 0; k < M; ++k) {
            CMat v = f(g.points[0], g.freqs[k]);
            check_finite(v, g.points[0], g.freqs[k]);
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j) vals[i * q + j].col(k).setConstant(v(i, j));
        }
    } else {
        for (int a = 0; a < M; ++a)
            for (int k = 0; k < M; ++k) {
                CMat v = f(g.points[a], g.freqs[k]);
                check_finite(v, g.points[a], g.freqs[k]);
                for (int i = 0; i < q; ++i)
                    for (int j = 0; j < q; ++j) vals[i * q + j](a, k) = v(i, j);
            }
    }
    CMat out(q * M, q * M);
    CMat EH = E.adjoint() / static_cast<double>(M);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            if (vals[i * q + j].isZero(0.0)) {
                out.block(i * M, j * M, M, M).setZero();
                continue;
            }
            out.block(i * M, j * M, M, M) = vals[i * q + j].cwiseProduct(E) * EH;
        }
    return out;
}

CMat dft_matrix(const TorusGrid& g) { return exp_matrix(g).adjoint() / std::sqrt(static_cast<double>(g.size())); }

CMat block_dft(const TorusGrid& g, int q) {
    const int M = g.size();
    CMat F1 = dft_matrix(g);
    CMat F = CMat::Zero(q * M, q * M);
    for (int i = 0; i < q; ++i) F.block(i * M, i * M, M, M) = F1;
    return F;
}

CVec apply_pdo(const DNSystem& sys, const TorusGrid& g, const CVec& u) {
    const int M = g.size(), q = sys.q;
    if (u.size() != q * M) throw Error(ErrorKind::input, "field length does not match grid and q");
    if (sys.dim != g.n) throw Error(ErrorKind::input, "system dimension does not match the grid");
    Fft fwd(g, FFTW_FORWARD), bwd(g, FFTW_BACKWARD);
    std::vector<CVec> uh(q);
    for (int j = 0; j < q; ++j) uh[j] = fwd.run(u.segment(j * M, M));
    CVec out = CVec::Zero(q * M);
    if (sys.constant_coefficient()) {
        std::vector<CVec> vh(q, CVec::Zero(M));
        for (int k = 0; k < M; ++k) {
            CMat A = eval_matrix(sys, g.points[0], g.freqs[k]);
            check_finite(A, g.points[0], g.freqs[k]);
            for (int i = 0; i < q; ++i)
                for (int j = 0; j < q; ++j) vh[i][k] += A(i, j) * uh[j][k];
        }
        for (int i = 0; i < q; ++i) out.segment(i * M, M) = bwd.run(vh[i]) / static_cast<double>(M);
        return out;
    }
    CMat E = exp_matrix(g);
    for (int a = 0; a < M; ++a)
        for (int k = 0; k < M; ++k) {
            CMat A = eval_matrix(sys, g.points[a], g.freqs[k]);
            check_finite(A, g.points[a], g.freqs[k]);
            for (int i = 0; i < q; ++i) {
                cplx acc = 0.0;
                for (int j = 0; j < q; ++j) acc += A(i, j) * uh[j][k];
                out[i * M + a] += E(a, k) * acc;
            }
        }
    return out / static_cast<double>(M);
}

CVec apply_pdo(const ScalarSymbol& a, const TorusGrid& g, const CVec& u) {
    RVec l = RVec::Zero(1), m = RVec::Constant(1, std::max(0.0, a.order));
    ScalarSymbol b = a;
    b.order = m[0];
    b.delta = 0.0;
    return apply_pdo(DNSystem::make({b}, l, m, 0.0), g, u);
}

Perturbation make_perturbation(const DNSystem& sys, const TorusGrid& g, double epsilon, double amplitude,
                               std::uint64_t seed, double s) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::input, "perturbation epsilon must be positive");
    const int M = g.size(), q = sys.q;
    Perturbation K;
    K.epsilon = epsilon;
    K.amplitude = amplitude;
    K.seed = seed;
    CMat E = exp_matrix(g);
    CMat EH = E.adjoint() / static_cast<double>(M);
    auto multiplier = [&](double t) {
        RVec w(M);
        for (int k = 0; k < M; ++k) w[k] = std::pow(bracket(g.freqs[k]), t);
        return CMat(E * w.asDiagonal() * EH);
    };
    K.matrix = CMat::Zero(q * M, q * M);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            CounterRng rng(seed, static_cast<std::uint64_t>(i * q + j));
            CVec phi(M);
            for (int a = 0; a < M; ++a) {
                phi[a] = rng.uniform(-amplitude, amplitude);
                K.phi_max = std::max(K.phi_max, std::abs(phi[a].real()));
            }
            K.matrix.block(i * M, j * M, M, M) =
                multiplier(sys.l[i] - s) * phi.asDiagonal() * multiplier(s + sys.m[j] - epsilon);
        }
    return K;
}

namespace {

DiscreteOperator weights_for(const DNSystem& sys, const TorusGrid& g, double s) {
    DiscreteOperator op;
    const int M = g.size(), q = sys.q;
    op.grid = g;
    op.q = q;
    op.l = sys.l;
    op.m = sys.m;
    op.s = s;
    op.w_target.resize(q * M);
    op.w_source.resize(q * M);
    for (int i = 0; i < q; ++i)
        for (int k = 0; k < M; ++k) {
            double br = bracket(g.freqs[k]);
            op.w_target[i * M + k] = std::pow(br, s - sys.l[i]);
            op.w_source[i * M + k] = std::pow(br, s + sys.m[i]);
        }
    op.F = block_dft(g, q);
    return op;
}

}  // namespace

DiscreteOperator assemble_dense(const DNSystem& sys, const TorusGrid& g, cplx alpha, const Perturbation* K, double s,
                                size_t cap) {
    if (sys.dim != g.n) throw Error(ErrorKind::input, "system dimension does not match the grid");
    DiscreteOperator op = weights_for(sys, g, s);
    const int q = sys.q;
    op.matrix = quantize(
        g, q, [&sys](const RVec& x, const RVec& xi) { return eval_matrix(sys, x, xi); }, sys.constant_coefficient(),
        cap);
    op.matrix.diagonal().array() += alpha;
    if (K) {
        if (K->matrix.rows() != op.matrix.rows()) throw Error(ErrorKind::input, "perturbation size mismatch");
        op.matrix += K->matrix;
    }
    return op;
}

DiscreteOperator with_matrix(const DiscreteOperator& like, CMat M) {
    DiscreteOperator op = like;
    op.matrix = std::move(M);
    return op;
}

double weighted_norm(const DiscreteOperator& op, const CMat& T) {
    CMat X = op.F * T * op.F.adjoint();
    X = op.w_target.asDiagonal() * X * op.w_target.cwiseInverse().asDiagonal();
    return spectral_norm(X);
}

double weighted_norm_gram(const DiscreteOperator& op, const CMat& T) {
    CMat G = op.F.adjoint() * op.w_target.cwiseAbs2().asDiagonal() * op.F;
    G = 0.5 * (G + G.adjoint()).eval();
    CMat H = T.adjoint() * G * T;
    H = 0.5 * (H + H.adjoint()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(H, G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::vector<cplx> sweep_lambdas(const Sector& sector, int kmin, int kmax) {
    std::vector<cplx> out;
    for (int k = kmin; k <= kmax; ++k) {
        out.push_back(sector.boundary(0, std::ldexp(1.0, k)));
        out.push_back(sector.boundary(1, std::ldexp(1.0, k)));
    }
    return out;
}

std::vector<cplx> ray_lambdas(cplx direction, int kmin, int kmax) {
    std::vector<cplx> out;
    cplx d = direction / std::abs(direction);
    for (int k = kmin; k <= kmax; ++k) out.push_back(std::ldexp(1.0, k) * d);
    return out;
}

SweepResult resolvent_sweep(const DiscreteOperator& op, const Sector& sector, const std::vector<cplx>& lambdas) {
    SweepResult res;
    const int D = static_cast<int>(op.matrix.rows());
    for (cplx lam : lambdas) {
        if (!sector.contains(lam, 1e-9)) throw Error(ErrorKind::input, "sweep lambda outside the sector");
        SweepRow row;
        row.lambda = lam;
        CMat M = op.matrix;
        M.diagonal().array() -= lam;
        Eigen::PartialPivLU<CMat> lu(M);
        double rc = lu.rcond();
        if (!(rc > 1e-14)) {
            row.singular = true;
            row.norm = std::numeric_limits<double>::infinity();
            row.norm_times_bracket = row.norm;
            ++res.singular_count;
        } else {
            CMat T = lu.solve(CMat::Identity(D, D));
            row.norm = weighted_norm(op, T);
            row.norm_times_bracket = row.norm * lambda_bracket(lam);
            res.max_weighted = std::max(res.max_weighted, row.norm_times_bracket);
        }
        res.rows.push_back(row);
    }
    if (res.singular_count > 0) res.max_weighted = std::numeric_limits<double>::infinity();
    return res;
}

double sweep_slope(const SweepResult& r) {
    std::vector<double> x, y;
    for (const auto& row : r.rows) {
        if (row.singular) continue;
        x.push_back(std::abs(row.lambda));
        y.push_back(row.norm);
    }
    return fit_loglog(x, y).slope;
}

PvRResult parametrix_vs_resolvent(const DNSystem& sys, const TorusGrid& g, const Sector& sector, int N,
                                  const std::vector<cplx>& lambdas, const Perturbation* K,
                                  const ExcisionConfig& excision, cplx alpha) {
    DNSystem base = alpha == cplx(0.0) ? sys : shifted(sys, alpha);
    DiscreteOperator op = assemble_dense(base, g, 0.0, K);
    TruncatedParametrix P = build_truncated_parametrix(base, N, sector, excision);
    PvRResult res;
    std::vector<double> xs, ys;
    for (cplx lam : lambdas) {
        if (!sector.contains(lam, 1e-9)) throw Error(ErrorKind::input, "lambda outside the sector");
        CMat M = op.matrix;
        M.diagonal().array() -= lam;
        CMat T = checked_inverse(M, 1e14, "discrete resolvent").inverse;
        CMat G = quantize(
            g, sys.q, [&P, lam](const RVec& x, const RVec& xi) { return P.eval(x, xi, lam); },
            base.constant_coefficient());
        PvRRow row;
        row.lambda = lam;
        row.diff_norm = weighted_norm(op, T - G);
        row.resolvent_norm = weighted_norm(op, T);
        res.rows.push_back(row);
        xs.push_back(std::abs(lam));
        ys.push_back(row.diff_norm);
    }
    bool nz = false;
    for (double v : ys) nz = nz || v > 1e-300;
    if (!nz) {
        res.fitted_slope = -std::numeric_limits<double>::infinity();
    } else {
        res.fitted_slope = fit_loglog(xs, ys).slope;
    }
    res.epsilon_read = -1.0 - res.fitted_slope;
    return res;
}

}  // namespace dnsys
