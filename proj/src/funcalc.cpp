#include "dnsys/funcalc.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numeric>

#include "dnsys/numerics.hpp"

namespace dnsys {

namespace {

const cplx kTwoPiI(0.0, 2.0 * kPi);

void add_panel(std::vector<QuadNode>& out, const GaussRule& g, double a, double b, cplx dir, double sign) {
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        double r = m + h * g.nodes[i];
        out.push_back({r * dir, sign * dir * (h * g.weights[i]) / kTwoPiI});
    }
}

// tail [R, inf) through r = 1/u
void add_tail(std::vector<QuadNode>& out, const GaussRule& g, double R, cplx dir, double sign) {
    const double ub = 1.0 / R, h = 0.5 * ub;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        double u = h + h * g.nodes[i];
        out.push_back({dir / u, sign * dir * (h * g.weights[i] / (u * u)) / kTwoPiI});
    }
}

void add_ray(std::vector<QuadNode>& out, const GaussRule& g, double r0, double R, cplx dir, double sign, bool tail) {
    add_panel(out, g, 0.0, r0, dir, sign);
    double a = r0;
    while (a < R * (1.0 - 1e-12)) {
        double b = std::min(2.0 * a, R);
        add_panel(out, g, a, b, dir, sign);
        a = b;
    }
    if (tail) add_tail(out, g, R, dir, sign);
}

double dist_to_sector(cplx c, const Sector& s) {
    if (s.contains(c, 0.0)) return 0.0;
    return std::abs(c - s.project_to_boundary(c));
}

double rel_change(double diff, double ref) { return ref > 0.0 ? diff / ref : (diff > 0.0 ? diff : 0.0); }

}  // namespace

HFunction rational_member(int k, double phi) {
    if (k < 1) throw Error(ErrorKind::input, "family index must be >= 1");
    HFunction h;
    const cplx rot = std::polar(1.0, phi);
    h.f = [k, rot](cplx lam) {
        cplx z = rot * lam;
        cplx w = z / ((1.0 + z) * (1.0 + z));
        return std::pow(w, k);
    };
    h.decay_s = k;
    h.k = k;
    h.phi = phi;
    h.label = "f" + std::to_string(k) + (phi == 0.0 ? "" : (phi > 0 ? "_rot+" : "_rot-"));
    return h;
}

HFunction product(const HFunction& a, const HFunction& b) {
    HFunction h;
    h.f = [fa = a.f, fb = b.f](cplx z) { return fa(z) * fb(z); };
    h.decay_s = a.decay_s + b.decay_s;
    h.label = a.label + "*" + b.label;
    return h;
}

HFunction zero_function() {
    HFunction h;
    h.f = [](cplx) { return cplx(0.0); };
    h.label = "zero";
    return h;
}

HFunction shifted_inverse(cplx c) {
    HFunction h;
    h.f = [c](cplx z) { return 1.0 / (c + z); };
    h.decay_s = 1.0;
    h.label = "inverse";
    return h;
}

std::vector<HFunction> default_family(const Sector& sector, int kmax, bool rotated) {
    std::vector<HFunction> fam;
    const double phi = 0.5 * (kPi - sector.theta);
    for (int k = 1; k <= kmax; ++k) {
        fam.push_back(rational_member(k));
        if (rotated) {
            fam.push_back(rational_member(k, phi));
            fam.push_back(rational_member(k, -phi));
        }
    }
    return fam;
}

double estimate_sup_norm(const HFunction& f, const Sector& sector) {
    double sup = 0.0;
    auto val = [&](cplx z) {
        double v = std::abs(f(z));
        return std::isfinite(v) ? v : 0.0;
    };
    sup = val(0.0);
    const int M = 4001;
    const double step = 16.0 / (M - 1);
    for (int side = 0; side < 2; ++side) {
        int best = 0;
        double bv = -1.0;
        for (int i = 0; i < M; ++i) {
            double v = val(sector.boundary(side, std::pow(10.0, -8.0 + step * i)));
            if (v > bv) {
                bv = v;
                best = i;
            }
        }
        // golden section in log10 r around the best sample
        double a = -8.0 + step * (best - 1), b = -8.0 + step * (best + 1);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        auto at = [&](double t) { return val(sector.boundary(side, std::pow(10.0, t))); };
        double c = b - g * (b - a), d = a + g * (b - a), fc = at(c), fd = at(d);
        for (int it = 0; it < 60; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = at(d);
            }
        }
        sup = std::max({sup, bv, fc, fd});
    }
    const double angles[3] = {0.0, 0.5 * sector.theta, -0.5 * sector.theta};
    for (double ang : angles)
        for (int i = 0; i < 64; ++i) sup = std::max(sup, val(std::polar(std::pow(10.0, -4.0 + 8.0 * i / 63.0), ang)));
    return sup;
}

void fill_sup_norms(std::vector<HFunction>& fam, const Sector& sector) {
    for (auto& f : fam) f.sup_norm = estimate_sup_norm(f, sector);
}

SectorContour make_sector_contour(const Sector& sector, int nodes_per_panel, double r_min, double R_max) {
    if (nodes_per_panel < 2 || !(r_min > 0.0) || !(R_max > r_min))
        throw Error(ErrorKind::input, "invalid contour parameters");
    SectorContour c;
    c.theta = sector.theta;
    c.r_min = r_min;
    c.R_max = R_max;
    c.nodes_per_panel = nodes_per_panel;
    GaussRule g = gauss_legendre(nodes_per_panel);
    add_ray(c.nodes, g, r_min, R_max, std::polar(1.0, -sector.theta), 1.0, true);
    add_ray(c.nodes, g, r_min, R_max, std::polar(1.0, sector.theta), -1.0, true);
    return c;
}

SectorContour refined(const SectorContour& c) {
    return make_sector_contour(Sector{c.theta}, 2 * c.nodes_per_panel, 0.5 * c.r_min, 2.0 * c.R_max);
}

CMat matrix_holo_calc(const HFunction& f, const CMat& M, const Sector& domain) {
    const int q = static_cast<int>(M.rows());
    Eigen::ComplexEigenSolver<CMat> es(M);
    const CVec& mu = es.eigenvalues();
    for (int i = 0; i < q; ++i) {
        cplx v = f(mu[i]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::domain, "spectrum meets a singularity of f");
    }
    const CMat& V = es.eigenvectors();
    if (condition_number(V) < 1e8) {
        CVec fv(q);
        for (int i = 0; i < q; ++i) fv[i] = f(mu[i]);
        return V * fv.asDiagonal() * V.inverse();
    }
    // clusters of nearby eigenvalues
    std::vector<int> parent(q);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    for (int i = 0; i < q; ++i)
        for (int j = i + 1; j < q; ++j)
            if (std::abs(mu[i] - mu[j]) <= 1e-3 * (1.0 + std::abs(mu[i]))) parent[find(i)] = find(j);
    std::vector<std::vector<int>> clusters;
    std::vector<int> label(q, -1);
    for (int i = 0; i < q; ++i) {
        int r = find(i);
        if (label[r] < 0) {
            label[r] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[label[r]].push_back(i);
    }
    struct Circle {
        cplx c;
        double rho;
    };
    std::vector<Circle> circles;
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        cplx c = 0.0;
        for (int i : clusters[ci]) c += mu[i];
        c /= static_cast<double>(clusters[ci].size());
        double rad = 0.0, other = std::numeric_limits<double>::infinity();
        for (int i : clusters[ci]) rad = std::max(rad, std::abs(mu[i] - c));
        for (int i = 0; i < q; ++i)
            if (find(i) != find(clusters[ci][0])) other = std::min(other, std::abs(mu[i] - c));
        double rho = std::min(0.5 * other, 0.5 * dist_to_sector(c, domain));
        if (!std::isfinite(rho)) rho = 1.0 + std::abs(c);
        if (!(rho > 1.5 * rad) || !(rho > 0.0))
            throw Error(ErrorKind::domain, "cannot isolate an eigenvalue cluster inside the holomorphy domain");
        circles.push_back({c, rho});
    }
    auto trap = [&](int n) {
        CMat out = CMat::Zero(q, q);
        for (const auto& C : circles)
            for (int m = 0; m < n; ++m) {
                cplx e = std::polar(C.rho, 2.0 * kPi * m / n);
                cplx lam = C.c + e;
                CMat R = lam * CMat::Identity(q, q) - M;
                out += (f(lam) * e / static_cast<double>(n)) * R.partialPivLu().inverse();
            }
        return out;
    };
    int n = 32;
    CMat prev = trap(n);
    for (; n <= 8192; n *= 2) {
        CMat next = trap(2 * n);
        if ((next - prev).norm() <= 1e-10 * std::max(next.norm(), 1e-300)) return next;
        prev = next;
    }
    throw Error(ErrorKind::quadrature, "circle quadrature did not converge");
}

namespace {

std::vector<CMat> dense_pass(const CMat& A, const std::vector<HFunction>& fam, const SectorContour& c) {
    const int D = static_cast<int>(A.rows());
    std::vector<CMat> acc(fam.size(), CMat::Zero(D, D));
    const CMat I = CMat::Identity(D, D);
    for (const auto& nd : c.nodes) {
        CMat L = nd.lambda * I - A;
        Eigen::PartialPivLU<CMat> lu(L);
        if (!(lu.rcond() > 1e-15)) throw Error(ErrorKind::quadrature, "resolvent singular on the contour");
        CMat R = lu.inverse();
        for (size_t k = 0; k < fam.size(); ++k) {
            cplx w = nd.weight * fam[k](nd.lambda);
            if (w != cplx(0.0)) acc[k] += w * R;
        }
    }
    return acc;
}

std::vector<std::vector<CMat>> modes_pass(const std::vector<CMat>& blocks, const std::vector<HFunction>& fam,
                                          const SectorContour& c) {
    const int q = static_cast<int>(blocks[0].rows());
    std::vector<std::vector<CMat>> acc(fam.size(), std::vector<CMat>(blocks.size(), CMat::Zero(q, q)));
    const CMat I = CMat::Identity(q, q);
    std::vector<cplx> fv(fam.size());
    for (const auto& nd : c.nodes) {
        for (size_t k = 0; k < fam.size(); ++k) fv[k] = nd.weight * fam[k](nd.lambda);
        for (size_t m = 0; m < blocks.size(); ++m) {
            CMat R = (nd.lambda * I - blocks[m]).partialPivLu().inverse();
            for (size_t k = 0; k < fam.size(); ++k)
                if (fv[k] != cplx(0.0)) acc[k][m] += fv[k] * R;
        }
    }
    return acc;
}

}  // namespace

CalculusResult dunford_eval(const DiscreteOperator& op, const std::vector<HFunction>& family,
                            const SectorContour& contour, bool check_refinement, double tol) {
    CalculusResult res;
    res.ops = dense_pass(op.matrix, family, contour);
    res.nodes = static_cast<int>(contour.nodes.size());
    if (check_refinement) {
        res.ops_refined = dense_pass(op.matrix, family, refined(contour));
        for (size_t k = 0; k < family.size(); ++k) {
            double ch = rel_change(weighted_norm(op, res.ops_refined[k] - res.ops[k]),
                                   weighted_norm(op, res.ops_refined[k]));
            res.refinement_change = std::max(res.refinement_change, ch);
        }
        if (!(res.refinement_change <= tol))
            throw Error(ErrorKind::quadrature, "contour refinement changed the result by " +
                                                   std::to_string(res.refinement_change) + " (relative)");
    }
    for (size_t k = 0; k < family.size(); ++k) {
        CalculusEntry e;
        e.label = family[k].label;
        e.k = family[k].k;
        e.phi = family[k].phi;
        e.sup_norm = family[k].sup_norm;
        e.op_norm = weighted_norm(op, res.ops[k]);
        e.ratio = e.sup_norm > 0.0 ? e.op_norm / e.sup_norm : 0.0;
        res.M_estimate = std::max(res.M_estimate, e.ratio);
        if (check_refinement && e.sup_norm > 0.0)
            res.M_refined = std::max(res.M_refined, weighted_norm(op, res.ops_refined[k]) / e.sup_norm);
        res.entries.push_back(e);
    }
    return res;
}

std::vector<CMat> multiplier_blocks(const DNSystem& sys, const TorusGrid& g, cplx alpha) {
    if (!sys.constant_coefficient()) throw Error(ErrorKind::input, "multiplier route needs a constant system");
    std::vector<CMat> blocks;
    for (const auto& xi : g.freqs) {
        CMat A = eval_matrix(sys, g.points[0], xi);
        A.diagonal().array() += alpha;
        blocks.push_back(A);
    }
    return blocks;
}

double modes_norm(const std::vector<CMat>& blocks, const DiscreteOperator& weights) {
    const int M = weights.grid.size();
    double out = 0.0;
    for (size_t m = 0; m < blocks.size(); ++m) {
        const int q = static_cast<int>(blocks[m].rows());
        RVec w(q);
        for (int i = 0; i < q; ++i) w[i] = weights.w_target[i * M + static_cast<int>(m)];
        out = std::max(out, spectral_norm(w.asDiagonal() * blocks[m] * w.cwiseInverse().asDiagonal()));
    }
    return out;
}

CalculusResult dunford_eval_modes(const std::vector<CMat>& blocks, const DiscreteOperator& weights,
                                  const std::vector<HFunction>& family, const SectorContour& contour,
                                  bool check_refinement, double tol) {
    if (blocks.empty()) throw Error(ErrorKind::input, "no modes");
    CalculusResult res;
    res.modes = modes_pass(blocks, family, contour);
    res.nodes = static_cast<int>(contour.nodes.size());
    if (check_refinement) {
        res.modes_refined = modes_pass(blocks, family, refined(contour));
        for (size_t k = 0; k < family.size(); ++k) {
            std::vector<CMat> diff(blocks.size());
            for (size_t m = 0; m < blocks.size(); ++m) diff[m] = res.modes_refined[k][m] - res.modes[k][m];
            double ch = rel_change(modes_norm(diff, weights), modes_norm(res.modes_refined[k], weights));
            res.refinement_change = std::max(res.refinement_change, ch);
        }
        if (!(res.refinement_change <= tol))
            throw Error(ErrorKind::quadrature, "contour refinement changed the result by " +
                                                   std::to_string(res.refinement_change) + " (relative)");
    }
    for (size_t k = 0; k < family.size(); ++k) {
        CalculusEntry e;
        e.label = family[k].label;
        e.k = family[k].k;
        e.phi = family[k].phi;
        e.sup_norm = family[k].sup_norm;
        e.op_norm = modes_norm(res.modes[k], weights);
        e.ratio = e.sup_norm > 0.0 ? e.op_norm / e.sup_norm : 0.0;
        res.M_estimate = std::max(res.M_estimate, e.ratio);
        if (check_refinement && e.sup_norm > 0.0)
            res.M_refined = std::max(res.M_refined, modes_norm(res.modes_refined[k], weights) / e.sup_norm);
        res.entries.push_back(e);
    }
    return res;
}

CalculusResult hinfty_bound_probe(const DiscreteOperator& op, std::vector<HFunction> family, const Sector& sector,
                                  const SectorContour& contour) {
    if (family.empty()) throw Error(ErrorKind::input, "empty function family");
    fill_sup_norms(family, sector);
    return dunford_eval(op, family, contour, true);
}

PacmanResult pacman_symbol_calc(const ScalarSymbol& a, const HFunction& f, const Sector& sector,
                                const std::vector<RVec>& xis, const std::vector<RVec>& xs, int nodes_per_panel) {
    if (xis.empty() || xs.empty()) throw Error(ErrorKind::input, "empty sampling set");
    PacmanResult res;
    const double r = a.order;
    double c0 = 0.0;
    for (const auto& xi : xis)
        for (const auto& x : xs) c0 = std::max(c0, std::abs(a(x, xi)) / std::pow(bracket(xi), r));
    res.c = 2.0 * c0;
    const double fsup = f.sup_norm > 0.0 ? f.sup_norm : estimate_sup_norm(f, sector);
    GaussRule g = gauss_legendre(nodes_per_panel);
    const double th = sector.theta;
    for (const auto& xi : xis) {
        double amax = 0.0;
        std::vector<cplx> vals;
        for (const auto& x : xs) {
            cplx v = a(x, xi);
            if (sector.contains(v, 0.0)) throw Error(ErrorKind::contour, "symbol value lies in the sector");
            vals.push_back(v);
            amax = std::max(amax, std::abs(v));
        }
        double rho = res.c * std::pow(bracket(xi), r);
        if (!(rho > amax)) {
            rho *= 2.0;
            ++res.grown;
            if (!(rho > amax)) throw Error(ErrorKind::contour, "pac-man radius does not enclose the symbol");
        }
        std::vector<QuadNode> nodes;
        add_ray(nodes, g, rho * std::ldexp(1.0, -40), rho, std::polar(1.0, -th), 1.0, false);
        const int arc_panels = 16;
        for (int p = 0; p < arc_panels; ++p) {
            double t0 = -th + 2.0 * th * p / arc_panels, t1 = -th + 2.0 * th * (p + 1) / arc_panels;
            double h = 0.5 * (t1 - t0), m = 0.5 * (t0 + t1);
            for (size_t i = 0; i < g.nodes.size(); ++i) {
                double t = m + h * g.nodes[i];
                cplx lam = std::polar(rho, t);
                nodes.push_back({lam, cplx(0.0, 1.0) * lam * (h * g.weights[i]) / kTwoPiI});
            }
        }
        add_ray(nodes, g, rho * std::ldexp(1.0, -40), rho, std::polar(1.0, th), -1.0, false);
        for (size_t ix = 0; ix < xs.size(); ++ix) {
            cplx acc = 0.0;
            for (const auto& nd : nodes) acc += nd.weight * f(nd.lambda) / (nd.lambda - vals[ix]);
            PacmanSample s;
            s.xi_norm = xi.norm();
            s.x = xs[ix];
            s.value = acc;
            s.ratio = fsup > 0.0 ? std::abs(acc) / fsup : 0.0;
            res.C_sup = std::max(res.C_sup, s.ratio);
            res.samples.push_back(s);
        }
    }
    return res;
}

}  // namespace dnsys
