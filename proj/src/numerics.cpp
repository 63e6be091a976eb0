#include "dnsys/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace dnsys {

LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 3) throw Error(ErrorKind::fit, "fewer than 3 usable points for a log-log fit");
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw Error(ErrorKind::fit, "degenerate abscissae in log-log fit");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = static_cast<int>(lx.size());
    return f;
}

GaussRule gauss_legendre(int p) {
    // Golub-Welsch
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, p);
    for (int i = 1; i < p; ++i) {
        double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussRule g;
    for (int i = 0; i < p; ++i) {
        g.nodes.push_back(es.eigenvalues()[i]);
        double v = es.eigenvectors()(0, i);
        g.weights.push_back(2.0 * v * v);
    }
    return g;
}

double CounterRng::normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double condition_number(const CMat& M) {
    Eigen::JacobiSVD<CMat> svd(M);
    const auto& s = svd.singularValues();
    double smin = s[s.size() - 1];
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

double spectral_norm(const CMat& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() <= 16) {
        Eigen::JacobiSVD<CMat> svd(M);
        return svd.singularValues()[0];
    }
    Eigen::BDCSVD<CMat> svd(M);
    return svd.singularValues()[0];
}

InverseResult checked_inverse(const CMat& M, double cond_cap, const std::string& context) {
    InverseResult r;
    Eigen::PartialPivLU<CMat> lu(M);
    if (M.rows() <= 16) {
        r.condition = condition_number(M);
    } else {
        double rc = lu.rcond();
        r.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    }
    if (!(r.condition < cond_cap))
        throw Error(ErrorKind::singularity, "matrix singular or ill-conditioned (cond=" +
                                                std::to_string(r.condition) + ") at " + context);
    r.inverse = lu.inverse();
    return r;
}

}  // namespace dnsys
