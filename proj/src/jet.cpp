#include "dnsys/jet.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace dnsys {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

const char* Error::kind_name() const {
    switch (kind_) {
        case ErrorKind::input: return "input";
        case ErrorKind::resource: return "resource";
        case ErrorKind::capability: return "capability";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::singularity: return "singularity";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::quadrature: return "quadrature";
        case ErrorKind::fit: return "fit";
        case ErrorKind::domain: return "domain";
        case ErrorKind::contour: return "contour";
    }
    return "unknown";
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input:
        case ErrorKind::resource:
        case ErrorKind::capability:
            return 2;
        default:
            return 3;
    }
}

JetSpace::JetSpace(int vars, int order) : vars_(vars), order_(order) {
    int stride = order + 1;
    int total = 1;
    for (int v = 0; v < vars; ++v) total *= stride;
    lookup_.assign(total, -1);
    // graded order: degree 0 first, so index 0 is the constant term
    for (int deg = 0; deg <= order; ++deg) {
        for (int code = 0; code < total; ++code) {
            Mono m{};
            int c = code, d = 0;
            for (int v = 0; v < vars; ++v) {
                m[v] = c % stride;
                c /= stride;
                d += m[v];
            }
            if (d != deg) continue;
            lookup_[code] = static_cast<int>(monos_.size());
            monos_.push_back(m);
            degree_.push_back(deg);
        }
    }
    for (int a = 0; a < size(); ++a) {
        for (int b = 0; b < size(); ++b) {
            if (degree_[a] + degree_[b] > order) continue;
            Mono m{};
            for (int v = 0; v < vars; ++v) m[v] = monos_[a][v] + monos_[b][v];
            products_.push_back({a, b, index(m)});
        }
    }
}

const JetSpace& JetSpace::get(int vars, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
    if (vars < 1 || vars > kMaxJetVars || order < 0 || order > 8)
        throw Error(ErrorKind::capability, "jet space out of range");
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{vars, order}];
    if (!slot) slot.reset(new JetSpace(vars, order));
    return *slot;
}

int JetSpace::index(const Mono& m) const {
    int code = 0, mul = 1, d = 0;
    for (int v = 0; v < vars_; ++v) {
        if (m[v] < 0) return -1;
        d += m[v];
        code += m[v] * mul;
        mul *= order_ + 1;
    }
    for (int v = vars_; v < kMaxJetVars; ++v)
        if (m[v] != 0) return -1;
    if (d > order_) return -1;
    return lookup_[code];
}

Jet::Jet(const JetSpace& sp, cplx value) : sp_(&sp), c_(sp.size(), cplx(0.0)) { c_[0] = value; }

Jet Jet::variable(const JetSpace& sp, int var, double value) {
    Jet j(sp, value);
    if (sp.order() >= 1) {
        Mono m{};
        m[var] = 1;
        j.c_[sp.index(m)] = 1.0;
    }
    return j;
}

cplx Jet::derivative(const Mono& m) const {
    int k = sp_->index(m);
    if (k < 0) throw Error(ErrorKind::capability, "derivative order exceeds jet order");
    double f = 1.0;
    for (int v = 0; v < sp_->vars(); ++v) f *= factorial(m[v]);
    return c_[k] * f;
}

Jet& Jet::operator+=(const Jet& o) {
    if (sp_ != o.sp_) throw Error(ErrorKind::capability, "jet spaces differ");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    if (sp_ != o.sp_) throw Error(ErrorKind::capability, "jet spaces differ");
    for (size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

Jet& Jet::operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
}

Jet& Jet::operator*=(cplx s) {
    for (auto& v : c_) v *= s;
    return *this;
}

Jet Jet::compose(const std::vector<cplx>& taylor) const {
    Jet h = *this;
    h.c_[0] = 0.0;
    Jet r(*sp_, taylor.back());
    for (int k = static_cast<int>(taylor.size()) - 2; k >= 0; --k) {
        r = r * h;
        r.c_[0] += taylor[k];
    }
    return r;
}

Jet Jet::diff(int var) const {
    if (sp_->order() == 0) throw Error(ErrorKind::capability, "cannot differentiate an order-0 jet");
    const JetSpace& lo = JetSpace::get(sp_->vars(), sp_->order() - 1);
    Jet r(lo, 0.0);
    for (int k = 0; k < lo.size(); ++k) {
        Mono m = lo.mono(k);
        m[var] += 1;
        r.c_[k] = c_[sp_->index(m)] * static_cast<double>(m[var]);
    }
    return r;
}

Jet Jet::truncate(int order) const {
    if (order == sp_->order()) return *this;
    if (order > sp_->order()) throw Error(ErrorKind::capability, "cannot raise jet order");
    const JetSpace& lo = JetSpace::get(sp_->vars(), order);
    Jet r(lo, 0.0);
    for (int k = 0; k < lo.size(); ++k) r.c_[k] = c_[sp_->index(lo.mono(k))];
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    if (&a.space() != &b.space()) throw Error(ErrorKind::capability, "jet spaces differ");
    Jet r(a.space(), 0.0);
    for (const auto& t : a.space().products()) r.coeff(t.c) += a.coeff(t.a) * b.coeff(t.b);
    return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator+(Jet a, cplx s) { return a += s; }
Jet operator+(cplx s, Jet a) { return a += s; }
Jet operator-(Jet a, cplx s) { return a += -s; }
Jet operator-(cplx s, const Jet& a) { return -a + s; }
Jet operator*(Jet a, cplx s) { return a *= s; }
Jet operator*(cplx s, Jet a) { return a *= s; }
Jet operator/(Jet a, cplx s) { return a *= 1.0 / s; }
Jet operator/(cplx s, const Jet& a) { return inv(a) * s; }

Jet inv(const Jet& u) {
    int K = u.space().order();
    cplx u0 = u.value();
    if (u0 == 0.0) throw Error(ErrorKind::evaluation, "jet division by zero");
    std::vector<cplx> t(K + 1);
    cplx p = 1.0 / u0;
    for (int k = 0; k <= K; ++k) {
        t[k] = p;
        p *= -1.0 / u0;
    }
    return u.compose(t);
}

Jet pow(const Jet& u, double e) {
    int K = u.space().order();
    cplx u0 = u.value();
    std::vector<cplx> t(K + 1);
    double binom = 1.0;
    for (int k = 0; k <= K; ++k) {
        t[k] = binom * std::pow(u0, e - k);
        binom *= (e - k) / (k + 1);
    }
    return u.compose(t);
}

Jet sqrt(const Jet& u) { return pow(u, 0.5); }

Jet exp(const Jet& u) {
    int K = u.space().order();
    cplx e0 = std::exp(u.value());
    std::vector<cplx> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = e0 / factorial(k);
    return u.compose(t);
}

Jet log(const Jet& u) {
    int K = u.space().order();
    cplx u0 = u.value();
    std::vector<cplx> t(K + 1);
    t[0] = std::log(u0);
    for (int k = 1; k <= K; ++k) t[k] = (k % 2 == 1 ? 1.0 : -1.0) / (double(k) * std::pow(u0, k));
    return u.compose(t);
}

Jet sin(const Jet& u) {
    int K = u.space().order();
    cplx s = std::sin(u.value()), c = std::cos(u.value());
    cplx cyc[4] = {s, c, -s, -c};
    std::vector<cplx> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = cyc[k % 4] / factorial(k);
    return u.compose(t);
}

Jet cos(const Jet& u) {
    int K = u.space().order();
    cplx s = std::sin(u.value()), c = std::cos(u.value());
    cplx cyc[4] = {c, -s, -c, s};
    std::vector<cplx> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = cyc[k % 4] / factorial(k);
    return u.compose(t);
}

}  // namespace dnsys
