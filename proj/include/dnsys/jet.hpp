#pragma once

// Truncated multivariate Taylor polynomials (forward-mode jets) used to obtain
// exact mixed derivatives of symbols up to a fixed total order.

#include <array>
#include <vector>

#include "dnsys/types.hpp"

namespace dnsys {

inline constexpr int kMaxJetVars = 4;
using Mono = std::array<int, kMaxJetVars>;

class JetSpace {
public:
    static const JetSpace& get(int vars, int order);

    int vars() const { return vars_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(monos_.size()); }
    const Mono& mono(int k) const { return monos_[k]; }
    int index(const Mono& m) const;  // -1 when the degree exceeds the order
    int degree(int k) const { return degree_[k]; }

    struct Triple {
        int a, b, c;
    };
    const std::vector<Triple>& products() const { return products_; }

private:
    JetSpace(int vars, int order);
    int vars_, order_;
    std::vector<Mono> monos_;
    std::vector<int> degree_;
    std::vector<int> lookup_;
    std::vector<Triple> products_;
};

class Jet {
public:
    Jet() = default;
    Jet(const JetSpace& sp, cplx value);
    static Jet variable(const JetSpace& sp, int var, double value);

    const JetSpace& space() const { return *sp_; }
    cplx value() const { return c_[0]; }
    cplx coeff(int k) const { return c_[k]; }
    cplx& coeff(int k) { return c_[k]; }
    // mixed partial derivative (not the Taylor coefficient)
    cplx derivative(const Mono& m) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator*=(cplx s);
    Jet& operator+=(cplx s) {
        c_[0] += s;
        return *this;
    }

    // f(u) where taylor[k] = f^{(k)}(u0)/k!
    Jet compose(const std::vector<cplx>& taylor) const;

    // partial derivative in one variable; the result lives one order lower
    Jet diff(int var) const;
    Jet truncate(int order) const;

private:
    const JetSpace* sp_ = nullptr;
    std::vector<cplx> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(Jet a);
Jet operator+(Jet a, cplx s);
Jet operator+(cplx s, Jet a);
Jet operator-(Jet a, cplx s);
Jet operator-(cplx s, const Jet& a);
Jet operator*(Jet a, cplx s);
Jet operator*(cplx s, Jet a);
Jet operator/(Jet a, cplx s);
Jet operator/(cplx s, const Jet& a);

Jet inv(const Jet& u);
Jet pow(const Jet& u, double t);
Jet sqrt(const Jet& u);
Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sin(const Jet& u);
Jet cos(const Jet& u);

inline cplx value_of(const Jet& u) { return u.value(); }
inline cplx value_of(cplx u) { return u; }

}  // namespace dnsys
