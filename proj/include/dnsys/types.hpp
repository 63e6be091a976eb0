#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace dnsys {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
    input,
    resource,
    capability,
    not_found,
    numerical,
    singularity,
    evaluation,
    quadrature,
    fit,
    domain,
    contour,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    const char* kind_name() const;

private:
    ErrorKind kind_;
};

// Exit status used by the CLI: 2 for input-type problems, 3 for numerical ones.
int exit_code_for(ErrorKind kind);

inline double bracket(const RVec& xi) { return std::sqrt(1.0 + xi.squaredNorm()); }

}  // namespace dnsys
