#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dnsys/discretize.hpp"
#include "dnsys/symbols.hpp"

namespace dnsys {

struct PlateParams {
    double eta = 2.0;
    double alpha = 0.9;
    double beta = 0.75;
    double c = 1.0;  // only used by the unreduced builder
    bool excised = true;
};

bool parabolic(const PlateParams& p);

struct PlateOrders {
    RVec l, m, r;
};

PlateOrders plate_orders(const PlateParams& p);

struct PlateSystem {
    DNSystem system;
    PlateParams params;
    PlateOrders orders;
    bool parabolic = false;
    std::string state = "u = (w, v_t, L^{1/2} v)";
};

// chi(xi) A~(xi) with the smoothstep ramp on [1, 2]; A~ itself when p.excised is false
PlateSystem build_plate_system(const PlateParams& p, int n = 1);

// A~(xi) (or chi A~) at one frequency
CMat plate_matrix(const PlateParams& p, const RVec& xi, bool excised = false);

// experimental: first-order form with the damping constant c kept,
// rows 1 scaled by 1/c
CMat unreduced_plate_matrix(const PlateParams& p, const RVec& xi);

// closed forms of det(A~[kappa](xi) - lambda E_kappa), s = |xi|
cplx plate_minor_det(const PlateParams& p, double s, cplx lambda, int kappa);

// |s - lambda|^2 >= min(1, 1 - cos theta) (s^2 + |lambda|^2)
bool plate_sector_inequality(double s, cplx lambda, double theta, double rel_tol = 1e-12);

// u_t + (A~(D) + shift) u = f(t); fields stacked by component in physical space
using PlateForcing = std::function<CVec(double t)>;

struct PlateTrajectoryRow {
    double t = 0.0;
    int mode = 0;
    double abs_u[3] = {0.0, 0.0, 0.0};
};

struct PlateTrajectory {
    std::vector<double> times;
    std::vector<CVec> states;   // Fourier coefficients (unitary DFT) at the sample times
    std::vector<double> energy;  // L2 norm at the sample times
    std::vector<PlateTrajectoryRow> rows;
    CVec final_field;  // physical space at T
};

struct EvolveConfig {
    double T = 1.0;
    int steps = 100;
    int samples = 10;  // uniform sample count after t = 0
    double shift = 0.0;
    bool unreduced = false;
};

PlateTrajectory evolve_plate(const PlateParams& p, const TorusGrid& g, const CVec& u0, const PlateForcing& f,
                             const EvolveConfig& cfg);

double plate_energy(const CVec& coefficients);

}  // namespace dnsys
