#pragma once

#include <complex>
#include <span>

namespace nsa::bump {

using cplx = std::complex<double>;

/// Every scalar of one radial bump carrying an eigenvalue mu near lambda.
struct BumpParams {
    int d = 1;
    double lambda = 1.0;
    double nu = 1.0;
    long long m = 0;
    double a = 0.0;
    double eta = 0.0;
    cplx tau{};
    cplx k{};
    cplx c{};
    cplx mu{};
};

/// A bump centred at t e_d.
struct PlacedBump {
    BumpParams params;
    double t = 0.0;
};

double unit_ball_volume(int d);
double unit_sphere_area(int d);

/// (d pi/4 + pi m) / nu.
double radius_for_index(int d, double nu, long long m);

/// The unique eta > 0 with eta exp(2 eta a) = nu.
double solve_eta(double nu, double a);

/// -i tau J_{d/2-2}(tau a) / J_{d/2-1}(tau a) + i (d-3) / (2a).
cplx boundary_wavenumber(int d, cplx tau, double a);

/// All scalars for index m, no constraint checks.
BumpParams bump_for_index(int d, double lambda, long long m);

struct DesignOptions {
    long long m_cap = 1'000'000'000'000'000LL;
    double residual_tol = 1e-10;
    long long linear_prefix = 4096;  // indices scanned one by one before galloping
};

/// Smallest index m whose bump satisfies ||U||_p < eps, ||U||_inf < delta,
/// |mu - lambda| < r, Im k > 0, Im mu < 0 and |F(k)| <= residual_tol.
/// Indices below linear_prefix are scanned in order; beyond it the
/// constraints are monotone in m and the search gallops then bisects.
/// Throws BudgetInfeasible naming the constraint that failed last.
BumpParams design_bump(int d, double p, double lambda, double eps, double delta, double r,
                       const DesignOptions& options = {});

/// L^p norm of the bump including its tail; needs p > d.
double norm_p(const BumpParams& params, double p);
double norm_inf(const BumpParams& params);

/// The tail coefficient |d-3||d-1|/4.
double tail_strength(int d);

/// x has d components. c on the closed ball, inverse-square tail outside.
cplx potential_eval(const PlacedBump& placed, std::span<const double> x);

/// The radial eigenfunction g(|x - t e_d|), continuous with its derivative
/// at the sphere.
cplx eigenfunction_eval(const BumpParams& params, double t, std::span<const double> x);

/// Radial profile g(r), r >= 0.
cplx eigenfunction_radial(const BumpParams& params, double r);

}  // namespace nsa::bump
