#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace nsa::eigensolve {

using cplx = std::complex<double>;

enum class Method { secular, transfer, grid };

std::string to_string(Method m);

/// A located eigenvalue. k is primary; mu is k*k.
struct EigenResult {
    cplx k;
    cplx mu;
    double residual = 0.0;
    Method method = Method::secular;
    double error_estimate = 0.0;  // grid only; zero for the exact oracles
};

/// Matching problem for one radial bump: constant c on the ball of radius a,
/// the d-dimensional inverse-square tail outside.
struct SecularProblem {
    int d = 1;
    cplx c{};
    double a = 1.0;
    cplx branch_ref{1.0, 0.0};  // sqrt(k^2 - c) is taken on the side of this point
};

/// sqrt(k^2 - c) on the half-plane containing `ref`.
cplx inner_wavenumber(cplx k, cplx c, cplx ref);

/// F(k) = k + i tau J_{d/2-2}(tau a) / J_{d/2-1}(tau a) - i (d-3) / (2a),
/// tau = sqrt(k^2 - c). F is even in tau, so the branch only matters for
/// staying away from tau = 0 (BranchError).
cplx secular_residual(const SecularProblem& problem, cplx k);

/// F(k) times J_{d/2-1}(z)/z^{d/2-1}, z = tau a. Entire in k, same zeros as F.
cplx secular_entire(const SecularProblem& problem, cplx k);

struct NewtonOptions {
    int max_iter = 50;
    double residual_tol = 1e-10;
    double step_tol = 1e-12;  // relative to 1 + |k|
    /// Length over which the residual varies; the difference step shrinks
    /// like 1 / (|k| length). Zero means "pick from the problem".
    double length_scale = 0.0;
};

/// Newton polish of a root of F with a central-difference derivative.
/// Throws NoConvergence (with an iteration trace) or WrongSheet (Im k <= 0).
EigenResult refine_eigen(const SecularProblem& problem, cplx k_seed,
                         const NewtonOptions& options = {});

/// Axis-aligned rectangle in the k-plane.
struct Rect {
    cplx lo;  // lower-left corner
    cplx hi;  // upper-right corner
};

/// Number of zeros of F inside the rectangle (argument principle on the
/// entire form). Throws ContourError when a zero sits on or next to the edge.
int count_zeros(const SecularProblem& problem, const Rect& box);

/// Piecewise-constant potential on the line. values[i] lives on
/// [breakpoints[i], breakpoints[i+1]]; the potential is zero outside.
/// With robin_phi set, the domain is [0, inf) with
/// cos(phi) f'(0) + sin(phi) f(0) = 0.
struct StepPotential1D {
    std::vector<double> breakpoints;
    std::vector<cplx> values;
    std::optional<double> robin_phi;
    /// Point where left and right solutions are matched; defaults to the
    /// right end of the support. Use the right edge of the bump carrying the
    /// eigenfunction: there the phase accumulated across the bump enters the
    /// mismatch damped by the decay across it.
    std::optional<double> match_at;
};

/// Throws InvalidArgument when the invariants above are violated.
void validate(const StepPotential1D& potential);

/// Propagation matrix of (f, f') across length L where f'' = (v - k^2) f.
/// Unscaled; determinant one.
struct Step2x2 {
    cplx m00, m01, m10, m11;
};
Step2x2 step_matrix(cplx k, cplx v, double length);

/// Normalised Wronskian of the solution decaying (or satisfying the Robin
/// condition) on the left and the one decaying on the right. Zero exactly
/// at eigenvalues.
cplx transfer_mismatch(const StepPotential1D& potential, cplx k);

EigenResult transfer_eigen_1d(const StepPotential1D& potential, cplx k_seed,
                              const NewtonOptions& options = {});

struct GridOptions {
    double decay_target = 1e-8;          // eigenfunction size at the Dirichlet ends
    long max_points = 4'000'000;
    double localization = 1e-3;          // reject modes living in the buffers
    int max_inverse_iterations = 200;
};

/// Finite-difference eigenvalues mu of -f'' + V f inside B(target, radius),
/// Richardson-extrapolated over grids h and h/2. Throws UnresolvedByGrid when
/// the two grids disagree by more than radius / 10 or the grid would be too
/// large.
std::vector<EigenResult> grid_oracle_1d(const StepPotential1D& potential, cplx target,
                                        double radius, const GridOptions& options = {});

/// Upper estimate of the resolvent norm of the discretised operator at each
/// z, taking the larger value over two grids. `reference` fixes the
/// truncation length (eigenfunction decay rate). Throws UnresolvedByGrid
/// when infeasible or when the grids disagree by more than 25%.
std::vector<double> grid_resolvent_norms(const StepPotential1D& potential,
                                         const std::vector<cplx>& points, cplx reference,
                                         const GridOptions& options = {});

}  // namespace nsa::eigensolve
