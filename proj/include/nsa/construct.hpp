#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nsa/bump.hpp"
#include "nsa/eigensolve.hpp"

namespace nsa::construct {

using cplx = std::complex<double>;

/// Positive rational target q = num/den (lowest terms) with precision index m:
/// the eigenvalue must land in B(q, 1/m).
struct Target {
    long long num = 1;
    long long den = 1;
    long long m = 1;

    double q() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Target&) const = default;
};

/// Fixed bijection n >= 1 -> (Q ∩ (0, inf)) x N. n - 1 is split by the
/// Cantor pairing into (i, j); i indexes the Calkin-Wilf sequence
/// (1, 1/2, 2, 1/3, 3/2, ...) and m = j + 1.
Target enumerate_targets(long long n);

/// Inverse of enumerate_targets. Throws InvalidArgument for q <= 0, a
/// fraction not in lowest terms, m < 1, or an index that overflows.
long long target_index(const Target& target);

struct Budgets {
    double eps = 0.0;
    double delta = 0.0;
};

/// eps_n = 6E/(pi^2 n^2), delta_n = 6 min(gamma_prev, E)/(pi^2 n^2).
/// gamma_prev may be +inf.
Budgets budgets(long long n, double E, double gamma_prev);

struct Domain {
    enum class Kind { whole, robin };
    Kind kind = Kind::whole;
    double phi = 0.0;  // Robin angle in [0, pi); ignored on the whole line

    static Domain whole() { return {}; }
    static Domain robin(double phi) { return {Kind::robin, phi}; }
};

enum class TargetMode {
    enumeration,  // enumerate_targets(n)
    integers,     // q_n = n, m_n = 1
};

std::string to_string(TargetMode mode);
TargetMode target_mode_from_string(const std::string& s);

struct LedgerEntry {
    long long n = 0;
    Target target;
    double eps = 0.0;
    double delta = 0.0;
    double r = 0.0;  // design tolerance |mu - q| < r
    bump::BumpParams bump;
    double t = 0.0;
    cplx mu{};              // eigenvalue of the partial potential H_n
    double gamma = 0.0;
    bool gamma_fallback = false;
    cplx lambda{};          // eigenvalue of the full potential
    double residual = 0.0;  // mismatch at lambda
    bool verified = false;
    double dist_lambda_mu = 0.0;  // capture addends, logged separately
    double dist_mu_q = 0.0;
};

struct ConstructionLedger {
    int d = 1;
    double p = 1.5;
    double E = 1.0;
    Domain domain;
    TargetMode targets = TargetMode::enumeration;
    long long m_cap = bump::DesignOptions{}.m_cap;
    long long steps = 0;  // requested N
    std::vector<LedgerEntry> entries;
    std::optional<long long> failed_at;
    std::string failure;  // empty unless a step or the final check failed
};

/// Target used at step n under the ledger's target mode.
Target target_for(TargetMode mode, long long n);

/// 1D step potential of the first `count` entries (all when count < 0),
/// on the half-line for a Robin ledger. Requires d = 1.
eigensolve::StepPotential1D step_potential(const ConstructionLedger& ledger, long long count = -1);

struct ShiftResult {
    double t = 0.0;
    cplx k{};
    cplx mu{};
    double residual = 0.0;
    std::vector<double> deviations;  // |mu_t - mu| along the doubling sequence
};

struct ShiftOptions {
    int max_doublings = 20;
    eigensolve::NewtonOptions newton;
};

/// Doubling search for a placement t >= t_min = (rightmost support) + 2a at
/// which the combined potential keeps an eigenvalue within r of the
/// standalone one, confirmed by the next doubling moving it by less than
/// r/10. Throws ShiftSearchFailure with the observed deviations.
ShiftResult choose_shift(const ConstructionLedger& ledger, const bump::BumpParams& bump, double r,
                         const ShiftOptions& options = {});

struct GammaEstimate {
    double gamma = 0.0;
    double rho = 0.0;
    double resolvent_bound = 0.0;  // 0 when the grid could not resolve it
    bool fallback = false;
    std::string note;
};

/// Stability radius for the eigenvalue mu_n of the potential made of the
/// ledger's entries (the last of which carries mu_n): rho/(2M), with
/// rho = dist(mu_n, [0, inf))/2 and M the largest two-grid resolvent bound
/// on 16 points of |z - mu_n| = rho. Falls back to min(gamma_prev, rho/10)
/// when the grid cannot resolve the problem. Always clamped to gamma_prev.
GammaEstimate estimate_gamma(const ConstructionLedger& ledger, cplx mu_n, double gamma_prev,
                             const eigensolve::GridOptions& grid = {});

struct BuildOptions {
    TargetMode targets = TargetMode::enumeration;
    bump::DesignOptions design;
    ShiftOptions shift;
    eigensolve::GridOptions grid;
    int gamma_samples = 16;
    /// Multi-bump separation for d >= 2: exp(-Im k gap) below this.
    double separation = 1e-10;
};

/// Runs the induction for N steps. A failing step stops the run and is
/// recorded in failed_at / failure; every entry built so far is still
/// re-verified against the final potential.
ConstructionLedger build(int d, double p, double E, long long N, const Domain& domain,
                         const BuildOptions& options = {});

/// Re-locates lambda_n of every entry against the ledger's full potential
/// (transfer oracle, d = 1) and updates lambda, residual, verified and the
/// capture addends.
void reverify(ConstructionLedger& ledger, const eigensolve::NewtonOptions& newton = {});

/// Decaying wavenumber of an eigenvalue with Im mu < 0.
cplx wavenumber_of(cplx mu);

}  // namespace nsa::construct
