#pragma once

#include <complex>
#include <vector>

#include "nsa/construct.hpp"

namespace nsa::ltreport {

using cplx = std::complex<double>;

/// S_N = sum_{n <= N} |lambda_n|^{p - d/2} for N = 1..entries, each
/// eigenvalue counted once. Throws InvalidLedger if any entry is unverified.
std::vector<double> lt_partial_sums(const construct::ConstructionLedger& ledger);

struct NormRow {
    long long prefix = 0;         // number of leading entries included
    double norm_p = 0.0;          // closed form
    double norm_p_quadrature = 0.0;  // d = 1 only; NaN otherwise
    double norm_inf = 0.0;
    double minkowski = 0.0;       // sum of eps_j
    double budget = 0.0;
    double margin = 0.0;          // budget - max(norm_p, norm_inf)
    bool upper_bound = false;     // overlapping tails (d = 2, d >= 4): norms are triangle bounds
};

struct NormReport {
    std::vector<NormRow> rows;  // one per prefix; the last is the full ledger
    NormRow total;
    double minkowski_margin = 0.0;  // budget - sum_j max(eps_j, delta_j)
};

/// Norms of the truncated potential for every prefix of the ledger. For
/// d in {1, 3} the supports are disjoint so ||V||_p^p and ||V||_inf are
/// exact sums and maxima; otherwise the triangle inequality is used. For
/// d = 1 the L^p norm is also integrated numerically. Throws InvalidLedger
/// on overlapping supports.
NormReport norm_budget_check(const construct::ConstructionLedger& ledger);

/// |mu|^{1/2} <= ||V||_1 / 2.
bool aad_holds(cplx mu, double l1_norm);

/// Per-bump verdicts for the standalone eigenvalues; d = 1 only
/// (NotApplicable otherwise).
std::vector<bool> aad_check(const construct::ConstructionLedger& ledger);

struct CloudRow {
    long long n = 0;
    long long q_num = 0;
    long long q_den = 1;
    long long m = 1;
    cplx lambda{};
    double dist_to_target = 0.0;
    double capture_radius = 0.0;
    double lt_partial_sum = 0.0;
};

/// One row per entry; requires a verified ledger.
std::vector<CloudRow> emit_cloud(const construct::ConstructionLedger& ledger);

}  // namespace nsa::ltreport
