#include "nsa/ltreport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsa/bump.hpp"
#include "nsa/error.hpp"

namespace nsa::ltreport {

namespace {

using construct::ConstructionLedger;
using construct::LedgerEntry;

void require_verified(const ConstructionLedger& ledger, const char* what) {
    for (const auto& e : ledger.entries) {
        if (!e.verified) {
            throw InvalidLedger(std::string(what) + ": entry " + std::to_string(e.n) +
                                " is not verified against the full potential");
        }
    }
}

void require_disjoint(const ConstructionLedger& ledger, std::size_t count) {
    std::vector<const LedgerEntry*> order;
    for (std::size_t i = 0; i < count; ++i) order.push_back(&ledger.entries[i]);
    std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->t < y->t; });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        if (!(order[i + 1]->t - order[i + 1]->bump.a > order[i]->t + order[i]->bump.a)) {
            throw InvalidLedger("bump supports " + std::to_string(order[i]->n) + " and " +
                                std::to_string(order[i + 1]->n) + " overlap");
        }
    }
    if (ledger.domain.kind == construct::Domain::Kind::robin && !order.empty() &&
        !(order.front()->t - order.front()->bump.a > 0.0)) {
        throw InvalidLedger("bump support reaches the half-line boundary");
    }
}

// Integral of |V|^p over the supports of the first `count` entries (d = 1),
// sampling the potential itself rather than its closed form.
double quadrature_pth_power(const ConstructionLedger& ledger, std::size_t count) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& e = ledger.entries[i];
        const bump::PlacedBump placed{e.bump, e.t};
        const double width = 2.0 * e.bump.a;
        // Local coordinate in [0, 1]: the endpoints can be far too large for
        // the nodes to resolve the interval directly.
        auto f = [&](double u) {
            const double x = e.t - e.bump.a + width * u;
            return std::pow(std::abs(bump::potential_eval(placed, std::span<const double>(&x, 1))), ledger.p);
        };
        total += width * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0);
    }
    return total;
}

}  // namespace

std::vector<double> lt_partial_sums(const ConstructionLedger& ledger) {
    require_verified(ledger, "lt_partial_sums");
    const double exponent = ledger.p - 0.5 * ledger.d;
    std::vector<double> out;
    double sum = 0.0;
    for (const auto& e : ledger.entries) {
        sum += std::pow(std::abs(e.lambda), exponent);
        out.push_back(sum);
    }
    return out;
}

NormReport norm_budget_check(const ConstructionLedger& ledger) {
    const bool compact = ledger.d == 1 || ledger.d == 3;
    NormReport report;
    double pth = 0.0;       // sum ||U_j||_p^p (compact case)
    double p_sum = 0.0;     // sum ||U_j||_p
    double inf_max = 0.0;
    double inf_sum = 0.0;
    double minkowski = 0.0;
    double minkowski_max = 0.0;
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        const auto& e = ledger.entries[i];
        require_disjoint(ledger, i + 1);
        const double np = bump::norm_p(e.bump, ledger.p);
        const double ni = bump::norm_inf(e.bump);
        pth += std::pow(np, ledger.p);
        p_sum += np;
        inf_max = std::max(inf_max, ni);
        inf_sum += ni;
        minkowski += e.eps;
        minkowski_max += std::max(e.eps, e.delta);

        NormRow row;
        row.prefix = static_cast<long long>(i + 1);
        row.upper_bound = !compact;
        row.norm_p = compact ? std::pow(pth, 1.0 / ledger.p) : p_sum;
        row.norm_inf = compact ? inf_max : inf_sum;
        row.norm_p_quadrature = ledger.d == 1
                                    ? std::pow(quadrature_pth_power(ledger, i + 1), 1.0 / ledger.p)
                                    : std::numeric_limits<double>::quiet_NaN();
        row.minkowski = minkowski;
        row.budget = ledger.E;
        row.margin = ledger.E - std::max(row.norm_p, row.norm_inf);
        report.rows.push_back(row);
    }
    if (report.rows.empty()) {
        report.total.budget = ledger.E;
        report.total.margin = ledger.E;
        report.total.norm_p_quadrature = ledger.d == 1 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
        report.total.upper_bound = !compact;
    } else {
        report.total = report.rows.back();
    }
    report.minkowski_margin = ledger.E - minkowski_max;
    return report;
}

bool aad_holds(cplx mu, double l1_norm) { return std::sqrt(std::abs(mu)) <= 0.5 * l1_norm; }

std::vector<bool> aad_check(const ConstructionLedger& ledger) {
    if (ledger.d != 1) throw NotApplicable("aad_check: the bound is a d = 1 statement");
    std::vector<bool> out;
    for (const auto& e : ledger.entries) {
        out.push_back(aad_holds(e.bump.mu, 2.0 * e.bump.a * std::abs(e.bump.c)));
    }
    return out;
}

std::vector<CloudRow> emit_cloud(const ConstructionLedger& ledger) {
    const auto sums = lt_partial_sums(ledger);
    std::vector<CloudRow> rows;
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        const auto& e = ledger.entries[i];
        rows.push_back({e.n, e.target.num, e.target.den, e.target.m, e.lambda,
                        std::abs(e.lambda - e.target.q()), 1.0 / static_cast<double>(e.target.m), sums[i]});
    }
    return rows;
}

}  // namespace nsa::ltreport
