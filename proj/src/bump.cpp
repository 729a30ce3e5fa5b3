#include "nsa/bump.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"
#include "nsa/specfun.hpp"

namespace nsa::bump {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

void require_dim(int d) {
    if (d < 1) throw InvalidArgument("dimension must be a positive integer");
}

struct Verdict {
    std::optional<BumpParams> params;
    std::string failed;  // empty when feasible
};

}  // namespace

double unit_ball_volume(int d) {
    require_dim(d);
    return std::pow(kPi, 0.5 * d) / specfun::gamma_real(0.5 * d + 1.0);
}

double unit_sphere_area(int d) {
    require_dim(d);
    return 2.0 * std::pow(kPi, 0.5 * d) / specfun::gamma_real(0.5 * d);
}

double tail_strength(int d) { return std::abs(d - 3.0) * std::abs(d - 1.0) / 4.0; }

double radius_for_index(int d, double nu, long long m) {
    require_dim(d);
    if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("radius_for_index: nu must be positive");
    if (m < 0) throw InvalidArgument("radius_for_index: m must be non-negative");
    return (d * kPi / 4.0 + kPi * static_cast<double>(m)) / nu;
}

double solve_eta(double nu, double a) {
    if (!(nu > 0.0) || !(a > 0.0) || !std::isfinite(nu) || !std::isfinite(a)) {
        throw InvalidArgument("solve_eta: nu and a must be positive and finite");
    }
    // log(eta) + 2 eta a is increasing; compare in log form to avoid overflow.
    const double target = std::log(nu);
    auto excess = [&](double eta) { return std::log(eta) + 2.0 * eta * a - target; };
    double lo = std::numeric_limits<double>::min();
    double hi = nu;
    if (excess(hi) <= 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = hi / lo > 4.0 ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (excess(mid) > 0.0 ? hi : lo) = mid;
    }
    return std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi;
}

cplx boundary_wavenumber(int d, cplx tau, double a) {
    require_dim(d);
    const double order = 0.5 * d - 1.0;
    const cplx ratio = specfun::bessel_j_ratio(order, tau * a);
    return -kI * ratio * tau + kI * (d - 3.0) / (2.0 * a);
}

BumpParams bump_for_index(int d, double lambda, long long m) {
    require_dim(d);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must lie in (0, inf)");
    BumpParams b;
    b.d = d;
    b.lambda = lambda;
    b.nu = std::sqrt(lambda);
    b.m = m;
    b.a = radius_for_index(d, b.nu, m);
    b.eta = solve_eta(b.nu, b.a);
    b.tau = cplx{b.nu, b.eta};
    b.k = boundary_wavenumber(d, b.tau, b.a);
    b.mu = b.k * b.k;
    b.c = b.mu - b.tau * b.tau;
    return b;
}

double norm_p(const BumpParams& params, double p) {
    const int d = params.d;
    if (!(p > d)) throw InvalidArgument("norm_p: need p > d for the tail to be integrable");
    // Integral over the ball plus the inverse-square tail, in log form since
    // a can be astronomically large.
    const double area = unit_sphere_area(d);
    double total = 0.0;
    const double c_abs = std::abs(params.c);
    if (c_abs > 0.0) {
        total += std::exp(p * std::log(c_abs) + d * std::log(params.a) - std::log(static_cast<double>(d)));
    }
    const double tail = tail_strength(d);
    if (tail > 0.0) {
        total += std::exp(p * std::log(tail) - std::log(2.0 * p - d) - (2.0 * p - d) * std::log(params.a));
    }
    return std::pow(area * total, 1.0 / p);
}

double norm_inf(const BumpParams& params) {
    return std::max(std::abs(params.c), tail_strength(params.d) / (params.a * params.a));
}

BumpParams design_bump(int d, double p, double lambda, double eps, double delta, double r,
                       const DesignOptions& options) {
    require_dim(d);
    if (!(p > d)) throw InvalidArgument("design_bump: need p > d");
    if (!(lambda > 0.0) || !(eps > 0.0) || !(delta > 0.0) || !(r > 0.0)) {
        throw InvalidArgument("design_bump: lambda, eps, delta and r must be positive");
    }
    if (options.m_cap < 0 || options.linear_prefix < 1) {
        throw InvalidArgument("design_bump: bad search options");
    }

    auto check = [&](long long m) -> Verdict {
        // Past this the phase pi m of the Bessel argument has no fractional
        // digits left in a double.
        if (kPi * static_cast<double>(m) > 0x1p50) {
            return {std::nullopt, "index beyond double-precision phase resolution"};
        }
        BumpParams b;
        try {
            b = bump_for_index(d, lambda, m);
        } catch (const PoleError&) {
            return {std::nullopt, "boundary wavenumber (Bessel zero)"};
        } catch (const AccuracyFailure&) {
            return {std::nullopt, "boundary wavenumber (Bessel accuracy)"};
        }
        if (!(b.k.imag() > 0.0)) return {std::nullopt, "Im k > 0"};
        if (!(b.mu.imag() < 0.0)) return {std::nullopt, "Im mu < 0"};
        if (!(std::abs(b.mu - lambda) < r)) return {std::nullopt, "|mu - lambda| < r"};
        if (!(norm_p(b, p) < eps)) return {std::nullopt, "||U||_p < eps"};
        if (!(norm_inf(b) < delta)) return {std::nullopt, "||U||_inf < delta"};
        eigensolve::SecularProblem prob{d, b.c, b.a, b.tau};
        try {
            if (!(std::abs(eigensolve::secular_residual(prob, b.k)) <= options.residual_tol)) {
                return {std::nullopt, "secular residual"};
            }
        } catch (const Error&) {
            return {std::nullopt, "secular residual"};
        }
        return {b, {}};
    };

    std::string last_failed;
    const long long prefix_end = std::min(options.linear_prefix, options.m_cap + 1);
    for (long long m = 0; m < prefix_end; ++m) {
        Verdict v = check(m);
        if (v.params) return *v.params;
        last_failed = v.failed;
    }
    if (prefix_end > options.m_cap) {
        throw BudgetInfeasible("design_bump: no feasible index up to the cap (" + last_failed + ")",
                               last_failed, options.m_cap);
    }

    // Beyond the prefix every constraint improves with m: gallop, then bisect.
    long long bad = prefix_end - 1;
    long long good = -1;
    std::optional<BumpParams> found;
    for (long long step = 1;; step *= 2) {
        long long m = bad + step;
        if (m > options.m_cap || m < bad) m = options.m_cap;
        Verdict v = check(m);
        if (v.params) {
            good = m;
            found = v.params;
            break;
        }
        last_failed = v.failed;
        if (m == options.m_cap) {
            std::ostringstream msg;
            msg << "design_bump: no feasible index up to " << options.m_cap << " (last failed: "
                << last_failed << ")";
            throw BudgetInfeasible(msg.str(), last_failed, m);
        }
        bad = m;
    }
    while (good - bad > 1) {
        const long long mid = bad + (good - bad) / 2;
        Verdict v = check(mid);
        if (v.params) {
            good = mid;
            found = v.params;
        } else {
            bad = mid;
        }
    }
    return *found;
}

cplx potential_eval(const PlacedBump& placed, std::span<const double> x) {
    const int d = placed.params.d;
    if (static_cast<int>(x.size()) != d) throw InvalidArgument("potential_eval: point has wrong dimension");
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double xi = (i == d - 1) ? x[i] - placed.t : x[i];
        r2 += xi * xi;
    }
    const double r = std::sqrt(r2);
    if (r <= placed.params.a) return placed.params.c;
    return -(d - 3.0) * (d - 1.0) / (4.0 * r2);
}

cplx eigenfunction_radial(const BumpParams& params, double r) {
    if (!(r >= 0.0)) throw InvalidArgument("eigenfunction_radial: r must be non-negative");
    const int d = params.d;
    const double a = params.a;
    if (r > a) return std::exp(kI * params.k * r) / std::pow(r, 0.5 * (d - 1));
    // J_n(tau r) / r^n = tau^n Jhat_n(tau r) with Jhat_n(z) = J_n(z) / z^n.
    const double order = 0.5 * d - 1.0;
    const cplx za = params.tau * a;
    const cplx lead = std::exp(kI * params.k * a) / (std::sqrt(a) * std::pow(a, order) *
                                                   specfun::bessel_j_scaled(order, za));
    if (r == 0.0) {
        return lead / (std::pow(2.0, order) * specfun::gamma_real(0.5 * d));
    }
    return lead * specfun::bessel_j_scaled(order, params.tau * r);
}

cplx eigenfunction_eval(const BumpParams& params, double t, std::span<const double> x) {
    const int d = params.d;
    if (static_cast<int>(x.size()) != d) throw InvalidArgument("eigenfunction_eval: point has wrong dimension");
    if (!(params.k.imag() > 0.0)) throw InvalidArgument("eigenfunction_eval: need Im k > 0");
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double xi = (i == d - 1) ? x[i] - t : x[i];
        r2 += xi * xi;
    }
    return eigenfunction_radial(params, std::sqrt(r2));
}

}  // namespace nsa::bump
