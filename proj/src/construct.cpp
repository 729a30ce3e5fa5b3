#include "nsa/construct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nsa/error.hpp"

namespace nsa::construct {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest w with w (w + 1) / 2 <= z.
long long triangle_root(long long z) {
    auto w = static_cast<long long>((std::sqrt(8.0L * static_cast<long double>(z) + 1.0L) - 1.0L) / 2.0L);
    while (w > 0 && w * (w + 1) / 2 > z) --w;
    while ((w + 1) * (w + 2) / 2 <= z) ++w;
    return w;
}

// Calkin-Wilf term i (0-based): walk the tree along the bits of i + 1 after
// the leading one, 0 -> a/(a+b), 1 -> (a+b)/b.
std::pair<long long, long long> calkin_wilf(long long i) {
    const unsigned long long code = static_cast<unsigned long long>(i) + 1;
    int top = 63;
    while (!((code >> top) & 1ULL)) --top;
    long long a = 1, b = 1;
    for (int bit = top - 1; bit >= 0; --bit) {
        if ((code >> bit) & 1ULL) {
            a += b;
        } else {
            b += a;
        }
    }
    return {a, b};
}

double dist_to_half_line(cplx z) { return z.real() >= 0.0 ? std::abs(z.imag()) : std::abs(z); }

double rightmost_support(const ConstructionLedger& ledger) {
    double right = 0.0;
    for (const auto& e : ledger.entries) right = std::max(right, e.t + e.bump.a);
    return right;
}

// Appends a bump to a step potential whose support lies to its left.
void append_bump(eigensolve::StepPotential1D& pot, double left, double right, cplx c) {
    if (!pot.breakpoints.empty()) {
        if (!(left > pot.breakpoints.back())) throw InvalidLedger("bump supports overlap or touch");
        pot.values.push_back(0.0);
    }
    pot.breakpoints.push_back(left);
    pot.breakpoints.push_back(right);
    pot.values.push_back(c);
}

std::vector<cplx> locate_all(const ConstructionLedger& ledger, const std::vector<cplx>& seeds_mu,
                             const eigensolve::NewtonOptions& newton) {
    std::vector<cplx> out;
    if (ledger.entries.empty()) return out;
    auto pot = step_potential(ledger);
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        const auto& e = ledger.entries[i];
        pot.match_at = e.t + e.bump.a;
        const auto res = eigensolve::transfer_eigen_1d(pot, wavenumber_of(seeds_mu[i]), newton);
        out.push_back(res.mu);
    }
    return out;
}

}  // namespace

Target enumerate_targets(long long n) {
    if (n < 1) throw InvalidArgument("enumerate_targets: n must be at least 1");
    const long long z = n - 1;
    const long long w = triangle_root(z);
    const long long j = z - w * (w + 1) / 2;
    const long long i = w - j;
    const auto [a, b] = calkin_wilf(i);
    return {a, b, j + 1};
}

long long target_index(const Target& target) {
    if (target.num < 1 || target.den < 1 || target.m < 1) {
        throw InvalidArgument("target_index: need positive q and m >= 1");
    }
    if (std::gcd(target.num, target.den) != 1) throw InvalidArgument("target_index: q not in lowest terms");
    // Climb the Calkin-Wilf tree to the root, collecting the path bits.
    unsigned long long code = 0;
    int depth = 0;
    long long a = target.num, b = target.den;
    std::vector<int> bits;
    while (!(a == 1 && b == 1)) {
        if (a > b) {
            bits.push_back(1);
            a -= b;
        } else {
            bits.push_back(0);
            b -= a;
        }
        if (++depth > 62) throw InvalidArgument("target_index: Calkin-Wilf index overflows");
    }
    code = 1;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) code = (code << 1) | static_cast<unsigned>(*it);
    const long long i = static_cast<long long>(code - 1);
    const long long j = target.m - 1;
    const long double w = static_cast<long double>(i) + static_cast<long double>(j);
    if (w * (w + 1) / 2 + j > 9.0e18L) throw InvalidArgument("target_index: pairing overflows");
    const long long wi = i + j;
    return wi * (wi + 1) / 2 + j + 1;
}

Budgets budgets(long long n, double E, double gamma_prev) {
    if (n < 1) throw InvalidArgument("budgets: n must be at least 1");
    if (!(E > 0.0) || !std::isfinite(E)) throw InvalidArgument("budgets: E must be positive");
    if (!(gamma_prev > 0.0)) throw InvalidArgument("budgets: gamma_prev must be positive or infinite");
    const double scale = 6.0 / (kPi * kPi * static_cast<double>(n) * static_cast<double>(n));
    return {scale * E, scale * std::min(gamma_prev, E)};
}

std::string to_string(TargetMode mode) {
    return mode == TargetMode::integers ? "integers" : "enumeration";
}

TargetMode target_mode_from_string(const std::string& s) {
    if (s == "enumeration") return TargetMode::enumeration;
    if (s == "integers") return TargetMode::integers;
    throw InvalidArgument("unknown target mode '" + s + "' (expected enumeration or integers)");
}

Target target_for(TargetMode mode, long long n) {
    if (mode == TargetMode::integers) {
        if (n < 1) throw InvalidArgument("target_for: n must be at least 1");
        return {n, 1, 1};
    }
    return enumerate_targets(n);
}

cplx wavenumber_of(cplx mu) {
    const cplx k = std::sqrt(mu);
    return k.imag() < 0.0 ? -k : k;
}

eigensolve::StepPotential1D step_potential(const ConstructionLedger& ledger, long long count) {
    if (ledger.d != 1) throw NotApplicable("step potential only exists for d = 1");
    const std::size_t n = count < 0 ? ledger.entries.size()
                                    : std::min<std::size_t>(static_cast<std::size_t>(count), ledger.entries.size());
    std::vector<const LedgerEntry*> order;
    for (std::size_t i = 0; i < n; ++i) order.push_back(&ledger.entries[i]);
    std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->t < y->t; });
    eigensolve::StepPotential1D pot;
    for (const LedgerEntry* e : order) append_bump(pot, e->t - e->bump.a, e->t + e->bump.a, e->bump.c);
    if (ledger.domain.kind == Domain::Kind::robin) {
        pot.robin_phi = ledger.domain.phi;
        if (!pot.breakpoints.empty() && !(pot.breakpoints.front() > 0.0)) {
            throw InvalidLedger("bump support reaches the half-line boundary");
        }
    }
    return pot;
}

ShiftResult choose_shift(const ConstructionLedger& ledger, const bump::BumpParams& bump, double r,
                         const ShiftOptions& options) {
    if (ledger.d != 1 || bump.d != 1) throw NotApplicable("choose_shift: transfer oracle needs d = 1");
    if (!(r > 0.0)) throw InvalidArgument("choose_shift: r must be positive");
    const auto base = step_potential(ledger);
    const double t_min = rightmost_support(ledger) + 2.0 * bump.a;

    struct Sample {
        double t;
        eigensolve::EigenResult res;
        bool ok;
    };
    auto solve_at = [&](double t) -> Sample {
        auto pot = base;
        append_bump(pot, t - bump.a, t + bump.a, bump.c);
        pot.match_at = t + bump.a;
        try {
            return {t, eigensolve::transfer_eigen_1d(pot, bump.k, options.newton), true};
        } catch (const Error&) {
            return {t, {}, false};
        }
    };

    ShiftResult out;
    Sample prev = solve_at(t_min);
    out.deviations.push_back(prev.ok ? std::abs(prev.res.mu - bump.mu) : kInf);
    for (int j = 1; j <= options.max_doublings; ++j) {
        Sample cur = solve_at(std::ldexp(t_min, j));
        out.deviations.push_back(cur.ok ? std::abs(cur.res.mu - bump.mu) : kInf);
        if (prev.ok && cur.ok && out.deviations[j - 1] < r && std::abs(cur.res.mu - prev.res.mu) < r / 10.0) {
            out.t = prev.t;
            out.k = prev.res.k;
            out.mu = prev.res.mu;
            out.residual = prev.res.residual;
            return out;
        }
        prev = cur;
    }
    std::ostringstream msg;
    msg << "choose_shift: no stable placement within " << options.max_doublings << " doublings (r = " << r
        << ")";
    throw ShiftSearchFailure(msg.str(), out.deviations);
}

GammaEstimate estimate_gamma(const ConstructionLedger& ledger, cplx mu_n, double gamma_prev,
                             const eigensolve::GridOptions& grid) {
    if (!(gamma_prev > 0.0)) throw InvalidArgument("estimate_gamma: gamma_prev must be positive");
    GammaEstimate g;
    g.rho = dist_to_half_line(mu_n) / 2.0;
    if (!(g.rho > 0.0)) throw InvalidArgument("estimate_gamma: mu_n lies on [0, inf)");
    auto fallback = [&](std::string why) {
        g.fallback = true;
        g.gamma = std::min(gamma_prev, g.rho / 10.0);
        g.note = std::move(why);
        return g;
    };
    if (ledger.d != 1) return fallback("no resolvent oracle for d >= 2");

    constexpr int kSamples = 16;
    std::vector<cplx> points;
    for (int j = 0; j < kSamples; ++j) points.push_back(mu_n + std::polar(g.rho, 2.0 * kPi * j / kSamples));
    try {
        const auto norms = eigensolve::grid_resolvent_norms(step_potential(ledger), points, mu_n, grid);
        g.resolvent_bound = *std::max_element(norms.begin(), norms.end());
    } catch (const UnresolvedByGrid& e) {
        return fallback(e.what());
    }
    g.gamma = std::min(gamma_prev, g.rho / (2.0 * g.resolvent_bound));
    return g;
}

void reverify(ConstructionLedger& ledger, const eigensolve::NewtonOptions& newton) {
    if (ledger.entries.empty()) return;
    if (ledger.d != 1) {
        // Standalone bumps only; multi-bump eigenvalues are never claimed.
        for (auto& e : ledger.entries) {
            e.lambda = e.mu;
            e.verified = false;
            e.dist_lambda_mu = 0.0;
            e.dist_mu_q = std::abs(e.mu - e.target.q());
        }
        return;
    }
    const auto full = step_potential(ledger);
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        auto& e = ledger.entries[i];
        auto pot = full;
        pot.match_at = e.t + e.bump.a;
        e.dist_mu_q = std::abs(e.mu - e.target.q());
        try {
            const auto res = eigensolve::transfer_eigen_1d(pot, wavenumber_of(e.mu), newton);
            e.lambda = res.mu;
            e.residual = res.residual;
            e.verified = res.mu.imag() < 0.0 &&
                         std::abs(res.mu - e.target.q()) < 1.0 / static_cast<double>(e.target.m);
        } catch (const Error&) {
            e.lambda = e.mu;
            e.residual = std::abs(eigensolve::transfer_mismatch(pot, wavenumber_of(e.mu)));
            e.verified = false;
        }
        e.dist_lambda_mu = std::abs(e.lambda - e.mu);
    }
    // Two entries must not have collapsed onto the same eigenvalue.
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            auto& a = ledger.entries[i];
            const auto& b = ledger.entries[j];
            if (std::abs(a.lambda - b.lambda) <= 1e-12 * std::abs(a.lambda)) a.verified = false;
        }
    }
}

ConstructionLedger build(int d, double p, double E, long long N, const Domain& domain,
                         const BuildOptions& options) {
    if (d < 1) throw InvalidArgument("build: dimension must be positive");
    if (!(p > d)) throw InvalidArgument("build: need p > d");
    if (!(E > 0.0) || !std::isfinite(E)) throw InvalidArgument("build: budget must be positive");
    if (N < 0) throw InvalidArgument("build: step count must be non-negative");
    if (domain.kind == Domain::Kind::robin) {
        if (d != 1) throw InvalidArgument("build: the Robin half-line is only supported for d = 1");
        if (!(domain.phi >= 0.0 && domain.phi < kPi)) throw InvalidArgument("build: phi must lie in [0, pi)");
    }

    ConstructionLedger ledger;
    ledger.d = d;
    ledger.p = p;
    ledger.E = E;
    ledger.domain = domain;
    ledger.targets = options.targets;
    ledger.m_cap = options.design.m_cap;
    ledger.steps = N;

    double gamma_prev = kInf;
    std::vector<cplx> current;  // eigenvalues of H_{n-1}, one per entry
    for (long long n = 1; n <= N; ++n) {
        try {
            LedgerEntry e;
            e.n = n;
            e.target = target_for(options.targets, n);
            const Budgets b = budgets(n, E, gamma_prev);
            e.eps = b.eps;
            e.delta = b.delta;
            const double q = e.target.q();
            double dist = kInf;
            for (const cplx& lam : current) dist = std::min(dist, std::abs(lam - q));
            e.r = std::min(dist / 2.0, 1.0 / (4.0 * static_cast<double>(e.target.m)));
            e.bump = bump::design_bump(d, p, q, e.eps, e.delta, e.r, options.design);

            if (d == 1) {
                for (const cplx& lam : current) {
                    if (!(std::abs(e.bump.mu - lam) > e.r)) {
                        throw AccuracyFailure("standalone eigenvalue within r of an existing one",
                                              std::abs(e.bump.mu - lam));
                    }
                }
                const ShiftResult s = choose_shift(ledger, e.bump, e.r, options.shift);
                e.t = s.t;
                e.mu = s.mu;
            } else {
                // Separation heuristic along the last axis.
                const double rightmost = rightmost_support(ledger);
                double t = rightmost + 2.0 * e.bump.a;
                int doublings = 0;
                while (!ledger.entries.empty() &&
                       std::exp(-e.bump.k.imag() * (t - e.bump.a - rightmost)) >= options.separation) {
                    if (++doublings > options.shift.max_doublings) {
                        throw ShiftSearchFailure("separation heuristic not met", {});
                    }
                    t *= 2.0;
                }
                e.t = t;
                e.mu = e.bump.mu;
            }
            const double capture = 1.0 / (2.0 * static_cast<double>(e.target.m));
            if (!(e.mu.imag() < 0.0) || !(std::abs(e.mu - q) < capture)) {
                std::ostringstream msg;
                msg << "mu_" << n << " = " << e.mu << " misses B(q, 1/(2m)) or the lower half-plane";
                throw AccuracyFailure(msg.str(), std::abs(e.mu - q));
            }

            ledger.entries.push_back(e);
            const GammaEstimate g = estimate_gamma(ledger, e.mu, gamma_prev, options.grid);
            ledger.entries.back().gamma = g.gamma;
            ledger.entries.back().gamma_fallback = g.fallback;
            gamma_prev = g.gamma;

            if (d == 1) {
                std::vector<cplx> seeds = current;
                seeds.push_back(e.mu);
                current = locate_all(ledger, seeds, options.shift.newton);
            }
        } catch (const Error& err) {
            ledger.failed_at = n;
            ledger.failure = err.what();
            break;
        }
    }

    reverify(ledger, options.shift.newton);
    if (!ledger.failed_at && d == 1) {
        for (const auto& e : ledger.entries) {
            if (!e.verified) {
                ledger.failure = "re-verification failed for entry " + std::to_string(e.n);
                break;
            }
        }
    }
    return ledger;
}

}  // namespace nsa::construct
