#include <algorithm>
#include <cmath>
#include <sstream>

#include "newton.hpp"
#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"

namespace nsa::eigensolve {

namespace {

constexpr cplx kI{0.0, 1.0};

// Solution near a point x as A e^{i kappa (y - x)} + B e^{-i kappa (y - x)}.
struct Waves {
    cplx a, b;
};

cplx local_wavenumber(cplx k, cplx v) {
    const cplx kappa = std::sqrt(k * k - v);
    const cplx other = -kappa;
    return std::abs(kappa - k) <= std::abs(other - k) ? kappa : other;
}

void normalise(Waves& w) {
    const double n = std::abs(w.a) + std::abs(w.b);
    if (n > 0.0 && std::isfinite(n)) {
        w.a /= n;
        w.b /= n;
    }
}

// Moves the reference point by `length` inside a constant region, scaled
// by exp(-|Im kappa length|) to stay finite.
Waves shift(Waves w, cplx kappa, double length) {
    if (length == 0.0) return w;
    const cplx theta = kappa * length;
    const double s = std::abs(theta.imag());
    w.a *= std::exp(cplx{-theta.imag() - s, theta.real()});
    w.b *= std::exp(cplx{theta.imag() - s, -theta.real()});
    normalise(w);
    return w;
}

// Continuity of f and f' across an interface. The wavenumber jump is taken
// from the potential jump so it keeps full relative accuracy when it is tiny.
Waves cross(Waves w, cplx k_from, cplx v_from, cplx k_to, cplx v_to) {
    const cplx sum = k_to + k_from;
    if (std::abs(k_to) < 1e-300 || sum == cplx{}) {
        throw BranchError("transfer: degenerate local wavenumber at an interface");
    }
    const cplx diff = (v_from - v_to) / sum;  // k_to - k_from
    Waves out{(sum * w.a + diff * w.b) / (2.0 * k_to), (diff * w.a + sum * w.b) / (2.0 * k_to)};
    normalise(out);
    return out;
}

double default_match(const StepPotential1D& p) {
    if (p.match_at) return *p.match_at;
    if (p.breakpoints.empty()) return 0.0;
    return p.breakpoints.back();
}

}  // namespace

void validate(const StepPotential1D& p) {
    if (p.breakpoints.empty()) {
        if (!p.values.empty()) throw InvalidArgument("step potential: values without breakpoints");
    } else if (p.values.size() + 1 != p.breakpoints.size()) {
        throw InvalidArgument("step potential: need one value per interval");
    }
    for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i) {
        if (!(p.breakpoints[i + 1] > p.breakpoints[i])) {
            throw InvalidArgument("step potential: breakpoints must increase strictly");
        }
    }
    for (double b : p.breakpoints) {
        if (!std::isfinite(b)) throw InvalidArgument("step potential: non-finite breakpoint");
    }
    if (p.robin_phi) {
        if (!std::isfinite(*p.robin_phi)) throw InvalidArgument("step potential: non-finite Robin angle");
        if (!p.breakpoints.empty() && !(p.breakpoints.front() > 0.0)) {
            throw InvalidArgument("step potential: half-line support must start at x > 0");
        }
    }
}

Step2x2 step_matrix(cplx k, cplx v, double length) {
    const cplx kappa = std::sqrt(k * k - v);
    const cplx theta = kappa * length;
    const cplx c = std::cos(theta);
    const cplx s = std::sin(theta);
    const cplx sinc_l = std::abs(theta) < 1e-4
                            ? length * (1.0 - theta * theta / 6.0)
                            : s / kappa;
    return {c, sinc_l, -kappa * s, c};
}

cplx transfer_mismatch(const StepPotential1D& p, cplx k) {
    validate(p);
    const auto& b = p.breakpoints;
    const std::size_t nb = b.size();
    const double left_end = p.robin_phi ? 0.0 : (b.empty() ? 0.0 : b.front());
    const double right_end = b.empty() ? left_end : b.back();
    const double xm = std::clamp(default_match(p), left_end, right_end);
    // Region i is [b_i, b_{i+1}); region nb - 1 (and "before b_0") are free.
    auto value = [&](std::size_t region) { return region + 1 < nb ? p.values[region] : cplx{}; };

    // Left solution: decaying e^{-ikx} on the left, or the Robin data at 0.
    Waves left{0.0, 1.0};
    cplx kappa = k;
    cplx v = 0.0;
    double x = left_end;
    if (p.robin_phi) {
        const double f = std::cos(*p.robin_phi);
        const double df = -std::sin(*p.robin_phi);
        const cplx g = df / (cplx{0.0, 1.0} * k);
        left = {0.5 * (f + g), 0.5 * (f - g)};
        normalise(left);
    }
    for (std::size_t i = 0; i < nb && b[i] <= xm; ++i) {
        left = shift(left, kappa, b[i] - x);
        x = b[i];
        const cplx v_next = value(i);
        const cplx kappa_next = local_wavenumber(k, v_next);
        left = cross(left, kappa, v, kappa_next, v_next);
        kappa = kappa_next;
        v = v_next;
    }
    left = shift(left, kappa, xm - x);

    // Right solution: decaying e^{ikx} beyond the last breakpoint, swept back.
    Waves right{1.0, 0.0};
    kappa = k;
    v = 0.0;
    x = right_end;
    for (std::size_t i = nb; i-- > 0 && b[i] > xm;) {
        right = shift(right, kappa, b[i] - x);
        x = b[i];
        const cplx v_next = i > 0 ? value(i - 1) : cplx{};
        const cplx kappa_next = local_wavenumber(k, v_next);
        right = cross(right, kappa, v, kappa_next, v_next);
        kappa = kappa_next;
        v = v_next;
    }
    right = shift(right, kappa, xm - x);

    // Wronskian / (2 i kappa), normalised by the coefficient sizes.
    const cplx w = right.a * left.b - left.a * right.b;
    return w / ((std::abs(left.a) + std::abs(left.b)) * (std::abs(right.a) + std::abs(right.b)));
}

EigenResult transfer_eigen_1d(const StepPotential1D& p, cplx k_seed, const NewtonOptions& options) {
    validate(p);
    if (!(k_seed.imag() > 0.0)) throw InvalidArgument("transfer_eigen_1d: seed needs Im k > 0");
    double length = options.length_scale;
    if (!(length > 0.0)) {
        length = 1.0;
        for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i) {
            if (p.values[i] != cplx{}) length = std::max(length, p.breakpoints[i + 1] - p.breakpoints[i]);
        }
    }
    auto f = [&](cplx k) { return transfer_mismatch(p, k); };
    EigenResult r = detail::newton_solve(f, k_seed, length, options, Method::transfer, "transfer_eigen_1d");
    return r;
}

}  // namespace nsa::eigensolve
