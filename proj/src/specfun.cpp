#include "nsa/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "nsa/error.hpp"

namespace nsa::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;
constexpr double kSeriesRadius = 8.0;
constexpr double kAsymptoticRadius = 30.0;
constexpr int kSeriesCap = 400;
constexpr int kFractionCap = 100000;
constexpr cplx kI{0.0, 1.0};

struct Estimate {
    cplx value;
    double abs_error;  // absolute error estimate
};

bool is_integer(double v) { return v == std::nearbyint(v); }

void require_finite(double order, cplx z) {
    if (!std::isfinite(order) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        std::ostringstream msg;
        msg << "bessel: non-finite input (order=" << order << ", z=" << z << ")";
        throw InvalidArgument(msg.str());
    }
}

// Rough size of J_order near z, used to turn absolute error estimates into
// relative ones that stay meaningful at the zeros.
double envelope(double order, cplx z) {
    const double r = std::abs(z);
    if (r == 0.0) return order == 0.0 ? 1.0 : 0.0;
    const double grow = std::exp(std::abs(z.imag()));
    const double small =
        std::abs(std::pow(0.5 * r, order) / std::tgamma(order + 1.0));
    const double large = std::sqrt(2.0 / (kPi * r));
    const double lead = std::isfinite(small) ? std::min(small, large) : large;
    return grow * lead;
}

// Ascending series; order must not be a negative integer.
Estimate series(double order, cplx z) {
    const cplx half = 0.5 * z;
    const cplx q = -half * half;
    cplx term = 1.0;
    cplx sum = 1.0;
    double sum_sq = 1.0;
    bool converged = false;
    for (int k = 1; k < kSeriesCap; ++k) {
        term *= q / (static_cast<double>(k) * (order + k));
        sum += term;
        sum_sq += std::norm(term);
        if (k > std::abs(half) && std::abs(term) <= 0.25 * kEps * std::abs(sum)) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw AccuracyFailure("bessel series did not converge", std::abs(term) / std::abs(sum));
    }
    cplx lead;
    if (z == cplx{}) {
        if (order == 0.0) {
            lead = 1.0;
        } else if (order > 0.0) {
            lead = 0.0;
        } else {
            throw InvalidArgument("bessel: J_order(0) is unbounded for negative non-integer order");
        }
    } else {
        lead = std::pow(half, order) / std::tgamma(order + 1.0);
    }
    return {lead * sum, 4.0 * kEps * std::abs(lead) * (std::sqrt(sum_sq) + std::abs(sum))};
}

// Hankel expansion coefficients P(order, z), Q(order, z); terminates for
// half-integer order. Returns the size of the last retained term.
double hankel_pq(double order, cplx z, cplx& p, cplx& q) {
    const double mu = 4.0 * order * order;
    p = 1.0;
    q = 0.0;
    cplx term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double factor = (mu - odd * odd) / (8.0 * k);
        if (factor == 0.0) return 0.0;
        const cplx next = term * factor / z;
        const double size = std::abs(next);
        if (size > last) return last;  // asymptotic series turning point
        term = next;
        last = size;
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            default: p += term; break;
        }
        if (size < 0.1 * kEps) return size;
    }
    return last;
}

Estimate hankel(double order, cplx z) {
    cplx p, q;
    const double tail = hankel_pq(order, z, p, q);
    const cplx chi = z - (0.5 * order + 0.25) * kPi;
    const cplx pref = std::sqrt(2.0 / (kPi * z));
    const cplx c = std::cos(chi);
    const cplx s = std::sin(chi);
    const cplx value = pref * (p * c - q * s);
    const double scale = std::abs(pref) * (std::abs(p * c) + std::abs(q * s));
    const double trunc = std::abs(pref) * tail * (std::abs(c) + std::abs(s));
    return {value, 4.0 * kEps * scale + trunc};
}

// Miller backward recurrence normalised by
//   exp(-iz) (z/2)^v = Gamma(v) sum_k (v+k) (-i)^k (2v)_k / k! J_{v+k}(z),
// which grows like exp(Im z) for Im z >= 0 and so does not cancel.
Estimate miller(double order, cplx z) {
    const bool flip = std::signbit(z.imag());
    if (flip) z = std::conj(z);

    const double base = order - std::ceil(order) + 1.0;  // in (0, 1]
    const long shift = std::lround(order - base);
    const long n_top = std::max(shift, 0L) + static_cast<long>(std::abs(z)) + 60;

    std::vector<cplx> j(static_cast<std::size_t>(n_top) + 2);
    j[n_top + 1] = 0.0;
    j[n_top] = 1.0;
    for (long n = n_top; n >= 1; --n) {
        j[n - 1] = (2.0 * (base + n) / z) * j[n] - j[n + 1];
        if (std::abs(j[n - 1]) > 1e200) {
            for (long m = n - 1; m <= n_top + 1; ++m) j[m] *= 1e-200;
        }
    }

    cplx sum = 0.0;
    double sum_sq = 0.0;
    double coef = 1.0;  // (2 base)_k / k!
    cplx phase = 1.0;   // (-i)^k
    for (long k = 0; k <= n_top; ++k) {
        const cplx term = (base + k) * coef * phase * j[k];
        sum += term;
        sum_sq += std::norm(term);
        coef *= (2.0 * base + k) / (k + 1.0);
        phase *= -kI;
    }
    const double g = std::tgamma(base);
    sum *= g;
    const cplx scale = std::exp(-kI * z) * std::pow(0.5 * z, base) / sum;

    cplx value;
    if (shift >= 0) {
        value = j[shift] * scale;
    } else {
        cplx upper = j[1] * scale;
        cplx current = j[0] * scale;
        for (long step = 0; step < -shift; ++step) {
            const double mu = base - step;
            const cplx lower = (2.0 * mu / z) * current - upper;
            upper = current;
            current = lower;
        }
        value = current;
    }
    if (flip) value = std::conj(value);
    // Relative rounding in the normalising sum (a random walk over its
    // terms) carried into the value, plus the recurrence's own rounding
    // measured against the neighbouring terms.
    const double amplification = g * std::sqrt(sum_sq) / std::abs(sum);
    const std::size_t at = static_cast<std::size_t>(std::max(shift, 0L));
    const double neighbours = std::abs(scale) * (std::abs(j[at]) + std::abs(j[at + 1]));
    const double err = 4.0 * kEps * (std::abs(value) * amplification + neighbours) *
                       std::sqrt(1.0 + std::abs(shift));
    return {value, err};
}

Estimate evaluate(double order, cplx z) {
    if (order < 0.0 && is_integer(order)) {
        Estimate e = evaluate(-order, z);
        if (std::fmod(-order, 2.0) != 0.0) e.value = -e.value;
        return e;
    }
    const double r = std::abs(z);
    if (r <= kSeriesRadius) return series(order, z);
    if (r < kAsymptoticRadius) return miller(order, z);
    if (z.real() < 0.0) {
        Estimate e = hankel(order, -z);
        const double sign = std::signbit(z.imag()) ? -1.0 : 1.0;
        e.value *= std::exp(sign * kI * kPi * order);
        return e;
    }
    return hankel(order, z);
}

cplx ratio_from_hankel(double order, cplx z) {
    cplx p, q, p1, q1;
    hankel_pq(order, z, p, q);
    hankel_pq(order - 1.0, z, p1, q1);
    const cplx chi = z - (0.5 * order + 0.25) * kPi;
    const cplx c = std::cos(chi);
    const cplx s = std::sin(chi);
    // chi_{order-1} = chi + pi/2
    const cplx num = -p1 * s - q1 * c;
    const cplx den = p * c - q * s;
    if (den == cplx{}) throw PoleError("bessel ratio: exact zero of J_order", 0.0);
    return num / den;
}

cplx ratio_from_fraction(double order, cplx z) {
    // J_{v+1}/J_v = 1 / (b_1 - 1/(b_2 - 1/(b_3 - ...))), b_j = 2(v+j)/z
    constexpr double tiny = 1e-300;
    auto b = [&](int jj) { return 2.0 * (order + jj) / z; };
    cplx f = b(1);
    if (f == cplx{}) f = tiny;
    cplx c = f;
    cplx d = 0.0;
    bool converged = false;
    cplx delta = 0.0;
    for (int jj = 2; jj < kFractionCap; ++jj) {
        const cplx bj = b(jj);
        d = bj - d;
        if (d == cplx{}) d = tiny;
        c = bj - 1.0 / c;
        if (c == cplx{}) c = tiny;
        d = 1.0 / d;
        delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw AccuracyFailure("bessel ratio: continued fraction did not converge",
                              std::abs(delta - 1.0));
    }
    return 2.0 * order / z - 1.0 / f;
}

}  // namespace

cplx bessel_j(const BesselQuery& query) {
    require_finite(query.order, query.z);
    if (!(query.accuracy_target > 0.0) || query.accuracy_target > 1e-6) {
        throw InvalidArgument("bessel: accuracy_target must lie in (0, 1e-6]");
    }
    const Estimate e = evaluate(query.order, query.z);
    const double env = std::max(std::abs(e.value), envelope(query.order, query.z));
    const double rel = env > 0.0 ? e.abs_error / env : 0.0;
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag())) {
        throw AccuracyFailure("bessel: non-finite result", rel);
    }
    if (rel > query.accuracy_target) {
        std::ostringstream msg;
        msg << "bessel: estimated error " << rel << " exceeds target " << query.accuracy_target
            << " (order=" << query.order << ", z=" << query.z << ")";
        throw AccuracyFailure(msg.str(), rel);
    }
    return e.value;
}

cplx bessel_j(double order, cplx z) { return bessel_j(BesselQuery{order, z, 1e-10}); }

cplx bessel_j_ratio(double order, cplx z) {
    require_finite(order, z);
    if (z == cplx{}) {
        if (order == 0.0) return 0.0;  // J_{-1}(0) / J_0(0)
        throw PoleError("bessel ratio: J_order vanishes or diverges at z = 0", 0.0);
    }
    cplx ratio;
    if (std::abs(z) >= kAsymptoticRadius) {
        ratio = z.real() < 0.0 ? -ratio_from_hankel(order, -z) : ratio_from_hankel(order, z);
    } else {
        ratio = ratio_from_fraction(order, z);
    }
    // Near a zero z0 of J_order, J_order / J_{order-1} ~ z - z0.
    const double distance = 1.0 / std::abs(ratio);
    if (!std::isfinite(std::abs(ratio)) || distance < 4.0 * kEps * (1.0 + std::abs(z))) {
        std::ostringstream msg;
        msg << "bessel ratio: z=" << z << " is within " << distance << " of a zero of J_"
            << order;
        throw PoleError(msg.str(), std::isfinite(distance) ? distance : 0.0);
    }
    return ratio;
}

cplx bessel_j_scaled(double order, cplx z) {
    require_finite(order, z);
    if (order < 0.0 && is_integer(order)) {
        // J_{-n}(z) / z^{-n} = (-1)^n z^{2n} J_n(z) / z^n
        const double n = -order;
        const double sign = std::fmod(n, 2.0) != 0.0 ? -1.0 : 1.0;
        return sign * std::pow(z, 2.0 * n) * bessel_j_scaled(n, z);
    }
    if (std::abs(z) <= kSeriesRadius) {
        const cplx q = -0.25 * z * z;
        cplx term = 1.0;
        cplx sum = 1.0;
        for (int k = 1; k < kSeriesCap; ++k) {
            term *= q / (static_cast<double>(k) * (order + k));
            sum += term;
            if (k > 0.5 * std::abs(z) && std::abs(term) <= 0.25 * kEps * std::abs(sum)) break;
        }
        return sum * std::pow(0.5, order) / std::tgamma(order + 1.0);
    }
    return bessel_j(order, z) / std::pow(z, order);
}

double gamma_real(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw InvalidArgument("gamma_real: argument must be finite and positive");
    }
    return std::tgamma(x);
}

}  // namespace nsa::specfun
