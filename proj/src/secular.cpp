#include <cmath>
#include <numbers>
#include <sstream>

#include "newton.hpp"
#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"
#include "nsa/specfun.hpp"

namespace nsa::eigensolve {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

void require_problem(const SecularProblem& p) {
    if (p.d < 1) throw InvalidArgument("secular problem: dimension must be positive");
    if (!(p.a > 0.0) || !std::isfinite(p.a)) throw InvalidArgument("secular problem: radius must be positive");
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::secular: return "secular";
        case Method::transfer: return "transfer";
        case Method::grid: return "grid";
    }
    return "unknown";
}

cplx inner_wavenumber(cplx k, cplx c, cplx ref) {
    const cplx s = std::sqrt(k * k - c);
    return std::abs(s - ref) <= std::abs(-s - ref) ? s : -s;
}

cplx secular_residual(const SecularProblem& problem, cplx k) {
    require_problem(problem);
    const cplx tau = inner_wavenumber(k, problem.c, problem.branch_ref);
    if (std::abs(tau) * problem.a < 1e-300) {
        throw BranchError("secular residual: k^2 = c, inner wavenumber vanishes");
    }
    const double order = 0.5 * problem.d - 1.0;
    const cplx ratio = specfun::bessel_j_ratio(order, tau * problem.a);
    return k + kI * tau * ratio - kI * (problem.d - 3.0) / (2.0 * problem.a);
}

cplx secular_entire(const SecularProblem& problem, cplx k) {
    require_problem(problem);
    const double order = 0.5 * problem.d - 1.0;
    const cplx z = std::sqrt(k * k - problem.c) * problem.a;
    const cplx lead = k - kI * (problem.d - 3.0) / (2.0 * problem.a);
    return lead * specfun::bessel_j_scaled(order, z) +
           (kI / problem.a) * specfun::bessel_j_scaled(order - 1.0, z);
}

EigenResult refine_eigen(const SecularProblem& problem, cplx k_seed, const NewtonOptions& options) {
    require_problem(problem);
    const double length = options.length_scale > 0.0 ? options.length_scale : problem.a;
    auto f = [&](cplx k) { return secular_residual(problem, k); };
    return detail::newton_solve(f, k_seed, length, options, Method::secular, "refine_eigen");
}

int count_zeros(const SecularProblem& problem, const Rect& box) {
    require_problem(problem);
    if (!(box.hi.real() > box.lo.real()) || !(box.hi.imag() > box.lo.imag())) {
        throw InvalidArgument("count_zeros: empty rectangle");
    }
    const cplx corners[5] = {box.lo, {box.hi.real(), box.lo.imag()}, box.hi,
                             {box.lo.real(), box.hi.imag()}, box.lo};
    double min_abs = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    auto eval = [&](cplx k) {
        cplx g;
        try {
            g = secular_entire(problem, k);
        } catch (const AccuracyFailure& e) {
            throw ContourError(std::string("count_zeros: evaluation failed on the contour: ") + e.what());
        }
        const double ga = std::abs(g);
        if (!std::isfinite(ga)) throw ContourError("count_zeros: overflow on the contour; shrink the box");
        min_abs = std::min(min_abs, ga);
        max_abs = std::max(max_abs, ga);
        return g;
    };

    // Accumulate the change of argument, splitting any piece over which the
    // principal increment exceeds pi/4.
    double total = 0.0;
    struct Piece {
        cplx z0, z1, g0, g1;
        int depth;
    };
    std::vector<Piece> stack;
    constexpr int kInitial = 64;
    for (int e = 0; e < 4; ++e) {
        cplx prev_z = corners[e];
        cplx prev_g = eval(prev_z);
        for (int i = 1; i <= kInitial; ++i) {
            const cplx z = corners[e] + (corners[e + 1] - corners[e]) * (static_cast<double>(i) / kInitial);
            const cplx g = eval(z);
            stack.push_back({prev_z, z, prev_g, g, 0});
            prev_z = z;
            prev_g = g;
        }
        while (!stack.empty()) {
            Piece p = stack.back();
            stack.pop_back();
            const double d = std::arg(p.g1 / p.g0);
            if (std::abs(d) <= kPi / 4.0) {
                total += d;
                continue;
            }
            if (p.depth > 40) throw ContourError("count_zeros: argument not resolved; zero near contour");
            const cplx zm = 0.5 * (p.z0 + p.z1);
            const cplx gm = eval(zm);
            stack.push_back({zm, p.z1, gm, p.g1, p.depth + 1});
            stack.push_back({p.z0, zm, p.g0, gm, p.depth + 1});
        }
    }
    if (min_abs < 1e-10 * max_abs) {
        std::ostringstream msg;
        msg << "count_zeros: |F| drops to " << min_abs / max_abs
            << " of its maximum on the contour; inflate or move the box";
        throw ContourError(msg.str());
    }
    const double winding = total / (2.0 * kPi);
    const double rounded = std::round(winding);
    if (std::abs(winding - rounded) > 0.2) throw ContourError("count_zeros: winding number not near an integer");
    return static_cast<int>(rounded);
}

}  // namespace nsa::eigensolve
