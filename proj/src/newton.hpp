#pragma once

// Newton iteration with a central-difference derivative, shared by the
// secular and transfer-matrix oracles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"

namespace nsa::eigensolve::detail {

// The residuals vary on a scale 1 / (|k| length); a fixed step of
// 1e-6 (1 + |k|) would straddle several oscillations for long potentials.
inline double difference_step(cplx k, double length) {
    const double scale = 1.0 + std::abs(k);
    const double h = 1e-6 * scale / std::max(1.0, std::abs(k) * length);
    return std::max(h, 16.0 * std::numeric_limits<double>::epsilon() * scale);
}

template <class Residual>
EigenResult newton_solve(Residual&& residual, cplx seed, double length,
                         const NewtonOptions& opt, Method method, const char* what) {
    std::vector<std::string> trace;
    auto note = [&](int it, cplx k, double r) {
        std::ostringstream s;
        s.precision(17);
        s << what << " it=" << it << " k=" << k << " |res|=" << r;
        trace.push_back(s.str());
    };
    auto finish = [&](cplx k, double r) {
        if (!(k.imag() > 0.0)) {
            std::ostringstream s;
            s.precision(17);
            s << what << ": converged to k=" << k << " with Im k <= 0";
            throw WrongSheet(s.str());
        }
        return EigenResult{k, k * k, r, method, 0.0};
    };

    cplx k = seed;
    cplx f = residual(k);
    double fa = std::abs(f);
    if (!std::isfinite(fa)) throw NoConvergence(std::string(what) + ": residual not finite at seed", {});
    note(0, k, fa);
    if (fa <= opt.residual_tol) return finish(k, fa);

    for (int it = 1; it <= opt.max_iter; ++it) {
        const double h = difference_step(k, length);
        cplx df;
        try {
            df = (residual(k + h) - residual(k - h)) / (2.0 * h);
        } catch (const PoleError&) {
            df = (residual(k + h) - f) / h;
        }
        if (df == cplx{} || !std::isfinite(std::abs(df))) {
            note(it, k, fa);
            throw NoConvergence(std::string(what) + ": vanishing or non-finite derivative", trace);
        }
        cplx dk = -f / df;
        // Backtrack when the full step makes things worse.
        cplx k_new;
        cplx f_new;
        double fa_new = std::numeric_limits<double>::infinity();
        for (int half = 0; half < 12; ++half) {
            k_new = k + dk;
            try {
                f_new = residual(k_new);
                fa_new = std::abs(f_new);
            } catch (const PoleError&) {
                fa_new = std::numeric_limits<double>::infinity();
            }
            if (std::isfinite(fa_new) && (fa_new < fa || fa_new <= opt.residual_tol)) break;
            dk *= 0.5;
        }
        if (!std::isfinite(fa_new)) {
            note(it, k_new, fa_new);
            throw NoConvergence(std::string(what) + ": residual not finite along the path", trace);
        }
        k = k_new;
        f = f_new;
        fa = fa_new;
        note(it, k, fa);
        if (fa <= opt.residual_tol && std::abs(dk) <= opt.step_tol * (1.0 + std::abs(k))) {
            return finish(k, fa);
        }
    }
    throw NoConvergence(std::string(what) + ": iteration cap reached", trace);
}

}  // namespace nsa::eigensolve::detail
