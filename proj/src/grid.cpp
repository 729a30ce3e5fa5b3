#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"

extern "C" {
void zgttrf_(const int* n, std::complex<double>* dl, std::complex<double>* d,
             std::complex<double>* du, std::complex<double>* du2, int* ipiv, int* info);
void zgttrs_(const char* trans, const int* n, const int* nrhs, const std::complex<double>* dl,
             const std::complex<double>* d, const std::complex<double>* du,
             const std::complex<double>* du2, const int* ipiv, std::complex<double>* b,
             const int* ldb, int* info, std::size_t trans_len);
}

namespace nsa::eigensolve {

namespace {

constexpr double kPi = std::numbers::pi;

// Tridiagonal discretisation of -f'' + V f on a truncated interval.
struct Grid {
    double first = 0.0;  // abscissa of unknown 0
    double h = 1.0;
    std::vector<cplx> lower, diag, upper;
    // Unknown index ranges of the outer quarters of the buffers.
    long left_outer_end = 0;     // [0, left_outer_end)
    long right_outer_begin = 0;  // [right_outer_begin, n)
    double scale = 1.0;          // 4/h^2 + max|V|, for residual tolerances
    long size() const { return static_cast<long>(diag.size()); }
};

// Integral of the step potential from -inf to x.
class PotentialIntegral {
public:
    explicit PotentialIntegral(const StepPotential1D& p) : p_(p) {
        cumulative_.push_back(0.0);
        for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i) {
            cumulative_.push_back(cumulative_.back() +
                                  p.values[i] * (p.breakpoints[i + 1] - p.breakpoints[i]));
        }
    }
    cplx operator()(double x) const {
        const auto& b = p_.breakpoints;
        if (b.empty() || x <= b.front()) return 0.0;
        if (x >= b.back()) return cumulative_.back();
        const std::size_t i = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) - 1;
        return cumulative_[i] + p_.values[i] * (x - b[i]);
    }

private:
    const StepPotential1D& p_;
    std::vector<cplx> cumulative_;
};

Grid build_grid(const StepPotential1D& p, double buffer, double h) {
    const auto& b = p.breakpoints;
    const double lo_support = b.empty() ? 0.0 : b.front();
    const double hi_support = b.empty() ? 0.0 : b.back();
    const bool robin = p.robin_phi.has_value();
    const double left = robin ? 0.0 : lo_support - buffer;
    const double right = hi_support + buffer;
    const long intervals = static_cast<long>(std::ceil((right - left) / h));

    bool dirichlet_origin = true;
    double tan_phi = 0.0;
    if (robin) {
        const double cphi = std::cos(*p.robin_phi);
        dirichlet_origin = std::abs(cphi) < 1e-12;
        if (!dirichlet_origin) tan_phi = std::tan(*p.robin_phi);
    }
    const long first_node = dirichlet_origin ? 1 : 0;
    const long n = intervals - first_node;  // last node is a Dirichlet end

    Grid g;
    g.h = h;
    g.first = left + first_node * h;
    g.diag.resize(n);
    g.lower.assign(n > 0 ? n - 1 : 0, -1.0 / (h * h));
    g.upper.assign(n > 0 ? n - 1 : 0, -1.0 / (h * h));
    const PotentialIntegral integral(p);
    double vmax = 0.0;
    for (long j = 0; j < n; ++j) {
        const double x = g.first + j * h;
        const cplx v = (integral(x + 0.5 * h) - integral(x - 0.5 * h)) / h;
        vmax = std::max(vmax, std::abs(v));
        g.diag[j] = 2.0 / (h * h) + v;
    }
    if (robin && !dirichlet_origin && n > 1) {
        // Ghost node f_{-1} = f_1 + 2h tan(phi) f_0.
        g.diag[0] -= 2.0 * tan_phi / h;
        g.upper[0] = -2.0 / (h * h);
    }
    g.scale = 4.0 / (h * h) + vmax + (robin ? 2.0 * std::abs(tan_phi) / h : 0.0);

    const double quarter = 0.25 * buffer;
    g.left_outer_end = robin ? 0 : std::clamp<long>(static_cast<long>((left + quarter - g.first) / h), 0, n);
    g.right_outer_begin = std::clamp<long>(static_cast<long>(std::ceil((right - quarter - g.first) / h)), 0, n);
    return g;
}

class ShiftedLU {
public:
    ShiftedLU(const Grid& g, cplx sigma) : n_(static_cast<int>(g.size())) {
        dl_ = g.lower;
        du_ = g.upper;
        d_.resize(n_);
        for (int j = 0; j < n_; ++j) d_[j] = g.diag[j] - sigma;
        du2_.resize(std::max(n_ - 2, 1));
        ipiv_.resize(n_);
        int info = 0;
        zgttrf_(&n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data(), &info);
        singular_ = info != 0;
    }
    bool singular() const { return singular_; }
    // Solves (A - sigma) y = b, or its conjugate transpose.
    void solve(std::vector<cplx>& rhs, bool adjoint) const {
        const char trans = adjoint ? 'C' : 'N';
        const int nrhs = 1;
        int info = 0;
        zgttrs_(&trans, &n_, &nrhs, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data(),
                rhs.data(), &n_, &info, 1);
    }

private:
    int n_;
    std::vector<cplx> dl_, d_, du_, du2_;
    std::vector<int> ipiv_;
    bool singular_ = false;
};

double norm2(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const cplx& x : v) s += std::norm(x);
    return std::sqrt(s);
}

std::vector<cplx> start_vector(long n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = {u(rng), u(rng)};
    const double s = norm2(v);
    for (auto& x : v) x /= s;
    return v;
}

double residual_norm(const Grid& g, const std::vector<cplx>& x, cplx theta) {
    const long n = g.size();
    double s = 0.0;
    for (long j = 0; j < n; ++j) {
        cplx r = (g.diag[j] - theta) * x[j];
        if (j > 0) r += g.lower[j - 1] * x[j - 1];
        if (j + 1 < n) r += g.upper[j] * x[j + 1];
        s += std::norm(r);
    }
    return std::sqrt(s);
}

bool localized(const Grid& g, const std::vector<cplx>& x, double ratio) {
    double peak = 0.0;
    for (const cplx& v : x) peak = std::max(peak, std::abs(v));
    double outer = 0.0;
    for (long j = 0; j < g.left_outer_end; ++j) outer = std::max(outer, std::abs(x[j]));
    for (long j = g.right_outer_begin; j < g.size(); ++j) outer = std::max(outer, std::abs(x[j]));
    return outer < ratio * peak;
}

struct Mode {
    cplx theta;
    double residual;
    bool localized;
};

// Shifted inverse iteration with Rayleigh-type shift updates once the
// estimate settles.
std::optional<Mode> inverse_iterate(const Grid& g, cplx sigma, const GridOptions& opt, unsigned seed) {
    if (g.size() < 3) return std::nullopt;
    std::vector<cplx> x = start_vector(g.size(), seed);
    auto lu = std::make_unique<ShiftedLU>(g, sigma);
    cplx theta = sigma;
    const double tol = 1e-12 * g.scale;
    for (int it = 0; it < opt.max_inverse_iterations; ++it) {
        std::vector<cplx> y = x;
        if (lu->singular()) return Mode{sigma, 0.0, localized(g, x, opt.localization)};
        lu->solve(y, false);
        cplx xy = 0.0;
        for (long j = 0; j < g.size(); ++j) xy += std::conj(x[j]) * y[j];
        if (xy == cplx{}) return std::nullopt;
        const cplx theta_new = sigma + 1.0 / xy;  // x has unit norm
        const double ny = norm2(y);
        if (!std::isfinite(ny) || ny == 0.0) return std::nullopt;
        for (long j = 0; j < g.size(); ++j) x[j] = y[j] / ny;
        const double res = residual_norm(g, x, theta_new);
        if (res <= tol) return Mode{theta_new, res, localized(g, x, opt.localization)};
        if (it >= 2 && std::abs(theta_new - theta) < 0.25 * std::abs(theta_new - sigma)) {
            sigma = theta_new;
            lu = std::make_unique<ShiftedLU>(g, sigma);
        }
        theta = theta_new;
    }
    return std::nullopt;
}

cplx decaying_root(cplx mu) {
    cplx k = std::sqrt(mu);
    return k.imag() < 0.0 ? -k : k;
}

double max_wavenumber(const StepPotential1D& p, cplx z, double extra) {
    double k2 = std::abs(z) + extra;
    for (const cplx& v : p.values) k2 = std::max(k2, std::abs(z - v) + extra);
    return std::sqrt(std::max(k2, 1e-12));
}

}  // namespace

std::vector<EigenResult> grid_oracle_1d(const StepPotential1D& p, cplx target, double radius,
                                        const GridOptions& opt) {
    validate(p);
    if (!(target.imag() < 0.0)) throw InvalidArgument("grid_oracle_1d: target must have Im < 0");
    if (!(radius > 0.0)) throw InvalidArgument("grid_oracle_1d: radius must be positive");

    const double decay = decaying_root(target).imag();
    const double buffer = std::log(1.0 / opt.decay_target) / decay;
    const double big_k = max_wavenumber(p, target, radius);
    double h = std::min(2.0 * kPi / (20.0 * big_k),
                        std::sqrt(12.0 * radius / 40.0) / (big_k * big_k));
    const double support = p.breakpoints.empty() ? 0.0 : p.breakpoints.back() - (p.robin_phi ? 0.0 : p.breakpoints.front());
    const double span = support + (p.robin_phi ? 1.0 : 2.0) * buffer;
    if (!std::isfinite(span) || 2.0 * span / h > static_cast<double>(opt.max_points)) {
        std::ostringstream msg;
        msg << "grid_oracle_1d: needs " << 2.0 * span / h << " points (cap " << opt.max_points << ")";
        throw UnresolvedByGrid(msg.str());
    }

    const Grid coarse = build_grid(p, buffer, h);
    std::vector<cplx> shifts{target};
    for (int j = 0; j < 6; ++j) shifts.push_back(target + 0.5 * radius * std::polar(1.0, kPi * j / 3.0));
    std::vector<cplx> found;
    unsigned seed = 1;
    for (const cplx& s : shifts) {
        const auto mode = inverse_iterate(coarse, s, opt, seed++);
        if (!mode || !mode->localized) continue;
        if (std::abs(mode->theta - target) >= radius) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(), [&](cplx f) {
            return std::abs(f - mode->theta) <= 1e-8 * (1.0 + std::abs(f));
        });
        if (!duplicate) found.push_back(mode->theta);
    }

    const Grid fine = build_grid(p, buffer, 0.5 * h);
    std::vector<EigenResult> out;
    for (const cplx& c : found) {
        const auto mode = inverse_iterate(fine, c, opt, seed++);
        if (!mode || !mode->localized) {
            throw UnresolvedByGrid("grid_oracle_1d: eigenvalue not reproduced on the fine grid");
        }
        const double gap = std::abs(mode->theta - c);
        if (gap > radius / 10.0) {
            std::ostringstream msg;
            msg << "grid_oracle_1d: grids disagree by " << gap << " (radius " << radius << ")";
            throw UnresolvedByGrid(msg.str());
        }
        const cplx mu = (4.0 * mode->theta - c) / 3.0;
        out.push_back({decaying_root(mu), mu, mode->residual, Method::grid, gap / 3.0});
    }
    std::sort(out.begin(), out.end(), [](const EigenResult& x, const EigenResult& y) {
        return std::abs(x.mu) < std::abs(y.mu);
    });
    return out;
}

std::vector<double> grid_resolvent_norms(const StepPotential1D& p, const std::vector<cplx>& points,
                                         cplx reference, const GridOptions& opt) {
    validate(p);
    if (points.empty()) return {};
    double decay = decaying_root(reference).imag();
    double closest = std::numeric_limits<double>::infinity();
    double big_k = 0.0;
    for (const cplx& z : points) {
        decay = std::min(decay, decaying_root(z).imag());
        const double dist = z.real() >= 0.0 ? std::abs(z.imag()) : std::abs(z);
        closest = std::min(closest, dist);
        big_k = std::max(big_k, max_wavenumber(p, z, 0.0));
    }
    if (!(decay > 0.0) || !(closest > 0.0)) {
        throw UnresolvedByGrid("grid_resolvent_norms: point on the essential spectrum");
    }
    const double buffer = std::log(1.0 / opt.decay_target) / decay;
    const double h = std::min(2.0 * kPi / (20.0 * big_k),
                              std::sqrt(12.0 * closest / 40.0) / (big_k * big_k));
    const double support = p.breakpoints.empty() ? 0.0 : p.breakpoints.back() - (p.robin_phi ? 0.0 : p.breakpoints.front());
    const double span = support + (p.robin_phi ? 1.0 : 2.0) * buffer;
    if (!std::isfinite(span) || 2.0 * span / h > static_cast<double>(opt.max_points)) {
        std::ostringstream msg;
        msg << "grid_resolvent_norms: needs " << 2.0 * span / h << " points (cap " << opt.max_points << ")";
        throw UnresolvedByGrid(msg.str());
    }

    // ||(A - z)^{-1}||^2 is the top eigenvalue of (A - z)^{-1} (A - z)^{-H}.
    auto estimate = [&](const Grid& g, cplx z) {
        const ShiftedLU lu(g, z);
        if (lu.singular()) throw UnresolvedByGrid("grid_resolvent_norms: singular shift");
        std::vector<cplx> x = start_vector(g.size(), 7);
        double value = 0.0;
        for (int it = 0; it < 60; ++it) {
            lu.solve(x, true);
            lu.solve(x, false);
            const double nx = norm2(x);
            for (auto& v : x) v /= nx;
            const double prev = value;
            value = nx;
            if (it > 3 && std::abs(value - prev) <= 1e-4 * value) break;
        }
        return std::sqrt(value);
    };

    const Grid coarse = build_grid(p, buffer, h);
    const Grid fine = build_grid(p, buffer, 0.5 * h);
    std::vector<double> out;
    for (const cplx& z : points) {
        const double a = estimate(coarse, z);
        const double b = estimate(fine, z);
        if (std::abs(a - b) > 0.25 * std::max(a, b)) {
            std::ostringstream msg;
            msg << "grid_resolvent_norms: grids disagree (" << a << " vs " << b << ") at z=" << z;
            throw UnresolvedByGrid(msg.str());
        }
        out.push_back(1.1 * std::max(a, b));
    }
    return out;
}

}  // namespace nsa::eigensolve
