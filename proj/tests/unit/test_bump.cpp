#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "nsa/bump.hpp"
#include "nsa/eigensolve.hpp"
#include "nsa/error.hpp"
#include "nsa/ltreport.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace nsa::bump;
using testing::rel_err;
using testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

BumpParams raw(int d, cplx c, double a) {
    BumpParams b;
    b.d = d;
    b.c = c;
    b.a = a;
    return b;
}

}  // namespace

TEST_SUITE("bump") {

TEST_CASE("radius_for_index") {
    CHECK(radius_for_index(1, 1.0, 0) == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(radius_for_index(3, 1.0, 0) == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
    CHECK(radius_for_index(2, 2.0, 1) == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
    CHECK_THROWS_AS(radius_for_index(1, 0.0, 1), nsa::InvalidArgument);
    CHECK_THROWS_AS(radius_for_index(1, 1.0, -1), nsa::InvalidArgument);
}

TEST_CASE("solve_eta against the bisection oracle") {
    for (const auto& c : oracle::kEta) {
        const double eta = solve_eta(c.nu, c.a);
        CAPTURE(c.a);
        CHECK(std::abs(eta / c.eta - 1.0) < 1e-12);
        CHECK(std::abs(eta * std::exp(2.0 * eta * c.a) - c.nu) <= 1e-13 * c.nu * std::max(1.0, 2.0 * eta * c.a));
    }
    // Small nu at fixed a linearises to eta ~ nu.
    CHECK(solve_eta(1e-9, 1.0) / 1e-9 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(solve_eta(1.0, 0.0), nsa::InvalidArgument);
}

TEST_CASE("boundary_wavenumber closed forms") {
    CHECK(rel_err(boundary_wavenumber(3, oracle::kD3Tau, oracle::kD3A), oracle::kD3K) < 1e-12);
    CHECK(rel_err(boundary_wavenumber(1, {oracle::kD1Tau, 0.0}, oracle::kD1A), oracle::kD1K) < 1e-12);
}

TEST_CASE("bump_for_index reproduces the independent forward construction") {
    for (const auto& f : oracle::kForward) {
        CAPTURE(f.d);
        CAPTURE(f.m);
        const BumpParams b = bump_for_index(f.d, f.lambda, f.m);
        CHECK(std::abs(b.a / f.a - 1.0) < 1e-14);
        CHECK(std::abs(b.eta / f.eta - 1.0) < 1e-12);
        CHECK(rel_err(b.k, f.k) < 1e-11);
        CHECK(std::abs(b.c - f.c) < 1e-11 * std::norm(f.k));
        // Self-consistency of the derived scalars.
        CHECK(std::abs(b.nu * b.nu / b.lambda - 1.0) < 1e-14);
        CHECK(b.tau == cplx{b.nu, b.eta});
        CHECK(rel_err(b.mu, b.k * b.k) < 1e-14);
        CHECK(std::abs(b.c - (b.k * b.k - b.tau * b.tau)) <= 1e-14 * std::norm(b.k));
    }
}

TEST_CASE("design_bump meets every budget") {
    const BumpParams b = design_bump(1, 2.0, 1.0, 0.5, 0.5, 0.1);
    CHECK(std::abs(b.mu - 1.0) < 0.1);
    CHECK(b.mu.imag() < 0.0);
    CHECK(b.k.imag() > 0.0);
    CHECK(norm_p(b, 2.0) < 0.5);
    CHECK(norm_inf(b) < 0.5);
    const nsa::eigensolve::SecularProblem prob{b.d, b.c, b.a, b.tau};
    CHECK(std::abs(nsa::eigensolve::secular_residual(prob, b.k)) <= 1e-10);
}

TEST_CASE("design_bump picks the smallest feasible index") {
    const BumpParams b = design_bump(3, 4.0, 2.0, 10.0, 10.0, 10.0);
    CHECK(b.mu.imag() < 0.0);
    CHECK(b.k.imag() > 0.0);
    for (long long m = 0; m < b.m; ++m) {
        const BumpParams e = bump_for_index(3, 2.0, m);
        CHECK_FALSE((e.k.imag() > 0.0 && e.mu.imag() < 0.0 && std::abs(e.mu - 2.0) < 10.0));
    }
    // The secular oracle lands on the designed root.
    const nsa::eigensolve::SecularProblem prob{3, b.c, b.a, b.tau};
    const auto r = nsa::eigensolve::refine_eigen(prob, b.k);
    CHECK(std::abs(r.k - b.k) < 1e-10);
}

TEST_CASE("design_bump is monotone in r") {
    for (int d : {1, 2, 3}) {
        long long prev = -1;
        for (double r : {0.3, 0.03, 0.003}) {
            const BumpParams b = design_bump(d, d + 1.0, 1.0, 0.5, 0.5, r);
            CHECK(b.m >= prev);
            prev = b.m;
        }
    }
}

TEST_CASE("design_bump reports infeasible budgets") {
    DesignOptions opt;
    opt.m_cap = 5000;
    try {
        design_bump(1, 2.0, 1.0, 1e-6, 0.5, 0.5, opt);
        FAIL("expected BudgetInfeasible");
    } catch (const nsa::BudgetInfeasible& e) {
        CHECK(e.constraint() == "||U||_p < eps");
        CHECK(e.last_m() == 5000);
    }
    CHECK_THROWS_AS(design_bump(3, 3.0, 1.0, 0.5, 0.5, 0.5), nsa::InvalidArgument);
    CHECK_THROWS_AS(design_bump(1, 2.0, 0.0, 0.5, 0.5, 0.5), nsa::InvalidArgument);
    CHECK_THROWS_AS(design_bump(1, 2.0, 1.0, 0.5, -0.5, 0.5), nsa::InvalidArgument);
}

TEST_CASE("norm_p") {
    const BumpParams d1 = raw(1, {0.3, -0.4}, 5.0);
    CHECK(std::pow(norm_p(d1, 3.0), 3.0) == doctest::Approx(2.0 * 5.0 * std::pow(0.5, 3.0)).epsilon(1e-13));
    CHECK(norm_p(raw(3, {0.1, 0.0}, 2.0), 4.0) == doctest::Approx(oracle::kNormD3).epsilon(1e-8));
    CHECK(norm_p(raw(2, {0.0, 0.0}, 1.0), 3.0) == doctest::Approx(oracle::kNormD2Tail).epsilon(1e-8));
    CHECK_THROWS_AS(norm_p(d1, 1.0), nsa::InvalidArgument);
}

TEST_CASE("norm_inf") {
    CHECK(norm_inf(raw(1, {0.3, -0.4}, 5.0)) == doctest::Approx(0.5));
    CHECK(norm_inf(raw(3, {0.0, 1e-3}, 0.01)) == doctest::Approx(1e-3));
    CHECK(norm_inf(raw(2, {0.0, 0.0}, 1.0)) == doctest::Approx(0.25));
    CHECK(norm_inf(raw(5, {1e-6, 0.0}, 100.0)) == doctest::Approx(2e-4));
}

TEST_CASE("unit ball and sphere") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
    CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * kPi));
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * kPi));
    for (int d = 1; d <= 8; ++d) CHECK(unit_sphere_area(d) == doctest::Approx(d * unit_ball_volume(d)));
}

TEST_CASE("potential_eval") {
    const PlacedBump p3{raw(3, {0.2, -0.1}, 1.5), 4.0};
    const std::array<double, 3> outside{0.0, 0.0, 8.0};
    const std::array<double, 3> inside{0.3, 0.2, 4.5};
    CHECK(potential_eval(p3, outside) == cplx{0.0, 0.0});
    CHECK(potential_eval(p3, inside) == cplx{0.2, -0.1});
    const std::array<double, 3> on_sphere{0.0, 0.0, 5.5};
    CHECK(potential_eval(p3, on_sphere) == cplx{0.2, -0.1});

    const PlacedBump p1{raw(1, {0.0, -1.0}, 2.0), -1.0};
    const std::array<double, 1> x1{0.5};
    CHECK(potential_eval(p1, x1) == cplx{0.0, -1.0});

    const double a = 1.7;
    const PlacedBump p2{raw(2, {0.0, 0.0}, a), 0.0};
    const std::array<double, 2> x2{0.0, 2.0 * a};
    CHECK(potential_eval(p2, x2).real() == doctest::Approx(1.0 / (16.0 * a * a)));
    const std::array<double, 2> bad{0.0, 0.0};
    CHECK_NOTHROW(potential_eval(p2, bad));
    const std::array<double, 1> wrong{0.0};
    CHECK_THROWS_AS(potential_eval(p2, wrong), nsa::InvalidArgument);
}

TEST_CASE("eigenfunction continuity, origin limit and decay") {
    for (int d : {1, 2, 3, 5}) {
        CAPTURE(d);
        const BumpParams b = bump_for_index(d, 1.0, 5);
        const cplx ga = eigenfunction_radial(b, b.a);
        const cplx below = eigenfunction_radial(b, b.a * (1.0 - 1e-9));
        const cplx above = eigenfunction_radial(b, b.a * (1.0 + 1e-9));
        CHECK(std::abs(below - above) <= 1e-7 * std::abs(ga));
        // Radial derivative continuous too.
        const double h = 1e-6 * b.a;
        const cplx din = (eigenfunction_radial(b, b.a) - eigenfunction_radial(b, b.a - h)) / h;
        const cplx dout = (eigenfunction_radial(b, b.a + h) - eigenfunction_radial(b, b.a)) / h;
        CHECK(std::abs(din - dout) <= 1e-4 * (std::abs(din) + std::abs(ga) / b.a));
        CHECK(rel_err(eigenfunction_radial(b, 1e-7), eigenfunction_radial(b, 0.0)) < 1e-9);
        CHECK(std::abs(eigenfunction_radial(b, 2.0 * b.a)) < std::abs(ga));
    }
}

TEST_CASE("property: translation invariance") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const int d = (i % 2 == 0) ? 1 : 3;
        const BumpParams b = bump_for_index(d, rng.uniform(0.5, 2.0), 3 + i % 5);
        const double t = rng.uniform(-50.0, 50.0);
        const double s = rng.uniform(-50.0, 50.0);
        std::array<double, 3> x{rng.uniform(-3, 3), rng.uniform(-3, 3), t + rng.uniform(-2.0 * b.a, 2.0 * b.a)};
        std::array<double, 3> xs = x;
        xs[d - 1] += s;
        if (d == 1) x[0] = x[2], xs[0] = x[2] + s;
        const std::span<const double> px(x.data(), d), pxs(xs.data(), d);
        CHECK(potential_eval({b, t}, px) == potential_eval({b, t + s}, pxs));
        CHECK(rel_err(eigenfunction_eval(b, t + s, pxs), eigenfunction_eval(b, t, px)) < 1e-9);
    }
}

TEST_CASE("property: order estimates along the index sequence") {
    for (int d : {1, 3}) {
        double first = 0.0;
        for (long long m = 10; m <= 100000; m *= 10) {
            const BumpParams b = bump_for_index(d, 1.0, m);
            CAPTURE(m);
            CHECK(std::abs(b.mu - 1.0) / b.eta < 4.0);
            CHECK(std::abs(b.c) / b.eta < 8.0);
            const double p = d + 1.0;
            const double scaled = std::pow(norm_p(b, p), p) * std::pow(b.eta, -(p - d)) *
                                  std::pow(std::log(b.nu / b.eta), -d);
            if (first == 0.0) first = scaled;
            CHECK(scaled / first == doctest::Approx(1.0).epsilon(0.5));
        }
    }
}

TEST_CASE("property: designed d = 1 bumps satisfy the one-dimensional eigenvalue bound") {
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (double r : {0.1, 0.01}) {
            const BumpParams b = design_bump(1, 2.0, lambda, 0.5, 0.5, r);
            CHECK(nsa::ltreport::aad_holds(b.mu, 2.0 * b.a * std::abs(b.c)));
        }
    }
}

}  // TEST_SUITE
