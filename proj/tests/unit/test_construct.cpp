#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <utility>

#include "nsa/construct.hpp"
#include "nsa/error.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace nsa::construct;
using nsa::eigensolve::transfer_eigen_1d;
using testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

// One cached build per configuration; the construction is deterministic.
const ConstructionLedger& whole_line(long long steps) {
    static std::map<long long, ConstructionLedger> cache;
    auto it = cache.find(steps);
    if (it == cache.end()) it = cache.emplace(steps, build(1, 1.5, 1.0, steps, Domain::whole())).first;
    return it->second;
}

const ConstructionLedger& robin(double phi) {
    static std::map<double, ConstructionLedger> cache;
    auto it = cache.find(phi);
    if (it == cache.end()) it = cache.emplace(phi, build(1, 1.5, 1.0, 3, Domain::robin(phi))).first;
    return it->second;
}

}  // namespace

TEST_SUITE("construct") {

TEST_CASE("target enumeration matches the Stern sequence reference") {
    long long n = 1;
    for (const auto& t : oracle::kTargets) {
        CAPTURE(n);
        CHECK(enumerate_targets(n) == Target{t.num, t.den, t.m});
        ++n;
    }
    CHECK(enumerate_targets(1) == Target{1, 1, 1});
    CHECK(enumerate_targets(2) == Target{1, 2, 1});
    CHECK(enumerate_targets(3) == Target{1, 1, 2});
    CHECK_THROWS_AS(enumerate_targets(0), nsa::InvalidArgument);
}

TEST_CASE("target enumeration is injective and inverted by target_index") {
    std::set<std::tuple<long long, long long, long long>> seen;
    for (long long n = 1; n <= 1'000'000; ++n) {
        const Target t = enumerate_targets(n);
        REQUIRE(std::gcd(t.num, t.den) == 1);
        REQUIRE(seen.emplace(t.num, t.den, t.m).second);
        if (n % 997 == 0) REQUIRE(target_index(t) == n);
    }
}

TEST_CASE("every small target is reached") {
    for (long long a = 1; a <= 10; ++a) {
        for (long long b = 1; b <= 10; ++b) {
            if (std::gcd(a, b) != 1) continue;
            for (long long m = 1; m <= 10; ++m) {
                const Target t{a, b, m};
                CHECK(enumerate_targets(target_index(t)) == t);
            }
        }
    }
    CHECK_THROWS_AS(target_index(Target{2, 4, 1}), nsa::InvalidArgument);
    CHECK_THROWS_AS(target_index(Target{0, 1, 1}), nsa::InvalidArgument);
    CHECK_THROWS_AS(target_index(Target{1, 1, 0}), nsa::InvalidArgument);
}

TEST_CASE("integer target mode") {
    CHECK(target_for(TargetMode::integers, 4) == Target{4, 1, 1});
    CHECK(target_for(TargetMode::enumeration, 4) == enumerate_targets(4));
    CHECK(target_mode_from_string(to_string(TargetMode::integers)) == TargetMode::integers);
    CHECK_THROWS_AS(target_mode_from_string("primes"), nsa::InvalidArgument);
}

TEST_CASE("step budgets") {
    const Budgets b1 = budgets(1, 1.0, INFINITY);
    CHECK(b1.eps == doctest::Approx(6.0 / (kPi * kPi)).epsilon(1e-15));
    CHECK(b1.delta == doctest::Approx(6.0 / (kPi * kPi)).epsilon(1e-15));
    const Budgets b2 = budgets(2, 1.0, 1e-2);
    CHECK(b2.eps == doctest::Approx(1.5 / (kPi * kPi)).epsilon(1e-15));
    CHECK(b2.delta == doctest::Approx(1.520e-3).epsilon(1e-3));
    double eps_sum = 0.0;
    for (long long n = 1; n <= 100000; ++n) eps_sum += budgets(n, 2.5, INFINITY).eps;
    CHECK(eps_sum < 2.5);
    CHECK(eps_sum == doctest::Approx(2.5).epsilon(1e-4));
    CHECK_THROWS_AS(budgets(0, 1.0, 1.0), nsa::InvalidArgument);
    CHECK_THROWS_AS(budgets(1, 0.0, 1.0), nsa::InvalidArgument);
}

TEST_CASE("choose_shift on an empty ledger places the bump at twice its radius") {
    ConstructionLedger ledger;
    const auto b = nsa::bump::design_bump(1, 1.5, 1.0, 0.5, 0.5, 0.1);
    const ShiftResult s = choose_shift(ledger, b, 0.1);
    CHECK(s.t == doctest::Approx(2.0 * b.a));
    CHECK(std::abs(s.mu - b.mu) < 1e-8);
    REQUIRE(s.deviations.size() >= 2);
}

TEST_CASE("choose_shift next to an existing bump") {
    const ConstructionLedger& one = whole_line(1);
    const auto b = nsa::bump::design_bump(1, 1.5, 0.5, 0.1, 0.1, 0.05);
    const ShiftResult s = choose_shift(one, b, 0.05);
    CHECK(s.t - b.a > one.entries[0].t + one.entries[0].bump.a);
    CHECK(std::abs(s.mu - b.mu) < 0.05);
    // Deviations settle as the bump moves away.
    CHECK(s.deviations.back() <= s.deviations.front() + 1e-12);

    ConstructionLedger d3;
    d3.d = 3;
    CHECK_THROWS_AS(choose_shift(d3, nsa::bump::bump_for_index(3, 1.0, 2), 0.1), nsa::NotApplicable);
}

TEST_CASE("estimate_gamma") {
    const ConstructionLedger big = build(1, 1.5, 20.0, 1, Domain::whole());
    REQUIRE(big.entries.size() == 1);
    const LedgerEntry& e = big.entries[0];
    ConstructionLedger partial = big;
    const GammaEstimate g = estimate_gamma(partial, e.mu, INFINITY);
    CHECK_FALSE(g.fallback);
    CHECK(g.rho == doctest::Approx(std::abs(e.mu.imag()) / 2.0));
    CHECK(g.resolvent_bound >= 1.0 / g.rho);
    CHECK(g.gamma == doctest::Approx(g.rho / (2.0 * g.resolvent_bound)));
    CHECK(g.gamma == doctest::Approx(e.gamma));

    const GammaEstimate clamped = estimate_gamma(partial, e.mu, 1e-9);
    CHECK(clamped.gamma == 1e-9);

    {
        nsa::eigensolve::GridOptions tiny;
        tiny.max_points = 10;
        const GammaEstimate f = estimate_gamma(partial, e.mu, INFINITY, tiny);
        CHECK(f.fallback);
        CHECK(f.gamma == doctest::Approx(f.rho / 10.0));
        CHECK_FALSE(f.note.empty());
    }
    CHECK_THROWS_AS(estimate_gamma(partial, {1.0, 0.0}, 1.0), nsa::InvalidArgument);
    CHECK_THROWS_AS(estimate_gamma(partial, e.mu, 0.0), nsa::InvalidArgument);
}

TEST_CASE("estimate_gamma: perturbations of size gamma/2 keep an eigenvalue nearby") {
    const ConstructionLedger big = build(1, 1.5, 20.0, 1, Domain::whole());
    const LedgerEntry& e = big.entries[0];
    auto pot = step_potential(big);
    for (double sign : {1.0, -1.0}) {
        auto shifted = pot;
        for (auto& v : shifted.values) v += sign * e.gamma / 2.0;
        const auto res = transfer_eigen_1d(shifted, wavenumber_of(e.mu));
        CHECK(std::abs(res.mu - e.mu) < std::abs(e.mu.imag()) / 2.0);
    }
}

TEST_CASE("build with no steps") {
    const ConstructionLedger l = build(1, 1.5, 1.0, 0, Domain::whole());
    CHECK(l.entries.empty());
    CHECK_FALSE(l.failed_at.has_value());
}

TEST_CASE("a single step is the standalone bump") {
    const ConstructionLedger& l = whole_line(1);
    REQUIRE(l.entries.size() == 1);
    const LedgerEntry& e = l.entries[0];
    CHECK(e.target == Target{1, 1, 1});
    CHECK(std::abs(e.mu - e.bump.mu) < 1e-8);
    CHECK(std::abs(e.lambda - e.mu) < 1e-8);
    CHECK(e.verified);
    CHECK(e.t == doctest::Approx(2.0 * e.bump.a));
}

TEST_CASE("Robin half-line ledgers verify") {
    for (double phi : {0.0, 1.5708}) {
        const ConstructionLedger& l = robin(phi);
        CAPTURE(phi);
        CHECK_FALSE(l.failed_at.has_value());
        REQUIRE(l.entries.size() == 3);
        for (const auto& e : l.entries) {
            CHECK(e.verified);
            CHECK(e.lambda.imag() < 0.0);
            CHECK(std::abs(e.lambda - e.target.q()) < 1.0 / static_cast<double>(e.target.m));
            CHECK(e.t - e.bump.a > 0.0);
        }
    }
}

TEST_CASE("ledger invariants") {
    for (const ConstructionLedger* l : {&whole_line(4), &robin(0.0), &robin(1.5708)}) {
        double gamma_prev = INFINITY;
        double right = 0.0;
        for (std::size_t i = 0; i < l->entries.size(); ++i) {
            const LedgerEntry& e = l->entries[i];
            CAPTURE(e.n);
            CHECK(e.n == static_cast<long long>(i + 1));
            const Budgets b = budgets(e.n, l->E, gamma_prev);
            CHECK(e.eps == b.eps);
            CHECK(e.delta == b.delta);
            CHECK(nsa::bump::norm_p(e.bump, l->p) < e.eps);
            CHECK(nsa::bump::norm_inf(e.bump) < e.delta);
            CHECK(e.gamma <= gamma_prev);
            CHECK(e.gamma > 0.0);
            CHECK(e.t - e.bump.a > right);
            CHECK(std::abs(e.mu - e.target.q()) < e.r);
            right = e.t + e.bump.a;
            gamma_prev = e.gamma;
        }
        // Sup-norm budget of every later step, including those never built.
        const double sum_all = kPi * kPi / 6.0;
        for (std::size_t i = 0; i < l->entries.size(); ++i) {
            double built = 0.0, partial = 0.0;
            for (std::size_t j = 0; j < l->entries.size(); ++j) {
                if (j > i) built += l->entries[j].delta;
            }
            for (std::size_t j = 1; j <= l->entries.size(); ++j) partial += 1.0 / static_cast<double>(j * j);
            const double unbuilt = 6.0 / (kPi * kPi) * l->entries.back().gamma * (sum_all - partial);
            CHECK(built + unbuilt < l->entries[i].gamma);
        }
    }
}

TEST_CASE("deep whole-line runs stop where double precision runs out") {
    const ConstructionLedger& l = whole_line(5);
    REQUIRE(l.failed_at.has_value());
    CHECK(*l.failed_at == 5);
    CHECK(l.entries.size() == 4);
    CHECK_FALSE(l.failure.empty());
    for (const auto& e : l.entries) CHECK(e.verified);
}

TEST_CASE("d = 3 ledgers never claim multi-bump eigenvalues") {
    const ConstructionLedger l = build(3, 4.0, 1.0, 2, Domain::whole());
    REQUIRE_FALSE(l.entries.empty());
    for (const auto& e : l.entries) {
        CHECK_FALSE(e.verified);
        CHECK(e.lambda == e.mu);
        CHECK(e.mu.imag() < 0.0);
    }
}

TEST_CASE("build validates its configuration") {
    CHECK_THROWS_AS(build(1, 1.0, 1.0, 1, Domain::whole()), nsa::InvalidArgument);
    CHECK_THROWS_AS(build(1, 1.5, 0.0, 1, Domain::whole()), nsa::InvalidArgument);
    CHECK_THROWS_AS(build(1, 1.5, 1.0, -1, Domain::whole()), nsa::InvalidArgument);
    CHECK_THROWS_AS(build(2, 3.0, 1.0, 1, Domain::robin(0.0)), nsa::InvalidArgument);
    CHECK_THROWS_AS(build(1, 1.5, 1.0, 1, Domain::robin(kPi)), nsa::InvalidArgument);
    CHECK_THROWS_AS(build(0, 1.5, 1.0, 1, Domain::whole()), nsa::InvalidArgument);
}

TEST_CASE("wavenumber_of picks the decaying root") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const cplx mu{rng.uniform(-5.0, 5.0), -rng.uniform(1e-12, 5.0)};
        const cplx k = wavenumber_of(mu);
        CHECK(k.imag() > 0.0);
        CHECK(std::abs(k * k - mu) <= 1e-14 * std::abs(mu));
    }
}

}  // TEST_SUITE
