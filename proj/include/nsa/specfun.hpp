#pragma once

#include <complex>

namespace nsa::specfun {

using cplx = std::complex<double>;

/// Bessel function request: real order, complex argument.
///
/// accuracy_target is relative to the natural size of J near z
/// (|J| envelope, not |J(z)| itself, which vanishes at the zeros).
struct BesselQuery {
    double order = 0.0;
    cplx z{};
    double accuracy_target = 1e-12;
};

/// J_order(z) for real order and complex z, principal branch of z^order.
///
/// Regimes: ascending series for |z| <= 8, Miller backward recurrence
/// normalised by the Gegenbauer expansion of exp(-iz) for 8 < |z| < 30,
/// Hankel asymptotic expansion for |z| >= 30.
///
/// Throws InvalidArgument on non-finite input or an unbounded value
/// (negative non-integer order at z = 0) and AccuracyFailure when the
/// estimated error exceeds the target.
cplx bessel_j(const BesselQuery& query);
cplx bessel_j(double order, cplx z);

/// J_{order-1}(z) / J_order(z).
///
/// Continued fraction (modified Lentz) for |z| < 30, ratio of Hankel
/// expansions beyond. Throws PoleError when z is numerically at a zero
/// of J_order; PoleError::distance() estimates |z - zero|.
cplx bessel_j_ratio(double order, cplx z);

/// J_order(z) / z^order, an entire even function of z.
cplx bessel_j_scaled(double order, cplx z);

/// Gamma(x) for x > 0.
double gamma_real(double x);

}  // namespace nsa::specfun
