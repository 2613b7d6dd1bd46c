#pragma once

#include <cstdint>
#include <vector>

namespace busgate {

// Error function, own implementation (no libm dependency in the library
// proper). Construction: for |x| < 2 a confluent-hypergeometric-style series
// with all-positive terms (no cancellation); for |x| >= 2 the complement via
// a Lentz-evaluated continued fraction, which keeps the *relative* error of
// erfc small deep in the tail. Odd symmetry erf(-x) = -erf(x) holds exactly.
// Absolute error <= 1e-12 over the real line (in practice ~1e-16).
double erf(double x);

// Complementary error function, same construction. Small relative error for
// x >= 2, which downstream code exploits to difference near-unit erf values
// without cancellation.
double erfc(double x);

// Quantum harmonic oscillator eigenfunctions psi_0..psi_n_max at momentum p,
// unit-normalized (hbar = 1): psi_0 = pi^{-1/4} exp(-p^2/2), three-term
// recurrence psi_{n+1} = sqrt(2/(n+1)) p psi_n - sqrt(n/(n+1)) psi_{n-1}.
// Every value obeys the Cramer bound |psi_n| <= pi^{-1/4}, so the recurrence
// cannot overflow for any n_max up to 1e6 and |p| <= 1e3. Negative n_max is
// a usage error.
std::vector<double> hermite_functions(double p, std::int64_t n_max);

}  // namespace busgate
