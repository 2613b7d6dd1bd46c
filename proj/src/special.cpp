#include "busgate/special.hpp"

#include <cmath>
#include <numbers>

#include "busgate/errors.hpp"

namespace busgate {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;
constexpr double kOneOverSqrtPi = std::numbers::inv_sqrtpi;

// erf(x) = (2/sqrt(pi)) x e^{-x^2} sum_{n>=0} (2x^2)^n / (1*3*...*(2n+1)).
// Every term is positive: no cancellation, plain forward summation. Used for
// 0 <= x < 2, where at most ~40 terms reach double precision.
double erf_series(double x) {
    const double x2 = 2.0 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 200; ++n) {
        term *= x2 / static_cast<double>(2 * n + 3);
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return kTwoOverSqrtPi * x * std::exp(-x * x) * sum;
}

// sqrt(pi) e^{x^2} erfc(x) = 1 / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// partial numerators a_k = k/2. Evaluated backward with doubling depth until
// two evaluations agree to relative 1e-17. Small *relative* error for
// x >= 2, which postselect_error_window relies on.
double erfc_cf_factor(double x) {
    double prev = 0.0;
    for (int depth = 32; depth <= 512; depth *= 2) {
        double s = 0.0;
        for (int k = depth; k >= 1; --k) {
            s = (0.5 * k) / (x + s);
        }
        const double val = 1.0 / (x + s);
        if (depth > 32 && std::abs(val - prev) <= 1e-17 * std::abs(val)) {
            return val;
        }
        prev = val;
    }
    return prev;
}

double erfc_pos_tail(double x) {  // x >= 2
    return kOneOverSqrtPi * std::exp(-x * x) * erfc_cf_factor(x);
}

}  // namespace

double erf(double x) {
    if (std::isnan(x)) return x;
    const double ax = std::fabs(x);
    double val;
    if (ax < 2.0) {
        val = erf_series(ax);
    } else {
        val = 1.0 - erfc_pos_tail(ax);
    }
    return std::signbit(x) ? -val : val;  // exact odd symmetry
}

double erfc(double x) {
    if (std::isnan(x)) return x;
    if (x >= 2.0) return erfc_pos_tail(x);
    if (x <= -2.0) return 2.0 - erfc_pos_tail(-x);
    return 1.0 - erf_series(x);
}

std::vector<double> hermite_functions(double p, std::int64_t n_max) {
    if (n_max < 0) {
        throw usage_error("hermite_functions: n_max must be >= 0");
    }
    std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
    // psi_0 = pi^{-1/4} e^{-p^2/2}; the recurrence preserves the Cramer bound
    // |psi_n| <= pi^{-1/4}, so no overflow at any order.
    psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * p * p);
    if (n_max == 0) return psi;
    psi[1] = std::numbers::sqrt2 * p * psi[0];
    for (std::int64_t n = 1; n < n_max; ++n) {
        const double np1 = static_cast<double>(n + 1);
        psi[static_cast<std::size_t>(n) + 1] =
            std::sqrt(2.0 / np1) * p * psi[static_cast<std::size_t>(n)] -
            std::sqrt(static_cast<double>(n) / np1) * psi[static_cast<std::size_t>(n) - 1];
    }
    return psi;
}

}  // namespace busgate
