#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <sstream>
#include <type_traits>
#include <utility>

#include "busgate/errors.hpp"

namespace busgate {

struct QuadratureOptions {
    double tol = 1e-10;  // absolute tolerance on the whole interval
    int max_depth = 50;
};

namespace detail {

template <typename V>
double quad_norm(const V& v) {
    if constexpr (std::is_arithmetic_v<V>) {
        return std::abs(static_cast<double>(v));
    } else if constexpr (requires(const V& x) { { std::abs(x) } -> std::convertible_to<double>; }) {
        return std::abs(v);
    } else {
        return v.norm();  // Eigen vectors/matrices
    }
}

template <typename V>
struct SimpsonState {
    bool converged = true;
    V best{};
};

// One adaptive level: Richardson-extrapolated Simpson with tol halving per
// side. Evaluation order is fixed, so results are bit-deterministic.
template <typename F, typename V>
V simpson_recurse(F& f, double a, double b, const V& fa, const V& fm, const V& fb,
                  const V& whole, double tol, int depth, int max_depth,
                  SimpsonState<V>& state) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const V flm = f(lm);
    const V frm = f(rm);
    const V left = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
    const V right = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
    const V sum = left + right;
    const V delta = sum - whole;
    const double err = quad_norm(delta);
    if (err <= 15.0 * tol) {
        return sum + delta / 15.0;
    }
    if (depth >= max_depth) {
        state.converged = false;
        return sum + delta / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth, state) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth, state);
}

}  // namespace detail

// Deterministic adaptive Simpson integration of f over [lo, hi]. Works for
// any value type with +, scalar *, and a norm (double, std::complex, Eigen
// matrices). Throws usage_error for invalid bounds and numerical_error
// (carrying the norm of the best estimate) when the tolerance cannot be met
// within the depth budget.
template <typename F>
auto integrate(F&& f, double lo, double hi, QuadratureOptions opt = {}) {
    using V = std::decay_t<decltype(f(lo))>;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw usage_error("integrate: bounds must be finite");
    }
    if (lo > hi) {
        throw usage_error("integrate: lower bound exceeds upper bound");
    }
    if (!(opt.tol > 0.0)) {
        throw usage_error("integrate: tolerance must be positive");
    }
    const V flo = f(lo);
    if (lo == hi) {
        return V(0.0 * flo);
    }
    const double m = 0.5 * (lo + hi);
    const V fm = f(m);
    const V fhi = f(hi);
    const V whole = ((hi - lo) / 6.0) * (flo + 4.0 * fm + fhi);
    detail::SimpsonState<V> state;
    V result = detail::simpson_recurse(f, lo, hi, flo, fm, fhi, whole, opt.tol, 0,
                                       opt.max_depth, state);
    if (!state.converged) {
        const double best = detail::quad_norm(result);
        std::ostringstream msg;
        msg << "integrate: failed to reach tol " << opt.tol << " within depth "
            << opt.max_depth << "; best estimate has norm " << best;
        throw numerical_error(msg.str(), best);
    }
    return result;
}

}  // namespace busgate
