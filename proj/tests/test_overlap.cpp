#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "busgate/errors.hpp"
#include "busgate/overlap.hpp"
#include "busgate/quadrature.hpp"
#include "busgate/types.hpp"

using busgate::coherent_overlap;
using busgate::CoherentLabel;
using busgate::Complex;
using busgate::Convention;
using busgate::full_line_mass;
using busgate::integrate;
using busgate::QuadratureOptions;
using busgate::quadrature_amplitude;
using busgate::usage_error;

namespace {

// Independent route: <a|b> = sum_n conj(c_n(a)) c_n(b), with Poisson
// coefficients c_n = e^{-|z|^2/2} z^n / sqrt(n!). No shared code with
// coherent_overlap's closed form.
Complex overlap_fock_series(Complex a, Complex b, int n_terms) {
    Complex ca = std::exp(Complex(-0.5 * std::norm(a), 0.0));
    Complex cb = std::exp(Complex(-0.5 * std::norm(b), 0.0));
    Complex sum(0.0, 0.0);
    for (int n = 0; n < n_terms; ++n) {
        sum += std::conj(ca) * cb;
        const double r = std::sqrt(n + 1.0);
        ca *= a / r;
        cb *= b / r;
    }
    return sum;
}

}  // namespace

TEST_CASE("coherent overlap: self-overlap is exactly one") {
    for (Complex a : {Complex(0, 0), Complex(2, 0), Complex(-1.3, 4.7), Complex(0, 9)}) {
        CAPTURE(a);
        CHECK(coherent_overlap(a, a) == Complex(1.0, 0.0));
    }
}

TEST_CASE("coherent overlap: conjugate symmetry is exact") {
    const std::vector<std::pair<Complex, Complex>> pairs = {
        {{1.0, 0.5}, {0.3, -2.0}}, {{0.0, 0.0}, {3.0, 1.0}}, {{-2.2, 1.1}, {0.7, 0.7}}};
    for (const auto& [a, b] : pairs) {
        CHECK(coherent_overlap(a, b) == std::conj(coherent_overlap(b, a)));
    }
}

TEST_CASE("coherent overlap magnitude never exceeds one") {
    const std::vector<Complex> labels = {{0, 0},    {1, 0},   {0, 1},   {2.5, -1.5},
                                         {-3, 0.2}, {5, 5},   {9, -9},  {0.01, 0},
                                         {7.3, 2}, {-4, -6}};
    for (const auto& a : labels) {
        for (const auto& b : labels) {
            CHECK(std::abs(coherent_overlap(a, b)) <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("coherent overlap agrees with the Fock-series route") {
    const std::vector<std::pair<Complex, Complex>> pairs = {
        {{1.0, 0.5}, {0.3, -2.0}},
        {{2.0, 0.0}, {2.0, 0.1}},
        {{0.0, 0.0}, {1.0, 1.0}},
        {{-1.5, 2.5}, {2.5, -1.5}},
    };
    for (const auto& [a, b] : pairs) {
        const Complex direct = coherent_overlap(a, b);
        const Complex series = overlap_fock_series(a, b, 300);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(std::abs(direct - series) <= 1e-12);
    }
}

TEST_CASE("coherent overlap frozen spot value") {
    const Complex got = coherent_overlap(Complex(1.0, 0.5), Complex(0.3, -2.0));
    CHECK(std::abs(got - Complex(-0.0188234316130363762, -0.0287806459087511757)) <=
          1e-15);
}

TEST_CASE("coherent label guard rejects non-finite and oversized values") {
    CHECK_NOTHROW(CoherentLabel(Complex(1.0e4, 0.0)));
    CHECK_THROWS_AS(CoherentLabel(Complex(1.0e5, 0.0)), usage_error);
    CHECK_THROWS_AS(CoherentLabel(std::numeric_limits<double>::quiet_NaN()), usage_error);
    CHECK_THROWS_AS(CoherentLabel(Complex(0.0, std::numeric_limits<double>::infinity())),
                    usage_error);
}

TEST_CASE("quadrature amplitude frozen spots in both conventions") {
    const Complex a = std::polar(1.2, 0.4);
    const Complex pv = quadrature_amplitude(0.35, a, Convention::Unnormalized);
    CHECK(std::abs(pv - Complex(0.0800200527869915143, 0.526049095968590127)) <= 1e-14);
    const Complex nm = quadrature_amplitude(0.35, a, Convention::Normalized);
    CHECK(std::abs(nm - Complex(0.715360427521689671, -0.0218867918014033993)) <= 1e-14);
}

TEST_CASE("point-outcome probability ratios separate the two conventions") {
    for (double alpha : {0.8, 2.0, 4.0}) {
        for (double theta : {0.05, 0.3}) {
            const double d = 2.0 * alpha * std::sin(theta);
            const Complex rotated = std::polar(alpha, theta);
            CAPTURE(alpha);
            CAPTURE(theta);
            const double r_pv =
                std::norm(quadrature_amplitude(0.0, rotated, Convention::Unnormalized)) /
                std::norm(quadrature_amplitude(0.0, Complex(alpha, 0.0),
                                               Convention::Unnormalized));
            CHECK(std::fabs(r_pv - std::exp(-d * d)) <= 1e-12 * std::exp(-d * d));
            const double r_nm =
                std::norm(quadrature_amplitude(0.0, rotated, Convention::Normalized)) /
                std::norm(
                    quadrature_amplitude(0.0, Complex(alpha, 0.0), Convention::Normalized));
            CHECK(std::fabs(r_nm - std::exp(-d * d / 2.0)) <=
                  1e-12 * std::exp(-d * d / 2.0));
        }
    }
}

namespace {

// Numerically integrates |amplitude|^2 over the full line.  The density is a
// narrow Gaussian whose position depends on the label and the convention, so a
// blind wide-interval pass can converge falsely to zero when every sample of
// the adaptive integrator lands in the tails.  Locate the peak with a coarse
// scan first, then split the integral there so the maximum is always sampled.
double full_line_mass_by_quadrature(Complex a, Convention conv) {
    double peak = 0.0;
    double best = -1.0;
    for (double p = -80.0; p <= 80.0; p += 0.25) {
        const double v = std::norm(quadrature_amplitude(p, a, conv));
        if (v > best) {
            best = v;
            peak = p;
        }
    }
    const auto density = [&](double p) {
        return std::norm(quadrature_amplitude(p, a, conv));
    };
    const QuadratureOptions opts{1e-12, 50};
    return integrate(density, peak - 20.0, peak, opts) +
           integrate(density, peak, peak + 20.0, opts);
}

}  // namespace

TEST_CASE("normalized amplitude satisfies completeness: unit full-line mass") {
    for (Complex a : {Complex(0.0, 0.0), Complex(1.5, 0.8), Complex(-2.0, 2.0)}) {
        CAPTURE(a);
        CHECK(full_line_mass(a, Convention::Normalized) == 1.0);
        const double mass = full_line_mass_by_quadrature(a, Convention::Normalized);
        CHECK(std::fabs(mass - 1.0) <= 1e-9);
    }
}

TEST_CASE("unnormalized full-line mass matches its closed form") {
    for (Complex a : {Complex(0.0, 0.0), Complex(1.5, 0.8), Complex(-1.0, -2.2)}) {
        CAPTURE(a);
        const double want =
            std::sqrt(2.0 * std::numbers::pi) * std::exp(-2.0 * a.imag() * a.imag());
        CHECK(std::fabs(full_line_mass(a, Convention::Unnormalized) - want) <=
              1e-14 * want);
        const double mass = full_line_mass_by_quadrature(a, Convention::Unnormalized);
        CHECK(std::fabs(mass - want) <= 1e-9 * std::max(1.0, want));
    }
}
