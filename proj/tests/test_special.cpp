#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "busgate/errors.hpp"
#include "busgate/special.hpp"



using busgate::hermite_functions;
using busgate::usage_error;

namespace {

// Independent high-precision reference values (40-digit arithmetic, rounded
// to 18 significant digits).
struct ErfPoint {
    double x;
    double value;
};
const std::vector<ErfPoint> kErfTable = {
    {0.1, 0.112462916018284892}, {0.5, 0.520499877813046538},
    {1.0, 0.842700792949714869}, {1.5, 0.966105146475310727},
    {2.0, 0.995322265018952734}, {2.5, 0.999593047982555041},
    {3.0, 0.999977909503001415}, {4.0, 0.999999984582742100},
    {5.0, 0.999999999998462540}, {6.0, 0.999999999999999978},
};

// Explicit Hermite polynomial coefficients (physicists' H_n), constant term
// first. Independent of the recurrence used by hermite_functions.
const std::vector<std::vector<double>> kHermiteCoeffs = {
    {1},
    {0, 2},
    {-2, 0, 4},
    {0, -12, 0, 8},
    {12, 0, -48, 0, 16},
    {0, 120, 0, -160, 0, 32},
    {-120, 0, 720, 0, -480, 0, 64},
    {0, -1680, 0, 3360, 0, -1344, 0, 128},
    {1680, 0, -13440, 0, 13440, 0, -3584, 0, 256},
    {0, 30240, 0, -80640, 0, 48384, 0, -9216, 0, 512},
    {-30240, 0, 302400, 0, -403200, 0, 161280, 0, -23040, 0, 1024},
};

double hermite_poly(int n, double p) {
    const auto& c = kHermiteCoeffs[static_cast<std::size_t>(n)];
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * p + *it;
    return acc;
}

// psi_n(p) = H_n(p) e^{-p^2/2} / (pi^{1/4} sqrt(2^n n!)).
double hermite_function_reference(int n, double p) {
    double log_norm = 0.0;
    for (int k = 1; k <= n; ++k) log_norm += std::log(2.0 * k);
    return hermite_poly(n, p) * std::exp(-0.5 * p * p - 0.5 * log_norm) *
           std::pow(std::numbers::pi, -0.25);
}

}  // namespace

TEST_CASE("erf matches high-precision reference table") {
    for (const auto& pt : kErfTable) {
        CAPTURE(pt.x);
        CHECK(std::fabs(busgate::erf(pt.x) - pt.value) <= 1e-13);
    }
}

TEST_CASE("erf odd symmetry is exact") {
    for (double x : {0.0, 1e-8, 0.3, 1.0, 1.99, 2.0, 3.7, 10.0, 25.0}) {
        CAPTURE(x);
        CHECK(busgate::erf(-x) == -busgate::erf(x));
    }
    CHECK(busgate::erf(0.0) == 0.0);
    CHECK(std::signbit(busgate::erf(-0.0)));
}

TEST_CASE("erf asymptote and edge behavior") {
    for (double x : {6.0, 8.0, 12.0, 30.0}) {
        CAPTURE(x);
        CHECK(std::fabs(busgate::erf(x) - 1.0) <= 1e-12);
        CHECK(busgate::erf(x) <= 1.0);
    }
    CHECK(std::isnan(busgate::erf(std::numeric_limits<double>::quiet_NaN())));
    CHECK(busgate::erf(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(busgate::erf(-std::numeric_limits<double>::infinity()) == -1.0);
}

TEST_CASE("erf agrees with the C library implementation on a dense grid") {
    for (int i = -240; i <= 240; ++i) {
        const double x = i * 0.025;
        CAPTURE(x);
        CHECK(std::fabs(busgate::erf(x) - std::erf(x)) <= 1e-14);
    }
}

TEST_CASE("erfc complements erf and stays accurate in the tail") {
    for (double x : {-3.0, -1.0, 0.0, 0.5, 1.5, 1.999, 2.0, 2.5, 4.0}) {
        CAPTURE(x);
        CHECK(std::fabs(busgate::erfc(x) + busgate::erf(x) - 1.0) <= 1e-14);
    }
    // Relative accuracy in the far tail, where 1 - busgate::erf(x) would be all
    // cancellation. Reference: C library (few-ulp class).
    for (double x : {2.0, 3.0, 5.0, 8.0, 15.0, 25.0}) {
        CAPTURE(x);
        const double ref = std::erfc(x);
        CHECK(std::fabs(busgate::erfc(x) - ref) <= 1e-12 * ref);
    }
    CHECK(std::fabs(busgate::erfc(3.0) - 2.2090496998585e-05) <= 1e-17);
}

TEST_CASE("hermite functions match explicit polynomial construction") {
    for (int k = 0; k < 20; ++k) {
        const double p = -5.0 + 10.0 * k / 19.0;
        const auto psi = hermite_functions(p, 10);
        REQUIRE(psi.size() == 11);
        for (int n = 0; n <= 10; ++n) {
            const double ref = hermite_function_reference(n, p);
            CAPTURE(p);
            CAPTURE(n);
            // Relative tolerance with an absolute floor: near a polynomial
            // root the relative error of any evaluation is ill-conditioned.
            CHECK(std::fabs(psi[static_cast<std::size_t>(n)] - ref) <=
                  1e-12 * std::max(std::fabs(ref), 1e-6));
        }
    }
}

TEST_CASE("hermite functions: exact odd-n zeros at the origin") {
    const auto psi = hermite_functions(0.0, 15);
    for (int n = 1; n <= 15; n += 2) {
        CAPTURE(n);
        CHECK(psi[static_cast<std::size_t>(n)] == 0.0);
    }
}

TEST_CASE("hermite functions respect the uniform amplitude bound") {
    const double bound = std::pow(std::numbers::pi, -0.25) + 1e-12;
    for (double p : {0.0, 0.5, 1.7, 4.0, 11.3, 25.0}) {
        const auto psi = hermite_functions(p, 2000);
        CAPTURE(p);
        for (double v : psi) {
            CHECK(std::isfinite(v));
            CHECK(std::fabs(v) <= bound);
        }
    }
}

TEST_CASE("hermite functions stay finite and bounded at very large order") {
    const auto psi = hermite_functions(0.5, 100000);
    CHECK(psi.size() == 100001u);
    const double bound = std::pow(std::numbers::pi, -0.25) + 1e-12;
    for (std::size_t n = 0; n < psi.size(); n += 997) {
        CHECK(std::isfinite(psi[n]));
        CHECK(std::fabs(psi[n]) <= bound);
    }
    CHECK(std::fabs(psi.back()) <= bound);
}

TEST_CASE("hermite functions reject negative order") {
    CHECK_THROWS_AS(hermite_functions(0.0, -1), usage_error);
}
