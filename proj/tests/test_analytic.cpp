#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "busgate/analytic.hpp"
#include "busgate/errors.hpp"
#include "busgate/overlap.hpp"
#include "busgate/types.hpp"

using namespace busgate;

TEST_CASE("separation between even and odd probe labels") {
    CHECK(separation_d(1.0, 0.0) == 0.0);
    CHECK(separation_d(2.0, 0.3) == 2.0 * 2.0 * std::sin(0.3));
    CHECK(separation_d(107.0, 0.01) == doctest::Approx(2.1399643).epsilon(1e-6));
    CHECK_THROWS_AS(separation_d(-1.0, 0.1), usage_error);
    CHECK_THROWS_AS(separation_d(1.0, std::numeric_limits<double>::quiet_NaN()),
                    usage_error);
}

TEST_CASE("point discrimination error: exact midpoint at zero separation") {
    CHECK(postselect_error_point(0.0, Convention::Unnormalized) == 0.5);
    CHECK(postselect_error_point(0.0, Convention::Normalized) == 0.5);
}

TEST_CASE("point discrimination error: frozen values") {
    CHECK(std::fabs(postselect_error_point(1.0, Convention::Unnormalized) -
                    0.268941421369995121) <= 1e-16);
    CHECK(std::fabs(postselect_error_point(2.0, Convention::Unnormalized) -
                    0.017986209962091558) <= 1e-16);
    CHECK(std::fabs(postselect_error_point(4.0, Convention::Unnormalized) -
                    1.12535162055094991e-7) <= 1e-21);
    CHECK(std::fabs(postselect_error_point(1.0, Convention::Normalized) -
                    0.377540668798145435) <= 1e-16);
    CHECK(std::fabs(postselect_error_point(2.0, Convention::Normalized) -
                    0.119202922022117556) <= 1e-16);
}

TEST_CASE("point discrimination error decreases monotonically with separation") {
    for (Convention conv : {Convention::Unnormalized, Convention::Normalized}) {
        double prev = 0.5;
        for (int i = 1; i <= 60; ++i) {
            const double d = 0.1 * i;
            const double cur = postselect_error_point(d, conv);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(postselect_error_point(-0.5, Convention::Normalized), usage_error);
}

TEST_CASE("windowed acceptance error: frozen values") {
    CHECK(std::fabs(postselect_error_window(2.0, 4.0) - 0.0023443506159656934) <= 1e-17);
    CHECK(std::fabs(postselect_error_window(0.5, 1.5) - 0.127864240789285077) <= 1e-15);
    // Exercises the cancellation-free difference route (d far outside window).
    CHECK(std::fabs(postselect_error_window(0.01, 4.0) - 1.12655234763182796e-7) <=
          1e-12 * 1.12655234763182796e-7);
}

TEST_CASE("windowed acceptance error: zero separation gives exactly one half") {
    for (double x0 : {0.01, 0.3, 1.0, 5.0}) {
        CHECK(postselect_error_window(x0, 0.0) == 0.5);
    }
}

TEST_CASE("windowed acceptance error: narrow-window limit reaches the point formula") {
    for (double d : {0.5, 1.0, 2.0, 4.0}) {
        const double windowed = postselect_error_window(1e-4, d);
        const double point = postselect_error_point(d, Convention::Unnormalized);
        CAPTURE(d);
        CHECK(std::fabs(windowed - point) <= 1e-6);
    }
}

TEST_CASE("windowed acceptance error: continuity across the evaluation-route seam") {
    // The implementation switches numerator routes once d - x0 > 1.
    const double below = postselect_error_window(1.0, 2.0);
    const double above = postselect_error_window(1.0, 2.0 + 1e-12);
    CHECK(std::fabs(above - below) <= 1e-11);
}

TEST_CASE("windowed acceptance error: domain guards") {
    CHECK_THROWS_AS(postselect_error_window(0.0, 1.0), usage_error);
    CHECK_THROWS_AS(postselect_error_window(-0.1, 1.0), usage_error);
    CHECK_THROWS_AS(postselect_error_window(0.5, -1.0), usage_error);
}

TEST_CASE("windowed acceptance error: wide window saturates at one half") {
    CHECK(std::fabs(postselect_error_window(30.0, 1.0) - 0.5) <= 1e-12);
}

TEST_CASE("retained coherence after probe loss matches the direct exponential") {
    for (double alpha : {0.5, 1.0, 3.0, 50.0}) {
        for (double theta : {0.01, 0.1, 0.7}) {
            for (double etap : {0.0, 0.1, 0.5, 1.0}) {
                const double got = loss_gamma(alpha, theta, etap);
                const double expo = alpha * alpha * etap * etap * (std::cos(theta) - 1.0);
                const double want = std::exp(expo);
                CAPTURE(alpha);
                CAPTURE(theta);
                CAPTURE(etap);
                // Error budget for the reference form: cos(theta) - 1 cancels, so
                // cos's ~ulp(1) rounding contributes alpha^2*etap^2 * eps to the
                // exponent; each side also carries ~|exponent| * eps.  exp() turns
                // exponent error into relative deviation.
                const double scale = alpha * alpha * etap * etap + std::fabs(expo);
                CHECK(std::fabs(got - want) <= (1e-14 + 5e-16 * scale) * want);
            }
        }
    }
    CHECK(loss_gamma(2.0, 0.1, 0.0) == 1.0);
}

TEST_CASE("small-angle coherence approximation: relative error bounded by theta^2/4") {
    for (double theta : {0.1, 0.05, 0.02, 0.01, 0.002}) {
        for (double x : {0.1, 0.5, 1.0, 2.0}) {  // x = alpha * theta * eta_prime
            const double etap = 0.5;
            const double alpha = x / (theta * etap);
            const double exact = loss_gamma(alpha, theta, etap);
            const double approx = loss_gamma_small_theta(alpha, theta, etap);
            CAPTURE(theta);
            CAPTURE(x);
            CHECK(std::fabs(exact - approx) / exact <= theta * theta / 4.0);
        }
    }
}

TEST_CASE("small-angle coherence depends only on the product alpha*theta*eta_prime") {
    CHECK(loss_gamma_small_theta(2.0, 0.05, 0.5) == loss_gamma_small_theta(1.0, 0.1, 0.5));
    CHECK(loss_gamma_small_theta(4.0, 0.25, 1.0) == loss_gamma_small_theta(8.0, 0.125, 1.0));
}

TEST_CASE("loss-equivalent phase-flip probability: frozen value and bounds") {
    // Tolerance budget: exp(-0.02) carries up to ~0.5 ulp(0.98) ~ 5.5e-17 of
    // rounding, which propagates unreduced into (1 - gamma) / 2.
    CHECK(std::fabs(loss_dephasing(std::exp(-0.02)).p_flip - 0.00990066334662234889) <=
          1e-16);
    CHECK(loss_dephasing(1.0).p_flip == 0.0);
    CHECK(loss_dephasing(0.0).p_flip == 0.5);
    CHECK_THROWS_AS(loss_dephasing(1.5), usage_error);
    CHECK_THROWS_AS(loss_dephasing(-0.1), usage_error);
}

TEST_CASE("loss budget threshold: frozen operating point and exact roundtrip") {
    const double alpha = 107.182939685610916;
    const LossThreshold t = loss_threshold(alpha, 0.01, 0.01);
    CHECK(!t.saturated);
    CHECK(std::fabs(t.eta_prime - 0.187540089839698339) <= 1e-13);
    CHECK(std::fabs(t.loss_fraction - 0.0351712852970821243) <= 1e-13);
    // Inverting the small-angle form lands exactly back on the budget.
    const double p_back =
        loss_dephasing(loss_gamma_small_theta(alpha, 0.01, t.eta_prime)).p_flip;
    CHECK(std::fabs(p_back - 0.01) <= 1e-13);
}

TEST_CASE("loss budget threshold saturates when full out-coupling fits the budget") {
    const LossThreshold t = loss_threshold(1.0, 0.01, 0.01);
    CHECK(t.saturated);
    CHECK(t.eta_prime == 1.0);
    CHECK(t.loss_fraction == 1.0);
    CHECK_THROWS_AS(loss_threshold(1.0, 0.01, 0.0), usage_error);
    CHECK_THROWS_AS(loss_threshold(1.0, 0.01, 0.5), usage_error);
}

TEST_CASE("cross-phase offset factor: identities") {
    for (Convention conv : {Convention::Unnormalized, Convention::Normalized}) {
        CHECK(mismatch_lambda(1.7, 0.0, conv) == Complex(1.0, 0.0));
        for (double delta : {0.1, 0.5, 1.2}) {
            const Complex plus = mismatch_lambda(1.3, delta, conv);
            CHECK(std::abs(plus) <= 1.0);
            CHECK(mismatch_lambda(1.3, -delta, conv) == std::conj(plus));
        }
    }
    // The two conventions differ only by alpha -> alpha / sqrt(2).
    const Complex nrm = mismatch_lambda(2.0, 0.3, Convention::Normalized);
    const Complex scaled = mismatch_lambda(2.0 / std::sqrt(2.0), 0.3, Convention::Unnormalized);
    CHECK(std::abs(nrm - scaled) <= 1e-14);
}

TEST_CASE("uniform cross-phase spread: frozen channel parameters") {
    {
        const MismatchDephasing m = mismatch_dephasing(1.0, 0.5, Convention::Unnormalized);
        CHECK(std::fabs(m.channel.p_flip - 0.0624588976496458762) <= 1e-11);
        CHECK(std::fabs(m.bias.mu - 0.86900133093537674) <= 1e-11);
        // At delta0 = 1/2 the width factor is one, so both scalings coincide.
        CHECK(m.mu_printed == m.bias.mu);
    }
    {
        const MismatchDephasing m = mismatch_dephasing(0.5, 0.2, Convention::Unnormalized);
        CHECK(std::fabs(m.channel.p_flip - 0.000811138728904704469) <= 1e-11);
        CHECK(std::fabs(m.bias.mu - 0.993442722404285874) <= 1e-11);
        // The width-inconsistent variant exceeds one here: not a valid weight.
        CHECK(std::fabs(m.mu_printed - 1.57077086385796497) <= 1e-10);
        CHECK(m.mu_printed > 1.0);
    }
    {
        const MismatchDephasing m = mismatch_dephasing(2.0, 0.8, Convention::Unnormalized);
        CHECK(std::fabs(m.channel.p_flip - 0.464288645811042812) <= 1e-11);
        CHECK(std::fabs(m.bias.mu - 0.530665998781927301) <= 1e-11);
        CHECK(std::fabs(m.mu_printed - 0.419528308239757276) <= 1e-11);
    }
    {
        const MismatchDephasing m = mismatch_dephasing(1.0, 0.5, Convention::Normalized);
        CHECK(std::fabs(m.channel.p_flip - 0.0170620656064338952) <= 1e-11);
        CHECK(std::fabs(m.bias.mu - 0.928125661874784339) <= 1e-11);
    }
}

TEST_CASE("uniform cross-phase spread: degenerate and invalid widths") {
    const MismatchDephasing m = mismatch_dephasing(1.0, 0.0, Convention::Unnormalized);
    CHECK(m.channel.p_flip == 0.0);
    CHECK(m.bias.mu == 1.0);
    CHECK(m.mu_printed == 1.0);
    CHECK(m.mean_lambda == 1.0);
    CHECK_THROWS_AS(mismatch_dephasing(1.0, -0.1, Convention::Unnormalized), usage_error);
}

TEST_CASE("uniform cross-phase spread: mean never exceeds the RMS weight") {
    for (double alpha : {0.3, 1.0, 2.5}) {
        for (double delta0 : {1e-9, 1e-4, 0.1, 0.7, 1.4}) {
            for (Convention conv : {Convention::Unnormalized, Convention::Normalized}) {
                const MismatchDephasing m = mismatch_dephasing(alpha, delta0, conv);
                CAPTURE(alpha);
                CAPTURE(delta0);
                CHECK(m.mean_lambda <= m.bias.mu * (1.0 + 1e-14));
                CHECK(m.channel.p_flip >= 0.0);
                CHECK(m.channel.p_flip <= 0.5);
            }
        }
    }
}

TEST_CASE("mode-overlap gate error: exact corners and symmetry") {
    CHECK(mode_mismatch_error({1.0, 1.0}) == 0.0);
    CHECK(mode_mismatch_error({1.0, 0.0}) == 1.0);
    CHECK(mode_mismatch_error({0.0, 1.0}) == 1.0);
    CHECK(mode_mismatch_error({0.0, 0.0}) == 1.0);
    for (double a : {0.2, 0.7, 0.95}) {
        for (double b : {0.1, 0.5, 0.99}) {
            // Swapping the arguments reorders the denominator sum, so equality
            // holds only to rounding (fp addition is not associative).  The noise
            // is absolute, ~ulp of the O(1) quotient, even when the error is small.
            const double pab = mode_mismatch_error({a, b});
            const double pba = mode_mismatch_error({b, a});
            CHECK(std::fabs(pab - pba) <= 1e-15);
        }
    }
}

TEST_CASE("mode-overlap gate error: frozen values") {
    CHECK(std::fabs(mode_mismatch_error({0.995, 0.995}) - 0.0101739612575362225) <= 1e-15);
    CHECK(std::fabs(mode_mismatch_error({0.9, 0.97}) - 0.153526708264934615) <= 1e-15);
    CHECK_THROWS_AS(mode_mismatch_error({1.2, 0.5}), usage_error);
    CHECK_THROWS_AS(mode_mismatch_error({0.5, -0.1}), usage_error);
}

TEST_CASE("gaussian wavepacket overlap") {
    CHECK(gaussian_mode_overlap(0.0, 1.0) == 1.0);
    CHECK(std::fabs(gaussian_mode_overlap(0.141598613320106805, 1.0) - 0.995) <= 1e-15);
    // Scale invariance: only the ratio delta_t / sigma matters.
    CHECK(std::fabs(gaussian_mode_overlap(0.2, 1.0) - gaussian_mode_overlap(0.4, 2.0)) <=
          1e-16);
    CHECK_THROWS_AS(gaussian_mode_overlap(0.1, 0.0), usage_error);
    CHECK_THROWS_AS(gaussian_mode_overlap(0.1, -1.0), usage_error);
}

TEST_CASE("default Fock cutoff covers the coherent tail") {
    CHECK(default_fock_cutoff(0.0) == 30);
    CHECK(default_fock_cutoff(1.0) == 41);
    CHECK(default_fock_cutoff(2.5) == 62);
    for (double alpha : {1.0, 2.0, 5.0, 8.0}) {
        const int n = default_fock_cutoff(alpha);
        CHECK(n == static_cast<int>(std::ceil(alpha * alpha + 10.0 * alpha + 30.0)));
        // |c_n psi_n| <= e^{-a^2/2} a^n / sqrt(n!) * pi^{-1/4}: negligible at the cutoff.
        const double log_cn = -0.5 * alpha * alpha + n * std::log(alpha) -
                              0.5 * std::lgamma(n + 1.0);
        CAPTURE(alpha);
        CHECK(log_cn - 0.25 * std::log(std::numbers::pi) < std::log(1e-14));
    }
}

TEST_CASE("self-phase conditional amplitude: frozen spot value") {
    const Complex got = self_kerr_gamma(0.7, 2.0, 0.3, SelfKerrParams{0.1, 0});
    CHECK(std::abs(got - Complex(0.318901459064374779, -0.0352218217842460089)) <= 1e-13);
}

TEST_CASE("self-phase conditional amplitude reduces to the plain amplitude at zero strength") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> ua(0.0, 5.0);
    std::uniform_real_distribution<double> ut(-3.1, 3.1);
    std::uniform_real_distribution<double> up(-4.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double alpha = ua(rng);
        const double theta = ut(rng);
        const double p = up(rng);
        const Complex series = self_kerr_gamma(p, alpha, theta, SelfKerrParams{0.0, 0});
        const Complex closed =
            quadrature_amplitude(p, std::polar(alpha, theta), Convention::Normalized);
        worst = std::max(worst, std::abs(series - closed));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("self-phase conditional amplitude is stable under cutoff doubling") {
    const SelfKerrParams base{0.01, 0};
    const int floor_cut = default_fock_cutoff(2.0);
    const SelfKerrParams doubled{0.01, 2 * floor_cut};
    const Complex a = self_kerr_gamma(0.0, 2.0, 0.1, base);
    const Complex b = self_kerr_gamma(0.0, 2.0, 0.1, doubled);
    CHECK(std::abs(a - b) <= 1e-10);
    const double ea = self_kerr_error(2.0, 0.1, base);
    const double eb = self_kerr_error(2.0, 0.1, doubled);
    CHECK(std::fabs(ea - eb) <= 1e-10);
}

TEST_CASE("self-phase gate error: exact half at zero cross-phase") {
    for (double lam : {0.0, 0.01, 0.05}) {
        CHECK(self_kerr_error(2.0, 0.0, SelfKerrParams{lam, 0}) == 0.5);
    }
}

TEST_CASE("self-phase gate error: frozen values") {
    CHECK(std::fabs(self_kerr_error(2.0, 0.1, SelfKerrParams{0.02, 0}) -
                    0.493551182934768157) <= 1e-12);
    CHECK(std::fabs(self_kerr_error(4.0, 0.1, SelfKerrParams{0.005, 0}) -
                    0.52435865468238984) <= 1e-12);
}

TEST_CASE("self-phase gate error at zero strength equals the point discrimination error") {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        for (double theta : {0.05, 0.1, 0.3}) {
            const double d = separation_d(alpha, theta);
            const double via_series = self_kerr_error(alpha, theta, SelfKerrParams{0.0, 0});
            const double closed = postselect_error_point(d, Convention::Normalized);
            CAPTURE(alpha);
            CAPTURE(theta);
            CHECK(std::fabs(via_series - closed) <= 1e-12);
        }
    }
}

TEST_CASE("self-phase gate error grows with the self-phase strength") {
    double prev = -1.0;
    for (double lam : {0.0, 0.005, 0.01, 0.02, 0.04}) {
        const double cur = self_kerr_error(2.0, 0.1, SelfKerrParams{lam, 0});
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("self-phase series guards") {
    CHECK_THROWS_AS(self_kerr_gamma(0.0, 9.0, 0.1, SelfKerrParams{0.01, 0}), usage_error);
    CHECK_THROWS_AS(self_kerr_gamma(0.0, 2.0, 0.1, SelfKerrParams{0.01, 10}), usage_error);
    CHECK_NOTHROW(self_kerr_gamma(0.0, 8.0, 0.1, SelfKerrParams{0.01, 0}));
}
