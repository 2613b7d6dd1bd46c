#include "busgate/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "busgate/overlap.hpp"
#include "busgate/quadrature.hpp"
#include "busgate/special.hpp"

namespace busgate {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw usage_error(msg);
}

}  // namespace

double separation_d(double alpha, double theta) {
    require(alpha >= 0.0 && std::isfinite(alpha), "separation_d: alpha must be >= 0");
    require(std::isfinite(theta), "separation_d: theta must be finite");
    return 2.0 * alpha * std::sin(theta);
}

double postselect_error_point(double d, Convention conv) {
    require(std::isfinite(d) && d >= 0.0, "postselect_error_point: d must be >= 0");
    const double expo = conv == Convention::Unnormalized ? -d * d : -0.5 * d * d;
    const double e = std::exp(expo);
    return e / (1.0 + e);
}

double postselect_error_window(double x0, double d) {
    if (x0 == 0.0) {
        throw usage_error(
            "postselect_error_window: x0 must be > 0 (the x0 -> 0 limit is "
            "postselect_error_point)");
    }
    require(std::isfinite(x0) && x0 > 0.0, "postselect_error_window: x0 must be > 0");
    require(std::isfinite(d) && d >= 0.0, "postselect_error_window: d must be >= 0");
    // num = erf(x0 + d) + erf(x0 - d); for d - x0 > 1 the two near-unit erf
    // values cancel, so switch to the complement difference, which erfc
    // delivers with small relative error.
    double num;
    if (d - x0 > 1.0) {
        num = erfc(d - x0) - erfc(d + x0);
    } else {
        num = erf(x0 + d) + erf(x0 - d);
    }
    const double den = 2.0 * erf(x0) + num;
    return num / den;
}

double loss_gamma(double alpha, double theta, double eta_prime) {
    require(alpha >= 0.0 && std::isfinite(alpha), "loss_gamma: alpha must be >= 0");
    require(std::isfinite(theta), "loss_gamma: theta must be finite");
    require(eta_prime >= 0.0 && eta_prime <= 1.0, "loss_gamma: eta_prime must be in [0, 1]");
    // cos(theta) - 1 = -2 sin^2(theta/2), exact at small theta.
    const double s = std::sin(0.5 * theta);
    const double x = alpha * eta_prime;
    return std::exp(-2.0 * x * x * s * s);
}

double loss_gamma_small_theta(double alpha, double theta, double eta_prime) {
    require(alpha >= 0.0 && std::isfinite(alpha), "loss_gamma_small_theta: alpha must be >= 0");
    require(std::isfinite(theta), "loss_gamma_small_theta: theta must be finite");
    require(eta_prime >= 0.0 && eta_prime <= 1.0,
            "loss_gamma_small_theta: eta_prime must be in [0, 1]");
    const double x = alpha * theta * eta_prime;
    return std::exp(-0.5 * x * x);
}

DephasingChannel loss_dephasing(double gamma_mod) {
    require(gamma_mod >= 0.0 && gamma_mod <= 1.0, "loss_dephasing: gamma must be in [0, 1]");
    return DephasingChannel{0.5 * (1.0 - gamma_mod)};
}

LossThreshold loss_threshold(double alpha, double theta, double p_target) {
    require(p_target > 0.0 && p_target < 0.5, "loss_threshold: p_target must be in (0, 1/2)");
    require(alpha >= 0.0 && std::isfinite(alpha), "loss_threshold: alpha must be >= 0");
    require(std::isfinite(theta), "loss_threshold: theta must be finite");
    // Small-theta inversion: alpha theta eta' = sqrt(-2 ln(1 - 2 p)).
    const double x = std::sqrt(-2.0 * std::log1p(-2.0 * p_target));
    const double scale = alpha * std::fabs(theta);
    LossThreshold r;
    if (scale <= x) {  // even eta' = 1 stays inside the budget
        r.eta_prime = 1.0;
        r.loss_fraction = 1.0;
        r.saturated = true;
        return r;
    }
    r.eta_prime = x / scale;
    r.loss_fraction = r.eta_prime * r.eta_prime;
    r.saturated = false;
    return r;
}

Complex mismatch_lambda(double alpha, double delta, Convention conv) {
    require(alpha >= 0.0 && std::isfinite(alpha), "mismatch_lambda: alpha must be >= 0");
    require(std::isfinite(delta), "mismatch_lambda: delta must be finite");
    const double f = conv == Convention::Unnormalized ? 1.0 : 0.5;
    const double a2f = alpha * alpha * f;
    // e^{2 i delta} - 1 = -2 sin^2(delta) + i sin(2 delta).
    const double sd = std::sin(delta);
    const Complex expo(-2.0 * a2f * sd * sd, a2f * std::sin(2.0 * delta));
    return std::exp(expo);
}

MismatchDephasing mismatch_dephasing(double alpha, double delta0, Convention conv,
                                     double tol) {
    require(alpha >= 0.0 && std::isfinite(alpha), "mismatch_dephasing: alpha must be >= 0");
    require(delta0 >= 0.0 && std::isfinite(delta0),
            "mismatch_dephasing: delta0 must be >= 0");
    if (delta0 == 0.0) {
        return MismatchDephasing{DephasingChannel{0.0}, BiasedProjection{1.0}, 1.0, 1.0};
    }
    QuadratureOptions q{tol, 50};
    const Complex first = integrate(
        [&](double dl) { return mismatch_lambda(alpha, dl, conv); }, -delta0, delta0, q);
    const double second = integrate(
        [&](double dl) { return std::norm(mismatch_lambda(alpha, dl, conv)); }, -delta0,
        delta0, q);
    const double width = 2.0 * delta0;
    // lambda(-delta) = conj(lambda(delta)), so the mean is real.
    const double mean = first.real() / width;
    const double mu = std::sqrt(second / width);
    const double mu_printed = std::sqrt(second) / width;
    // Cauchy-Schwarz gives mean <= mu; clamp the fp residue.
    const double p = std::clamp(0.5 * (1.0 - mean / mu), 0.0, 0.5);
    return MismatchDephasing{DephasingChannel{p}, BiasedProjection{mu}, mu_printed, mean};
}

double mode_mismatch_error(const ModeOverlapParams& mp) {
    require(mp.lambda1_a >= 0.0 && mp.lambda1_a <= 1.0,
            "mode_mismatch_error: lambda1_a must be in [0, 1]");
    require(mp.lambda1_b >= 0.0 && mp.lambda1_b <= 1.0,
            "mode_mismatch_error: lambda1_b must be in [0, 1]");
    const double A = mp.lambda1_a * mp.lambda1_b;
    const double l0a2 = 1.0 - mp.lambda1_a * mp.lambda1_a;
    const double l0b2 = 1.0 - mp.lambda1_b * mp.lambda1_b;
    const double den =
        2.0 * A * A + (1.0 - A) * (1.0 - A) + l0a2 + l0b2 + l0a2 * l0b2;
    return 1.0 - 2.0 * A * A / den;
}

double gaussian_mode_overlap(double delta_t, double sigma) {
    require(sigma > 0.0 && std::isfinite(sigma), "gaussian_mode_overlap: sigma must be > 0");
    require(std::isfinite(delta_t), "gaussian_mode_overlap: delta_t must be finite");
    const double r = delta_t / (2.0 * sigma);
    return std::exp(-r * r);
}

int default_fock_cutoff(double alpha) {
    require(alpha >= 0.0 && std::isfinite(alpha), "default_fock_cutoff: alpha must be >= 0");
    return static_cast<int>(std::ceil(alpha * alpha + 10.0 * alpha + 30.0));
}

Complex self_kerr_gamma(double p, double alpha, double theta, const SelfKerrParams& sk) {
    require(alpha >= 0.0 && std::isfinite(alpha), "self_kerr_gamma: alpha must be >= 0");
    require(std::isfinite(theta), "self_kerr_gamma: theta must be finite");
    require(std::isfinite(p), "self_kerr_gamma: p must be finite");
    require(std::isfinite(sk.lambda_sk), "self_kerr_gamma: lambda must be finite");
    if (alpha > kMaxFockAlpha) {
        throw usage_error(
            "self_kerr_gamma: alpha exceeds the Fock-series ceiling of 8 (the "
            "coherent-coefficient series underflows)");
    }
    const int floor_cut = default_fock_cutoff(alpha);
    const int cutoff = sk.n_cutoff > 0 ? sk.n_cutoff : floor_cut;
    if (cutoff < floor_cut) {
        std::ostringstream msg;
        msg << "self_kerr_gamma: n_cutoff " << cutoff << " is below the safe floor "
            << floor_cut << " for alpha = " << alpha;
        throw usage_error(msg.str());
    }
    const Complex a = std::polar(alpha, theta);
    // c_0 = e^{-alpha^2/2}; c_{n+1} = c_n a / sqrt(n+1) (no factorials).
    Complex coeff(std::exp(-0.5 * alpha * alpha), 0.0);
    // (-i)^n cycles exactly through {1, -i, -1, i}.
    static constexpr Complex kIPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    double psi_prev = 0.0;
    double psi = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * p * p);
    Complex sum(0.0, 0.0);
    for (int n = 0; n <= cutoff; ++n) {
        const Complex term =
            coeff * std::polar(1.0, sk.lambda_sk * static_cast<double>(n) * n) *
            kIPow[n & 3] * psi;
        sum += term;
        const double np1 = static_cast<double>(n + 1);
        coeff *= a / std::sqrt(np1);
        const double next =
            std::sqrt(2.0 / np1) * p * psi - std::sqrt(static_cast<double>(n) / np1) * psi_prev;
        psi_prev = psi;
        psi = next;
    }
    // Geometric tail bound: |psi_n| <= pi^{-1/4} and |c_{n+1}/c_n| <=
    // alpha/sqrt(cutoff+2) < 1 past the cutoff. The amplitude itself is
    // bounded by 1, so the guard is absolute: a near-zero sum with a
    // negligible absolute tail is an accurate near-zero, not a failure.
    const double ratio = alpha / std::sqrt(static_cast<double>(cutoff) + 2.0);
    const double tail =
        std::pow(std::numbers::pi, -0.25) * std::abs(coeff) / (1.0 - ratio);
    if (tail > 1e-13 * std::max(1.0, std::abs(sum))) {
        std::ostringstream msg;
        msg << "self_kerr_gamma: truncation tail bound " << tail
            << " too large for cutoff " << cutoff;
        throw numerical_error(msg.str(), std::abs(sum));
    }
    return sum;
}

double self_kerr_error(double alpha, double theta, const SelfKerrParams& sk, double p) {
    const double g0 = std::norm(self_kerr_gamma(p, alpha, 0.0, sk));
    const double gp = std::norm(self_kerr_gamma(p, alpha, theta, sk));
    const double gm = std::norm(self_kerr_gamma(p, alpha, -theta, sk));
    return (gp + gm) / (2.0 * g0 + gp + gm);
}

}  // namespace busgate
