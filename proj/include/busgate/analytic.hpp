#pragma once

#include "busgate/types.hpp"

namespace busgate {

// Operating point of the two-interaction parity gate: probe amplitude alpha,
// cross-phase theta per qubit (second interaction applied with opposite
// sign), post-selection window half-width x0 around p = 0.
struct GateParams {
    double alpha = 1.0;
    double theta_a = 0.01;
    double theta_b = 0.01;
    double window_halfwidth = 0.1;
};

// Probe loss between the two interactions; eta_prime is the amplitude
// fraction coupled out, in [0, 1] (transmission eta = sqrt(1 - eta_prime^2)).
struct LossParams {
    double eta_prime = 0.0;
};

// Uniform +-delta0 spread of the cross-phase difference between the qubits.
struct MismatchParams {
    double delta0 = 0.0;
};

// Wavepacket overlap lambda1 between each qubit's photon mode and the mode
// the bus actually addresses; each in [0, 1].
struct ModeOverlapParams {
    double lambda1_a = 1.0;
    double lambda1_b = 1.0;
};

// Probe self-phase accumulation: Fock amplitude n picks up exp(i lambda n^2)
// in total over the gate. n_cutoff = 0 selects the safe default.
struct SelfKerrParams {
    double lambda_sk = 0.0;
    int n_cutoff = 0;
};

// Phase-flip channel rho -> (1-p) rho + p Z rho Z on the even-parity qubit
// pair; p_flip in [0, 1/2].
struct DephasingChannel {
    double p_flip = 0.0;
};

// Biased projection |psi> -> c00|00> + mu c11|11> (then renormalized).
struct BiasedProjection {
    double mu = 1.0;
};

// Phase-space separation d = 2 alpha sin(theta) between even- and odd-parity
// probe labels.
double separation_d(double alpha, double theta);

// Discrimination error of a point p = 0 measurement:
//   Unnormalized: e^{-d^2} / (1 + e^{-d^2})
//   Normalized:   e^{-d^2/2} / (1 + e^{-d^2/2})
double postselect_error_point(double d, Convention conv);

// Windowed acceptance |p| <= x0:
//   P = (erf(x0+d) + erf(x0-d)) / (2 erf(x0) + erf(x0+d) + erf(x0-d)).
// x0 -> 0+ recovers the Unnormalized point formula. x0 = 0 exactly is a
// usage error (use the point form). Numerator evaluated via an erfc
// difference once d - x0 > 1 to avoid cancellation.
double postselect_error_window(double x0, double d);

// Even-odd coherence retained after loss: exp[alpha^2 eta'^2 (cos theta - 1)],
// plus its small-theta limit exp[-(alpha theta eta')^2 / 2]. Relative
// difference <= theta^2/4 for theta <= 0.1 and alpha theta eta' <= 2.
double loss_gamma(double alpha, double theta, double eta_prime);
double loss_gamma_small_theta(double alpha, double theta, double eta_prime);

// Map retained coherence to the equivalent phase-flip probability (1-g)/2.
DephasingChannel loss_dephasing(double gamma_mod);

// Largest tolerable eta_prime for a dephasing budget p_target at the given
// operating point, from the small-theta form: alpha theta eta' =
// sqrt(-2 ln(1 - 2 p)). Saturates at eta_prime = 1 when even full
// out-coupling stays within budget.
struct LossThreshold {
    double eta_prime = 1.0;
    double loss_fraction = 1.0;  // eta_prime^2
    bool saturated = false;
};
LossThreshold loss_threshold(double alpha, double theta, double p_target);

// Residual even-branch amplitude factor under a cross-phase offset delta:
//   Unnormalized: exp[alpha^2 (e^{2 i delta} - 1)]
//   Normalized:   exp[alpha^2 (e^{2 i delta} - 1) / 2]
Complex mismatch_lambda(double alpha, double delta, Convention conv);

// Uniform average over delta in [-delta0, delta0]: equivalent channel is a
// biased projection (mu) followed by a phase flip (p). mu uses the RMS form
// mu^2 = <|lambda|^2>; the scale-inconsistent variant sqrt(int |lambda|^2) /
// (2 delta0) is carried in mu_printed for comparison output only.
struct MismatchDephasing {
    DephasingChannel channel;
    BiasedProjection bias;
    double mu_printed = 1.0;
    double mean_lambda = 1.0;  // <lambda>, real by delta -> -delta symmetry
};
MismatchDephasing mismatch_dephasing(double alpha, double delta0, Convention conv,
                                     double tol = 1e-12);

// Gate error probability when each photon overlaps its addressed mode by
// lambda1 (amplitude): 1 - 2 A^2 / (2 A^2 + (1-A)^2 + l0a^2 + l0b^2 +
// l0a^2 l0b^2) with A = lambda1_a lambda1_b, l0^2 = 1 - lambda1^2.
// Symmetric under A <-> B; 0 at perfect overlap, 1 at zero overlap.
double mode_mismatch_error(const ModeOverlapParams& mp);

// Overlap of two identical Gaussian wavepackets offset by delta_t:
// exp[-delta_t^2 / (4 sigma^2)].
double gaussian_mode_overlap(double delta_t, double sigma);

// Safe Fock-series cutoff for probe amplitude alpha.
int default_fock_cutoff(double alpha);

// Fock ceiling for the coherent-coefficient series used by the self-phase
// channel and the Fock oracle backend; larger amplitudes underflow c_0.
inline constexpr double kMaxFockAlpha = 8.0;

// Conditional even-branch amplitude at quadrature point p with total
// self-phase lambda and cross-phase theta (Normalized convention):
//   gamma' = sum_n c_n(alpha e^{i theta}) e^{i lambda n^2} (-i)^n psi_n(p),
// with c_0 = e^{-alpha^2/2}, c_{n+1} = c_n a / sqrt(n+1). Cutoff below the
// safe floor or alpha beyond the Fock ceiling are usage errors; a geometric
// tail bound guards the truncation (numerical_error if ever violated).
Complex self_kerr_gamma(double p, double alpha, double theta, const SelfKerrParams& sk);

// Parity-gate error at point p (default 0) under self-phase lambda:
//   (|g+|^2 + |g-|^2) / (2 |g0|^2 + |g+|^2 + |g-|^2),
// g± = gamma'(p; alpha, ±theta), g0 = gamma'(p; alpha, 0). Exactly 1/2 at
// theta = 0.
double self_kerr_error(double alpha, double theta, const SelfKerrParams& sk, double p = 0.0);

}  // namespace busgate
