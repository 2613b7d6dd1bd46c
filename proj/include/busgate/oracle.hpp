#pragma once

#include <Eigen/Dense>
#include <array>
#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "busgate/analytic.hpp"
#include "busgate/types.hpp"

// First-principles simulation of the gate: exact coherent-label bookkeeping
// (lossy, mode-resolved) and a truncated Fock backend for bus self-phase.
// Everything here is derived from state evolution and overlap integrals,
// never from the closed-form channel models in analytic.hpp, so agreement
// between the two is evidence, not tautology.
namespace busgate::oracle {

// Per-qubit branch tag. OneMatched is a photon in the mode the bus
// addresses; OneOrthogonal is a photon in the orthogonal (never-addressed)
// mode. The three states are mutually orthogonal.
enum class QubitTag : unsigned char { Zero = 0, OneMatched = 1, OneOrthogonal = 2 };

enum class Qubit { A, B };

struct BranchKey {
    QubitTag a = QubitTag::Zero;
    QubitTag b = QubitTag::Zero;
    friend auto operator<=>(const BranchKey&, const BranchKey&) = default;
};

// Logical basis index 0..3 for |q_A q_B>, collapsing both one-photon tags.
int logical_index(BranchKey k);
bool has_orthogonal_tag(BranchKey k);

// One term of the global superposition: qubit amplitude, the bus coherent
// label, and one coherent label per loss mode emitted so far (in order).
struct CoherentBranch {
    Complex coeff{0.0, 0.0};
    Complex bus{0.0, 0.0};
    std::vector<Complex> loss;
};

// Superposition over orthogonal qubit branches, each entangled with the bus
// and any loss modes. Branch key orthogonality makes the total squared norm
// the sum of |coeff|^2, which gram_norm_squared verifies from first
// principles via the full overlap Gram matrix.
struct CoherentBranchState {
    std::map<BranchKey, CoherentBranch> branches;
};

// |c00, c01, c10, c11> (x) |alpha>. The qubit vector must be normalized to
// 1e-12; photons start in the matched mode.
CoherentBranchState prepare_input(const std::array<Complex, 4>& c, double alpha);

// Cross-phase interaction on one qubit: branches with a matched photon get
// their bus label rotated by e^{i theta}. With mode overlap lambda1 < 1 the
// matched branch splits: amplitude lambda1 stays matched (rotated), amplitude
// sqrt(1 - lambda1^2) moves to the orthogonal tag (bus untouched).
CoherentBranchState apply_cross_kerr(CoherentBranchState s, Qubit q, double theta,
                                     double lambda1 = 1.0);

// Beam splitter on the bus: each branch's bus label scales by eta and a new
// loss-mode label eta' * (old label) is appended, eta' = sqrt(1 - eta^2).
CoherentBranchState apply_loss(CoherentBranchState s, double eta);

// Total squared norm evaluated through the full Gram matrix of coherent
// overlaps (bus and loss modes), not assumed orthonormality.
double gram_norm_squared(const CoherentBranchState& s);

// --- Fock backend (needed for bus self-phase, which is not label-preserving) ---

struct FockBranch {
    Complex coeff{0.0, 0.0};
    std::vector<Complex> amps;  // bus amplitudes, n = 0..n_cutoff
};

struct FockBusState {
    int n_cutoff = 0;
    std::map<BranchKey, FockBranch> branches;
};

// Same preparation in a truncated Fock basis. alpha must respect
// kMaxFockAlpha; n_cutoff = 0 selects default_fock_cutoff(alpha), explicit
// values below that floor are usage errors.
FockBusState prepare_input_fock(const std::array<Complex, 4>& c, double alpha,
                                int n_cutoff = 0);
FockBusState apply_cross_kerr(FockBusState s, Qubit q, double theta);
// Multiplies bus amplitude n by exp(i lambda n^2); lambda is the total
// accumulated self-phase strength.
FockBusState apply_self_kerr(FockBusState s, double lambda_sk);
double gram_norm_squared(const FockBusState& s);

// --- Measurement reductions ---

// Two-qubit density matrix in the logical basis {00, 01, 10, 11}, with
// orthogonal-mode tags traced out (coherences survive only between branch
// pairs whose per-qubit orthogonality flags agree). weight carries the
// pre-renormalization mass (outcome density at a point, or success
// probability for a window). sector_populations keeps the tag-resolved
// diagonal, renormalized.
struct TwoQubitDensity {
    Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();
    double weight = 0.0;
    std::map<BranchKey, double> sector_populations;
};

// Hermiticity, unit trace, and positive semidefiniteness (to tolerance).
// Throws numerical_error on violation.
void validate_density(const TwoQubitDensity& rho, double herm_tol = 1e-12,
                      double psd_floor = -1e-10);

struct Conditional {
    TwoQubitDensity rho;
    double density = 0.0;  // unnormalized outcome density at the point
    // Loss-free states only: per-branch conditional amplitude.
    std::map<BranchKey, Complex> sector_amplitudes;
};

// Condition on a point quadrature outcome p. Zero conditional mass is a
// degenerate conditioning and throws numerical_error. The Fock overload
// supports Normalized only (the Unnormalized form is not a linear functional
// of the state); requesting it is a usage error.
Conditional homodyne_point(const CoherentBranchState& s, double p, Convention conv);
Conditional homodyne_point(const FockBusState& s, double p, Convention conv);

struct WindowResult {
    TwoQubitDensity rho;
    double success_prob = 0.0;  // windowed mass / full-line mass
};

// Condition on |p| <= x0 via adaptive quadrature of the unnormalized
// conditional matrix.
WindowResult homodyne_window(const CoherentBranchState& s, double x0, Convention conv,
                             double tol = 1e-10);

// Average the (unnormalized) p = 0 conditional state of an equal-amplitude
// even-parity input over a uniform cross-phase offset in [-delta0, delta0],
// by composite Simpson on an odd n_grid >= 11. Renormalized at the end.
TwoQubitDensity mixture_over_delta(double alpha, double delta0, int n_grid,
                                   Convention conv);

// Pure even-parity target c00|00> + c11|11>, renormalized; weight is the
// even-sector mass of the input.
TwoQubitDensity ideal_parity_density(const std::array<Complex, 4>& c);

// Channel parameters extracted from a conditioned state, against the ideal:
// odd/orthogonal population, phase-flip probability from the 00-11 coherence,
// amplitude bias mu, retained success probability, Uhlmann fidelity.
struct ErrorReport {
    double parity_error = 0.0;
    double dephasing_p = 0.0;
    bool dephasing_defined = false;
    double bias_mu = 1.0;
    bool bias_defined = false;
    double success_prob = 0.0;
    double fidelity_ideal = 0.0;
};
ErrorReport extract_report(const TwoQubitDensity& rho, const TwoQubitDensity& ideal);

// Standard gate pipeline: prepare, first interaction (+theta_a on A), optional
// bus loss, second interaction (-theta_b on B), with per-qubit mode overlaps.
struct GateRun {
    std::array<Complex, 4> c{Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0),
                             Complex(0.5, 0)};
    double alpha = 1.0;
    double theta_a = 0.01;
    double theta_b = 0.01;
    std::optional<double> eta;  // transmission of a splitter between the interactions
    double lambda1_a = 1.0;
    double lambda1_b = 1.0;
};
CoherentBranchState run_gate(const GateRun& g);
FockBusState run_gate_fock(const GateRun& g, const SelfKerrParams& sk);

}  // namespace busgate::oracle
