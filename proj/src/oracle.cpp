#include "busgate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "busgate/overlap.hpp"
#include "busgate/quadrature.hpp"
#include "busgate/special.hpp"

namespace busgate::oracle {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw usage_error(msg);
}

// Orthogonality flag used when tracing mode tags out of the 4x4 reduction:
// coherences survive only between branches whose flags agree per qubit.
bool orth_flag(QubitTag t) { return t == QubitTag::OneOrthogonal; }

bool flags_agree(BranchKey x, BranchKey y) {
    return orth_flag(x.a) == orth_flag(y.a) && orth_flag(x.b) == orth_flag(y.b);
}

QubitTag tag_of(BranchKey k, Qubit q) { return q == Qubit::A ? k.a : k.b; }

BranchKey with_tag(BranchKey k, Qubit q, QubitTag t) {
    if (q == Qubit::A) {
        k.a = t;
    } else {
        k.b = t;
    }
    return k;
}

struct AmpEntry {
    BranchKey key;
    Complex amp;
    const std::vector<Complex>* loss = nullptr;
};

// <L_j|L_i> over the appended loss modes; branches always carry equally many.
Complex loss_gram(const AmpEntry& i, const AmpEntry& j) {
    if (i.loss == nullptr || i.loss->empty()) return Complex(1.0, 0.0);
    Complex g(1.0, 0.0);
    for (std::size_t m = 0; m < i.loss->size(); ++m) {
        g *= coherent_overlap((*j.loss)[m], (*i.loss)[m]);
    }
    return g;
}

struct RawConditional {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    double trace = 0.0;
    std::map<BranchKey, double> sector_mass;
};

RawConditional assemble(const std::vector<AmpEntry>& entries) {
    RawConditional raw;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double mass = std::norm(entries[i].amp);
        raw.trace += mass;
        raw.sector_mass[entries[i].key] += mass;
        for (std::size_t j = 0; j < entries.size(); ++j) {
            if (!flags_agree(entries[i].key, entries[j].key)) continue;
            const Complex val = (i == j)
                                    ? Complex(mass, 0.0)
                                    : entries[i].amp * std::conj(entries[j].amp) *
                                          loss_gram(entries[i], entries[j]);
            raw.m(logical_index(entries[i].key), logical_index(entries[j].key)) += val;
        }
    }
    raw.m = 0.5 * (raw.m + raw.m.adjoint()).eval();
    return raw;
}

Conditional finish_conditional(const RawConditional& raw,
                               const std::vector<AmpEntry>& entries, bool loss_free) {
    if (!(raw.trace > 1e-300)) {
        throw numerical_error(
            "homodyne_point: conditional mass vanished (degenerate conditioning)", 0.0);
    }
    Conditional out;
    out.density = raw.trace;
    out.rho.matrix = raw.m / raw.trace;
    out.rho.weight = raw.trace;
    for (const auto& [key, mass] : raw.sector_mass) {
        out.rho.sector_populations[key] = mass / raw.trace;
    }
    if (loss_free) {
        for (const auto& e : entries) {
            out.sector_amplitudes[e.key] = e.amp;
        }
    }
    return out;
}

std::vector<AmpEntry> point_entries(const CoherentBranchState& s, double p,
                                    Convention conv) {
    std::vector<AmpEntry> entries;
    entries.reserve(s.branches.size());
    for (const auto& [key, br] : s.branches) {
        entries.push_back(
            {key, br.coeff * quadrature_amplitude(p, br.bus, conv), &br.loss});
    }
    return entries;
}

Eigen::Matrix4cd sqrt_psd(const Eigen::Matrix4cd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
    const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           es.eigenvectors().adjoint();
}

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const Eigen::Matrix4cd& rho, const Eigen::Matrix4cd& sigma) {
    const Eigen::Matrix4cd sr = sqrt_psd(rho);
    Eigen::Matrix4cd inner = sr * sigma * sr;
    inner = 0.5 * (inner + inner.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(inner);
    const double s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return s * s;
}

}  // namespace

int logical_index(BranchKey k) {
    const int a = k.a == QubitTag::Zero ? 0 : 1;
    const int b = k.b == QubitTag::Zero ? 0 : 1;
    return 2 * a + b;
}

bool has_orthogonal_tag(BranchKey k) {
    return k.a == QubitTag::OneOrthogonal || k.b == QubitTag::OneOrthogonal;
}

CoherentBranchState prepare_input(const std::array<Complex, 4>& c, double alpha) {
    require(alpha >= 0.0 && std::isfinite(alpha), "prepare_input: alpha must be >= 0");
    double norm2 = 0.0;
    for (const Complex& v : c) norm2 += std::norm(v);
    if (std::fabs(norm2 - 1.0) > 1e-12) {
        throw usage_error("prepare_input: qubit amplitudes must be normalized to 1e-12");
    }
    const CoherentLabel label(alpha);  // enforces the label guard
    CoherentBranchState s;
    for (int idx = 0; idx < 4; ++idx) {
        if (std::norm(c[static_cast<std::size_t>(idx)]) == 0.0) continue;
        BranchKey key;
        key.a = (idx & 2) ? QubitTag::OneMatched : QubitTag::Zero;
        key.b = (idx & 1) ? QubitTag::OneMatched : QubitTag::Zero;
        s.branches[key] =
            CoherentBranch{c[static_cast<std::size_t>(idx)], label.value, {}};
    }
    return s;
}

CoherentBranchState apply_cross_kerr(CoherentBranchState s, Qubit q, double theta,
                                     double lambda1) {
    require(std::isfinite(theta), "apply_cross_kerr: theta must be finite");
    require(lambda1 >= 0.0 && lambda1 <= 1.0,
            "apply_cross_kerr: lambda1 must be in [0, 1]");
    const Complex rot = std::polar(1.0, theta);
    const double lambda0 = std::sqrt(std::max(0.0, 1.0 - lambda1 * lambda1));
    CoherentBranchState out;
    auto insert = [&out](BranchKey key, CoherentBranch br) {
        if (!out.branches.emplace(key, std::move(br)).second) {
            throw usage_error(
                "apply_cross_kerr: branch collision (mode-mismatched interaction "
                "applied twice to the same qubit)");
        }
    };
    for (auto& [key, br] : s.branches) {
        if (tag_of(key, q) != QubitTag::OneMatched) {
            insert(key, std::move(br));  // vacuum and orthogonal photons never couple
            continue;
        }
        if (lambda1 == 1.0) {
            br.bus *= rot;
            insert(key, std::move(br));
            continue;
        }
        CoherentBranch matched = br;
        matched.coeff *= lambda1;
        matched.bus *= rot;
        if (std::norm(matched.coeff) > 0.0) insert(key, std::move(matched));
        CoherentBranch orth = std::move(br);
        orth.coeff *= lambda0;
        if (std::norm(orth.coeff) > 0.0) {
            insert(with_tag(key, q, QubitTag::OneOrthogonal), std::move(orth));
        }
    }
    return out;
}

CoherentBranchState apply_loss(CoherentBranchState s, double eta) {
    require(eta >= 0.0 && eta <= 1.0, "apply_loss: eta must be in [0, 1]");
    const double eta_prime = std::sqrt(std::max(0.0, 1.0 - eta * eta));
    for (auto& [key, br] : s.branches) {
        br.loss.push_back(eta_prime * br.bus);
        br.bus *= eta;
    }
    return s;
}

double gram_norm_squared(const CoherentBranchState& s) {
    // Full bilinear form: distinct branch keys are orthogonal, so only the
    // diagonal survives, but the cross terms are evaluated rather than
    // assumed absent.
    double total = 0.0;
    for (const auto& [ki, bi] : s.branches) {
        for (const auto& [kj, bj] : s.branches) {
            if (ki != kj) continue;  // orthogonal qubit sectors
            Complex g = coherent_overlap(bj.bus, bi.bus);
            for (std::size_t m = 0; m < bi.loss.size(); ++m) {
                g *= coherent_overlap(bj.loss[m], bi.loss[m]);
            }
            total += (bi.coeff * std::conj(bj.coeff) * g).real();
        }
    }
    return total;
}

FockBusState prepare_input_fock(const std::array<Complex, 4>& c, double alpha,
                                int n_cutoff) {
    require(alpha >= 0.0 && std::isfinite(alpha), "prepare_input_fock: alpha must be >= 0");
    if (alpha > kMaxFockAlpha) {
        throw usage_error(
            "prepare_input_fock: alpha exceeds the Fock ceiling of 8; use the "
            "coherent backend");
    }
    double norm2 = 0.0;
    for (const Complex& v : c) norm2 += std::norm(v);
    if (std::fabs(norm2 - 1.0) > 1e-12) {
        throw usage_error("prepare_input_fock: qubit amplitudes must be normalized to 1e-12");
    }
    const int floor_cut = default_fock_cutoff(alpha);
    const int cutoff = n_cutoff > 0 ? n_cutoff : floor_cut;
    if (cutoff < floor_cut) {
        std::ostringstream msg;
        msg << "prepare_input_fock: n_cutoff " << cutoff << " is below the safe floor "
            << floor_cut << " for alpha = " << alpha;
        throw usage_error(msg.str());
    }
    std::vector<Complex> amps(static_cast<std::size_t>(cutoff) + 1);
    double coeff = std::exp(-0.5 * alpha * alpha);
    for (int n = 0; n <= cutoff; ++n) {
        amps[static_cast<std::size_t>(n)] = Complex(coeff, 0.0);
        coeff *= alpha / std::sqrt(static_cast<double>(n) + 1.0);
    }
    FockBusState s;
    s.n_cutoff = cutoff;
    for (int idx = 0; idx < 4; ++idx) {
        if (std::norm(c[static_cast<std::size_t>(idx)]) == 0.0) continue;
        BranchKey key;
        key.a = (idx & 2) ? QubitTag::OneMatched : QubitTag::Zero;
        key.b = (idx & 1) ? QubitTag::OneMatched : QubitTag::Zero;
        s.branches[key] = FockBranch{c[static_cast<std::size_t>(idx)], amps};
    }
    return s;
}

FockBusState apply_cross_kerr(FockBusState s, Qubit q, double theta) {
    require(std::isfinite(theta), "apply_cross_kerr: theta must be finite");
    for (auto& [key, br] : s.branches) {
        if (tag_of(key, q) != QubitTag::OneMatched) continue;
        for (std::size_t n = 0; n < br.amps.size(); ++n) {
            br.amps[n] *= std::polar(1.0, theta * static_cast<double>(n));
        }
    }
    return s;
}

FockBusState apply_self_kerr(FockBusState s, double lambda_sk) {
    require(std::isfinite(lambda_sk), "apply_self_kerr: lambda must be finite");
    for (auto& [key, br] : s.branches) {
        for (std::size_t n = 0; n < br.amps.size(); ++n) {
            br.amps[n] *=
                std::polar(1.0, lambda_sk * static_cast<double>(n) * static_cast<double>(n));
        }
    }
    return s;
}

double gram_norm_squared(const FockBusState& s) {
    double total = 0.0;
    for (const auto& [key, br] : s.branches) {
        double bus2 = 0.0;
        for (const Complex& a : br.amps) bus2 += std::norm(a);
        total += std::norm(br.coeff) * bus2;
    }
    return total;
}

void validate_density(const TwoQubitDensity& rho, double herm_tol, double psd_floor) {
    const Eigen::Matrix4cd& m = rho.matrix;
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) {
        throw numerical_error("validate_density: matrix is not Hermitian to tolerance",
                              herm);
    }
    const double tr = m.trace().real();
    if (std::fabs(tr - 1.0) > 1e-12) {
        throw numerical_error("validate_density: trace deviates from 1", tr);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (m + m.adjoint()));
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < psd_floor) {
        throw numerical_error("validate_density: negative eigenvalue beyond tolerance",
                              min_eig);
    }
}

Conditional homodyne_point(const CoherentBranchState& s, double p, Convention conv) {
    require(std::isfinite(p), "homodyne_point: p must be finite");
    const std::vector<AmpEntry> entries = point_entries(s, p, conv);
    const RawConditional raw = assemble(entries);
    bool loss_free = true;
    for (const auto& [key, br] : s.branches) {
        if (!br.loss.empty()) loss_free = false;
    }
    return finish_conditional(raw, entries, loss_free);
}

Conditional homodyne_point(const FockBusState& s, double p, Convention conv) {
    require(std::isfinite(p), "homodyne_point: p must be finite");
    if (conv == Convention::Unnormalized) {
        throw usage_error(
            "homodyne_point: the unnormalized overlap is not a linear functional of a "
            "Fock state; use Convention::Normalized or the coherent backend");
    }
    const std::vector<double> psi = hermite_functions(p, s.n_cutoff);
    static constexpr Complex kIPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    std::vector<AmpEntry> entries;
    entries.reserve(s.branches.size());
    for (const auto& [key, br] : s.branches) {
        Complex amp(0.0, 0.0);
        for (std::size_t n = 0; n < br.amps.size(); ++n) {
            amp += br.amps[n] * kIPow[n & 3] * psi[n];
        }
        entries.push_back({key, br.coeff * amp, nullptr});
    }
    return finish_conditional(assemble(entries), entries, true);
}

WindowResult homodyne_window(const CoherentBranchState& s, double x0, Convention conv,
                             double tol) {
    require(std::isfinite(x0) && x0 > 0.0, "homodyne_window: x0 must be > 0");
    QuadratureOptions opt{tol, 50};
    const Eigen::Matrix4cd M = integrate(
        [&](double p) -> Eigen::Matrix4cd { return assemble(point_entries(s, p, conv)).m; },
        -x0, x0, opt);
    // Sector masses integrated alongside (fixed branch order from the map).
    const auto sector_vec = [&](double p) -> Eigen::VectorXd {
        const std::vector<AmpEntry> entries = point_entries(s, p, conv);
        Eigen::VectorXd v(static_cast<Eigen::Index>(entries.size()));
        for (std::size_t i = 0; i < entries.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = std::norm(entries[i].amp);
        }
        return v;
    };
    const Eigen::VectorXd sectors = integrate(sector_vec, -x0, x0, opt);
    const double windowed = M.trace().real();
    if (!(windowed > 1e-300)) {
        throw numerical_error("homodyne_window: windowed mass vanished", 0.0);
    }
    double full = 0.0;
    for (const auto& [key, br] : s.branches) {
        full += std::norm(br.coeff) * full_line_mass(br.bus, conv);
    }
    WindowResult out;
    out.success_prob = windowed / full;
    out.rho.matrix = (M / windowed);
    out.rho.matrix = 0.5 * (out.rho.matrix + out.rho.matrix.adjoint()).eval();
    out.rho.weight = out.success_prob;
    std::size_t i = 0;
    for (const auto& [key, br] : s.branches) {
        out.rho.sector_populations[key] =
            sectors(static_cast<Eigen::Index>(i)) / windowed;
        ++i;
    }
    return out;
}

TwoQubitDensity mixture_over_delta(double alpha, double delta0, int n_grid,
                                   Convention conv) {
    require(alpha >= 0.0 && std::isfinite(alpha), "mixture_over_delta: alpha must be >= 0");
    require(delta0 >= 0.0 && std::isfinite(delta0),
            "mixture_over_delta: delta0 must be >= 0");
    if (n_grid < 11 || n_grid % 2 == 0) {
        throw usage_error("mixture_over_delta: n_grid must be odd and >= 11");
    }
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const std::array<Complex, 4> even{Complex(inv_sqrt2, 0), Complex(0, 0), Complex(0, 0),
                                      Complex(inv_sqrt2, 0)};
    const CoherentBranchState base = prepare_input(even, alpha);
    auto raw_at = [&](double delta) {
        return assemble(point_entries(apply_cross_kerr(base, Qubit::A, delta), 0.0, conv));
    };
    Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
    std::map<BranchKey, double> sector_acc;
    if (delta0 == 0.0) {
        const RawConditional raw = raw_at(0.0);
        acc = raw.m;
        sector_acc = raw.sector_mass;
    } else {
        // Composite Simpson over the uniform offset in [-delta0, delta0].
        const double h = 2.0 * delta0 / (n_grid - 1);
        for (int i = 0; i < n_grid; ++i) {
            const double delta = -delta0 + h * i;
            const double w =
                (i == 0 || i == n_grid - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            const RawConditional raw = raw_at(delta);
            acc += (w * h / 3.0) * raw.m;
            for (const auto& [key, mass] : raw.sector_mass) {
                sector_acc[key] += (w * h / 3.0) * mass;
            }
        }
        acc /= 2.0 * delta0;
        for (auto& [key, mass] : sector_acc) mass /= 2.0 * delta0;
    }
    const double tr = acc.trace().real();
    if (!(tr > 1e-300)) {
        throw numerical_error("mixture_over_delta: averaged mass vanished", 0.0);
    }
    TwoQubitDensity out;
    out.matrix = acc / tr;
    out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
    out.weight = tr;
    for (const auto& [key, mass] : sector_acc) {
        out.sector_populations[key] = mass / tr;
    }
    return out;
}

TwoQubitDensity ideal_parity_density(const std::array<Complex, 4>& c) {
    const double mass = std::norm(c[0]) + std::norm(c[3]);
    if (!(mass > 0.0)) {
        throw usage_error("ideal_parity_density: even-parity amplitudes are both zero");
    }
    Eigen::Vector4cd psi;
    psi << c[0] / std::sqrt(mass), 0.0, 0.0, c[3] / std::sqrt(mass);
    TwoQubitDensity out;
    out.matrix = psi * psi.adjoint();
    out.weight = mass;
    BranchKey k00;
    BranchKey k11{QubitTag::OneMatched, QubitTag::OneMatched};
    if (std::norm(c[0]) > 0.0) out.sector_populations[k00] = std::norm(c[0]) / mass;
    if (std::norm(c[3]) > 0.0) out.sector_populations[k11] = std::norm(c[3]) / mass;
    return out;
}

ErrorReport extract_report(const TwoQubitDensity& rho, const TwoQubitDensity& ideal) {
    ErrorReport rep;
    if (!rho.sector_populations.empty()) {
        for (const auto& [key, pop] : rho.sector_populations) {
            const int li = logical_index(key);
            if (li == 1 || li == 2 || has_orthogonal_tag(key)) rep.parity_error += pop;
        }
    } else {
        rep.parity_error = rho.matrix(1, 1).real() + rho.matrix(2, 2).real();
    }
    const double r00 = rho.matrix(0, 0).real();
    const double r11 = rho.matrix(3, 3).real();
    if (r00 > 1e-12 && r11 > 1e-12) {
        rep.dephasing_defined = true;
        const double ratio =
            std::min(1.0, std::abs(rho.matrix(0, 3)) / std::sqrt(r00 * r11));
        rep.dephasing_p = 0.5 * (1.0 - ratio);
        const double i00 = ideal.matrix(0, 0).real();
        const double i11 = ideal.matrix(3, 3).real();
        if (i00 > 1e-12 && i11 > 1e-12) {
            rep.bias_defined = true;
            rep.bias_mu = std::sqrt((r11 / r00) * (i00 / i11));
        }
    }
    rep.success_prob = std::clamp(rho.weight, 0.0, 1.0);
    rep.fidelity_ideal = fidelity(rho.matrix, ideal.matrix);
    return rep;
}

CoherentBranchState run_gate(const GateRun& g) {
    CoherentBranchState s = prepare_input(g.c, g.alpha);
    s = apply_cross_kerr(std::move(s), Qubit::A, g.theta_a, g.lambda1_a);
    if (g.eta.has_value()) {
        s = apply_loss(std::move(s), *g.eta);
    }
    s = apply_cross_kerr(std::move(s), Qubit::B, -g.theta_b, g.lambda1_b);
    return s;
}

FockBusState run_gate_fock(const GateRun& g, const SelfKerrParams& sk) {
    require(!g.eta.has_value(), "run_gate_fock: loss is not supported on the Fock backend");
    require(g.lambda1_a == 1.0 && g.lambda1_b == 1.0,
            "run_gate_fock: mode mismatch is not supported on the Fock backend");
    FockBusState s = prepare_input_fock(g.c, g.alpha, sk.n_cutoff);
    s = apply_cross_kerr(std::move(s), Qubit::A, g.theta_a);
    s = apply_cross_kerr(std::move(s), Qubit::B, -g.theta_b);
    if (sk.lambda_sk != 0.0) {
        s = apply_self_kerr(std::move(s), sk.lambda_sk);
    }
    return s;
}

}  // namespace busgate::oracle
