#include "busgate/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "busgate/analytic.hpp"
#include "busgate/oracle.hpp"
#include "busgate/overlap.hpp"

namespace busgate::sweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& msg) {
    if (!ok) throw usage_error(msg);
}

std::vector<double> linspace(double lo, double hi, int n) {
    require(n >= 1, "linspace: need at least one point");
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi,
            "linspace: bounds must be finite with lo <= hi");
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
    v.back() = hi;
    return v;
}

using ParamMap = std::map<std::string, double>;

double param(const ParamMap& m, const std::string& k) { return m.at(k); }

// Parity error of a first-principles gate run conditioned at p = 0, for a
// separation d realized as (alpha, theta = asin(d / (2 alpha))).
double oracle_point_error(double d, Convention conv) {
    const double alpha = std::max(4.0, d);
    const double theta = std::asin(d / (2.0 * alpha));
    oracle::GateRun g;
    g.alpha = alpha;
    g.theta_a = theta;
    g.theta_b = theta;
    const auto cond = oracle::homodyne_point(oracle::run_gate(g), 0.0, conv);
    const auto ideal = oracle::ideal_parity_density(g.c);
    return oracle::extract_report(cond.rho, ideal).parity_error;
}

// |rho_{00,11}| / sqrt(rho_00 rho_11) of the conditioned lossy gate state;
// exactly the retained even-sector coherence, independent of convention.
double oracle_loss_suppression(double alpha, double theta, double eta_prime) {
    oracle::GateRun g;
    g.alpha = alpha;
    g.theta_a = theta;
    g.theta_b = theta;
    g.eta = std::sqrt(std::max(0.0, 1.0 - eta_prime * eta_prime));
    const auto cond =
        oracle::homodyne_point(oracle::run_gate(g), 0.0, Convention::Normalized);
    const auto& m = cond.rho.matrix;
    return std::abs(m(0, 3)) / std::sqrt(m(0, 0).real() * m(3, 3).real());
}

// Largest deviation of the surviving mode-mismatch branch weights from the
// closed-form set {1, l1a l1b, l0b, l0a, l0a l0b}, measured as conditional
// amplitude ratios against the 00 branch at a separation large enough to
// extinguish every rotated branch.
double oracle_modematch_weight_dev(double l1a, double l1b) {
    oracle::GateRun g;
    g.alpha = 60.0;
    g.theta_a = 0.1;
    g.theta_b = 0.1;
    g.lambda1_a = l1a;
    g.lambda1_b = l1b;
    const auto cond =
        oracle::homodyne_point(oracle::run_gate(g), 0.0, Convention::Normalized);
    const Complex a00 = cond.sector_amplitudes.at(oracle::BranchKey{});
    const double l0a = std::sqrt(std::max(0.0, 1.0 - l1a * l1a));
    const double l0b = std::sqrt(std::max(0.0, 1.0 - l1b * l1b));
    using oracle::BranchKey;
    using oracle::QubitTag;
    const std::vector<std::pair<BranchKey, double>> expected = {
        {BranchKey{QubitTag::OneMatched, QubitTag::OneMatched}, l1a * l1b},
        {BranchKey{QubitTag::Zero, QubitTag::OneOrthogonal}, l0b},
        {BranchKey{QubitTag::OneOrthogonal, QubitTag::Zero}, l0a},
        {BranchKey{QubitTag::OneOrthogonal, QubitTag::OneOrthogonal}, l0a * l0b},
    };
    double dev = 0.0;
    for (const auto& [key, weight] : expected) {
        const auto it = cond.sector_amplitudes.find(key);
        const double got =
            it == cond.sector_amplitudes.end() ? 0.0 : std::abs(it->second / a00);
        dev = std::max(dev, std::fabs(got - weight));
    }
    return dev;
}

struct MismatchOracle {
    double p = 0.0;
    double mu = 1.0;
    double recon_dev = 0.0;
};

// Mixture-averaged oracle state against the analytic biased-projection +
// phase-flip reconstruction (RMS mu).
MismatchOracle oracle_mismatch(double alpha, double delta0, int n_grid, Convention conv,
                               double tol) {
    const oracle::TwoQubitDensity mixed =
        oracle::mixture_over_delta(alpha, delta0, n_grid, conv);
    const std::array<Complex, 4> even{Complex(1.0 / std::sqrt(2.0), 0), Complex(0, 0),
                                      Complex(0, 0), Complex(1.0 / std::sqrt(2.0), 0)};
    const auto ideal = oracle::ideal_parity_density(even);
    const auto rep = oracle::extract_report(mixed, ideal);
    const MismatchDephasing md = mismatch_dephasing(alpha, delta0, conv, tol);
    // Reconstruction: biased projection then phase flip on the even block.
    Eigen::Vector4cd psi;
    const double nb = std::sqrt(1.0 + md.bias.mu * md.bias.mu);
    psi << 1.0 / nb, 0.0, 0.0, md.bias.mu / nb;
    Eigen::Matrix4cd recon = psi * psi.adjoint();
    recon(0, 3) *= 1.0 - 2.0 * md.channel.p_flip;
    recon(3, 0) *= 1.0 - 2.0 * md.channel.p_flip;
    MismatchOracle out;
    out.p = rep.dephasing_p;
    out.mu = rep.bias_mu;
    out.recon_dev = (mixed.matrix - recon).norm();
    return out;
}

struct SelfKerrOracle {
    double error = kNaN;
    bool feasible = false;
};

SelfKerrOracle oracle_selfkerr(double alpha, double theta, double lambda, double p,
                               int n_cutoff) {
    SelfKerrOracle out;
    if (alpha > kMaxFockAlpha) return out;  // marked infeasible, caller emits NaN
    oracle::GateRun g;
    g.alpha = alpha;
    g.theta_a = theta;
    g.theta_b = theta;
    SelfKerrParams sk{lambda, n_cutoff};
    const auto cond =
        oracle::homodyne_point(oracle::run_gate_fock(g, sk), p, Convention::Normalized);
    const auto ideal = oracle::ideal_parity_density(g.c);
    out.error = oracle::extract_report(cond.rho, ideal).parity_error;
    out.feasible = true;
    return out;
}

bool want(ConventionChoice c, Convention v) {
    if (c == ConventionChoice::Both) return true;
    return (c == ConventionChoice::Paper) == (v == Convention::Unnormalized);
}

}  // namespace

Channel channel_from_name(const std::string& name) {
    if (name == "postselect") return Channel::Postselect;
    if (name == "loss") return Channel::Loss;
    if (name == "mismatch") return Channel::Mismatch;
    if (name == "modematch") return Channel::ModeMatch;
    if (name == "selfkerr") return Channel::SelfKerr;
    throw usage_error("unknown channel '" + name +
                      "' (valid: postselect, loss, mismatch, modematch, selfkerr)");
}

const char* channel_name(Channel ch) {
    switch (ch) {
        case Channel::Postselect: return "postselect";
        case Channel::Loss: return "loss";
        case Channel::Mismatch: return "mismatch";
        case Channel::ModeMatch: return "modematch";
        case Channel::SelfKerr: return "selfkerr";
    }
    return "?";
}

ConventionChoice convention_from_name(const std::string& s) {
    if (s == "paper") return ConventionChoice::Paper;
    if (s == "normalized") return ConventionChoice::Normalized;
    if (s == "both") return ConventionChoice::Both;
    throw usage_error("unknown convention '" + s + "' (valid: paper, normalized, both)");
}

const std::vector<std::string>& channel_parameters(Channel ch) {
    static const std::vector<std::string> ps{"x0", "d"};
    static const std::vector<std::string> lo{"alpha", "theta", "eta_prime",
                                             "alpha_theta_etap"};
    static const std::vector<std::string> mi{"alpha", "delta0", "n_grid"};
    static const std::vector<std::string> mm{"lambda1_a", "lambda1_b"};
    static const std::vector<std::string> sk{"alpha", "theta", "lambda", "p", "n_cutoff"};
    switch (ch) {
        case Channel::Postselect: return ps;
        case Channel::Loss: return lo;
        case Channel::Mismatch: return mi;
        case Channel::ModeMatch: return mm;
        case Channel::SelfKerr: return sk;
    }
    return ps;
}

const std::map<std::string, double>& channel_defaults(Channel ch) {
    static const std::map<std::string, double> ps{{"x0", 0.1}, {"d", 1.0}};
    static const std::map<std::string, double> lo{
        {"alpha", 1.0}, {"theta", 0.01}, {"eta_prime", 0.1}, {"alpha_theta_etap", kNaN}};
    static const std::map<std::string, double> mi{
        {"alpha", 1.0}, {"delta0", 0.5}, {"n_grid", 201.0}};
    static const std::map<std::string, double> mm{{"lambda1_a", 0.995},
                                                  {"lambda1_b", 0.995}};
    static const std::map<std::string, double> sk{
        {"alpha", 2.0}, {"theta", 0.1}, {"lambda", 0.01}, {"p", 0.0}, {"n_cutoff", 0.0}};
    switch (ch) {
        case Channel::Postselect: return ps;
        case Channel::Loss: return lo;
        case Channel::Mismatch: return mi;
        case Channel::ModeMatch: return mm;
        case Channel::SelfKerr: return sk;
    }
    return ps;
}

namespace {

// Parameter columns shown in output (internal knobs excluded).
std::vector<std::string> output_parameters(Channel ch) {
    std::vector<std::string> out;
    for (const std::string& name : channel_parameters(ch)) {
        if (name == "n_grid" || name == "n_cutoff") continue;
        out.push_back(name);
    }
    return out;
}

std::vector<std::string> result_columns(Channel ch, ConventionChoice conv,
                                        bool with_oracle) {
    std::vector<std::string> cols;
    const bool paper = want(conv, Convention::Unnormalized);
    const bool normd = want(conv, Convention::Normalized);
    switch (ch) {
        case Channel::Postselect:
            cols.push_back("error_window");
            if (paper) cols.push_back("error_point_paper");
            if (normd) cols.push_back("error_point_normalized");
            if (with_oracle) {
                if (paper) cols.push_back("oracle_point_paper");
                if (normd) cols.push_back("oracle_point_normalized");
                if (paper) cols.push_back("dev_paper");
                if (normd) cols.push_back("dev_normalized");
            }
            break;
        case Channel::Loss:
            cols.insert(cols.end(),
                        {"gamma", "gamma_small_theta", "p_flip", "p_flip_small_theta"});
            if (with_oracle) {
                cols.push_back("oracle_suppression");
                cols.push_back("oracle_dev");
            }
            break;
        case Channel::Mismatch:
            if (paper) cols.insert(cols.end(), {"p_paper", "mu_paper", "mu_printed_paper"});
            if (normd) {
                cols.insert(cols.end(),
                            {"p_normalized", "mu_normalized", "mu_printed_normalized"});
            }
            if (with_oracle) {
                if (paper) {
                    cols.insert(cols.end(),
                                {"oracle_p_paper", "oracle_mu_paper", "recon_dev_paper"});
                }
                if (normd) {
                    cols.insert(cols.end(), {"oracle_p_normalized", "oracle_mu_normalized",
                                             "recon_dev_normalized"});
                }
            }
            break;
        case Channel::ModeMatch:
            cols.push_back("error");
            if (with_oracle) cols.push_back("oracle_weight_dev");
            break;
        case Channel::SelfKerr:
            cols.insert(cols.end(),
                        {"error", "gamma0_mod", "gamma_plus_mod", "gamma_minus_mod"});
            if (with_oracle) {
                cols.push_back("oracle_error");
                cols.push_back("oracle_dev");
            }
            break;
    }
    return cols;
}

std::vector<double> evaluate_channel(Channel ch, const ParamMap& pm,
                                     ConventionChoice conv, bool with_oracle,
                                     double tol) {
    std::vector<double> r;
    const bool paper = want(conv, Convention::Unnormalized);
    const bool normd = want(conv, Convention::Normalized);
    switch (ch) {
        case Channel::Postselect: {
            const double x0 = param(pm, "x0");
            const double d = param(pm, "d");
            r.push_back(postselect_error_window(x0, d));
            const double ep = postselect_error_point(d, Convention::Unnormalized);
            const double en = postselect_error_point(d, Convention::Normalized);
            if (paper) r.push_back(ep);
            if (normd) r.push_back(en);
            if (with_oracle) {
                const double op =
                    paper ? oracle_point_error(d, Convention::Unnormalized) : kNaN;
                const double on =
                    normd ? oracle_point_error(d, Convention::Normalized) : kNaN;
                if (paper) r.push_back(op);
                if (normd) r.push_back(on);
                if (paper) r.push_back(std::fabs(op - ep));
                if (normd) r.push_back(std::fabs(on - en));
            }
            break;
        }
        case Channel::Loss: {
            const double alpha = param(pm, "alpha");
            const double theta = param(pm, "theta");
            const double etap = param(pm, "eta_prime");
            const double g = loss_gamma(alpha, theta, etap);
            const double gs = loss_gamma_small_theta(alpha, theta, etap);
            r.push_back(g);
            r.push_back(gs);
            r.push_back(loss_dephasing(g).p_flip);
            r.push_back(loss_dephasing(gs).p_flip);
            if (with_oracle) {
                const double sup = oracle_loss_suppression(alpha, theta, etap);
                r.push_back(sup);
                r.push_back(std::fabs(sup - g));
            }
            break;
        }
        case Channel::Mismatch: {
            const double alpha = param(pm, "alpha");
            const double delta0 = param(pm, "delta0");
            const int n_grid = static_cast<int>(param(pm, "n_grid"));
            MismatchDephasing mp{};
            MismatchDephasing mn{};
            if (paper) mp = mismatch_dephasing(alpha, delta0, Convention::Unnormalized, tol);
            if (normd) mn = mismatch_dephasing(alpha, delta0, Convention::Normalized, tol);
            if (paper) {
                r.insert(r.end(), {mp.channel.p_flip, mp.bias.mu, mp.mu_printed});
            }
            if (normd) {
                r.insert(r.end(), {mn.channel.p_flip, mn.bias.mu, mn.mu_printed});
            }
            if (with_oracle) {
                if (paper) {
                    const MismatchOracle o = oracle_mismatch(
                        alpha, delta0, n_grid, Convention::Unnormalized, tol);
                    r.insert(r.end(), {o.p, o.mu, o.recon_dev});
                }
                if (normd) {
                    const MismatchOracle o = oracle_mismatch(
                        alpha, delta0, n_grid, Convention::Normalized, tol);
                    r.insert(r.end(), {o.p, o.mu, o.recon_dev});
                }
            }
            break;
        }
        case Channel::ModeMatch: {
            const double l1a = param(pm, "lambda1_a");
            const double l1b = param(pm, "lambda1_b");
            r.push_back(mode_mismatch_error(ModeOverlapParams{l1a, l1b}));
            if (with_oracle) r.push_back(oracle_modematch_weight_dev(l1a, l1b));
            break;
        }
        case Channel::SelfKerr: {
            const double alpha = param(pm, "alpha");
            const double theta = param(pm, "theta");
            const double lambda = param(pm, "lambda");
            const double p = param(pm, "p");
            const int n_cutoff = static_cast<int>(param(pm, "n_cutoff"));
            SelfKerrParams sk{lambda, n_cutoff};
            const double err = self_kerr_error(alpha, theta, sk, p);
            r.push_back(err);
            r.push_back(std::abs(self_kerr_gamma(p, alpha, 0.0, sk)));
            r.push_back(std::abs(self_kerr_gamma(p, alpha, theta, sk)));
            r.push_back(std::abs(self_kerr_gamma(p, alpha, -theta, sk)));
            if (with_oracle) {
                const SelfKerrOracle o = oracle_selfkerr(alpha, theta, lambda, p, n_cutoff);
                r.push_back(o.error);
                r.push_back(o.feasible ? std::fabs(o.error - err) : kNaN);
            }
            break;
        }
    }
    return r;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec) {
    require(!spec.axes.empty() && spec.axes.size() <= 2,
            "run_sweep: need one or two axes");
    const auto& valid = channel_parameters(spec.channel);
    auto is_valid = [&](const std::string& name) {
        return std::find(valid.begin(), valid.end(), name) != valid.end();
    };
    auto list_valid = [&]() {
        std::string s;
        for (const auto& v : valid) s += (s.empty() ? "" : ", ") + v;
        return s;
    };
    for (const auto& ax : spec.axes) {
        if (!is_valid(ax.name)) {
            throw usage_error("run_sweep: unknown axis '" + ax.name + "' for channel " +
                              channel_name(spec.channel) + " (valid: " + list_valid() + ")");
        }
        require(ax.n >= 1, "run_sweep: axis must have n >= 1");
    }
    if (spec.axes.size() == 2) {
        require(spec.axes[0].name != spec.axes[1].name,
                "run_sweep: axes must differ");
    }
    for (const auto& [k, v] : spec.fixed) {
        if (!is_valid(k)) {
            throw usage_error("run_sweep: unknown parameter '" + k + "' for channel " +
                              channel_name(spec.channel) + " (valid: " + list_valid() + ")");
        }
    }
    // The loss channel supports sweeping the combined product axis; alpha is
    // then derived from the fixed theta and eta_prime.
    bool product_mode = false;
    for (const auto& ax : spec.axes) {
        if (ax.name == "alpha_theta_etap") product_mode = true;
    }
    if (product_mode) {
        for (const auto& ax : spec.axes) {
            require(ax.name != "alpha",
                    "run_sweep: alpha and alpha_theta_etap cannot both be swept");
        }
    }

    ParamMap pm = channel_defaults(spec.channel);
    for (const auto& [k, v] : spec.fixed) pm[k] = v;

    SweepTable table;
    for (const std::string& name : output_parameters(spec.channel)) {
        table.columns.push_back(name);
    }
    const auto results = result_columns(spec.channel, spec.conv, spec.with_oracle);
    table.columns.insert(table.columns.end(), results.begin(), results.end());

    std::vector<std::vector<double>> axis_values;
    for (const auto& ax : spec.axes) axis_values.push_back(linspace(ax.lo, ax.hi, ax.n));

    const std::size_t n_outer = axis_values[0].size();
    const std::size_t n_inner = spec.axes.size() == 2 ? axis_values[1].size() : 1;
    table.rows.reserve(n_outer * n_inner);
    for (std::size_t i = 0; i < n_outer; ++i) {
        for (std::size_t j = 0; j < n_inner; ++j) {
            ParamMap row_pm = pm;
            row_pm[spec.axes[0].name] = axis_values[0][i];
            if (spec.axes.size() == 2) row_pm[spec.axes[1].name] = axis_values[1][j];
            if (spec.channel == Channel::Loss) {
                if (product_mode) {
                    const double x = row_pm.at("alpha_theta_etap");
                    const double theta = row_pm.at("theta");
                    const double etap = row_pm.at("eta_prime");
                    require(theta != 0.0 && etap != 0.0,
                            "run_sweep: product axis needs nonzero theta and eta_prime");
                    row_pm["alpha"] = x / (theta * etap);
                } else {
                    row_pm["alpha_theta_etap"] = row_pm.at("alpha") * row_pm.at("theta") *
                                                 row_pm.at("eta_prime");
                }
            }
            std::vector<double> row;
            for (const std::string& name : output_parameters(spec.channel)) {
                row.push_back(row_pm.at(name));
            }
            const std::vector<double> res =
                evaluate_channel(spec.channel, row_pm, spec.conv, spec.with_oracle, spec.tol);
            row.insert(row.end(), res.begin(), res.end());
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

SweepTable run_figure(const std::string& name, const FigureOverrides& ov) {
    SweepSpec spec;
    spec.conv = ov.conv;
    spec.with_oracle = ov.with_oracle;
    spec.tol = ov.tol;
    auto axis = [&](const std::string& pname, double lo, double hi, int n, bool first) {
        AxisSpec ax;
        ax.name = pname;
        ax.lo = first ? ov.min1.value_or(lo) : ov.min2.value_or(lo);
        ax.hi = first ? ov.max1.value_or(hi) : ov.max2.value_or(hi);
        ax.n = first ? ov.n1.value_or(n) : ov.n2.value_or(n);
        return ax;
    };
    if (name == "fig1") {
        spec.channel = Channel::Postselect;
        spec.axes = {axis("x0", 0.01, 2.0, 41, true), axis("d", 0.0, 4.0, 41, false)};
        return run_sweep(spec);
    }
    if (name == "fig2") {
        spec.channel = Channel::Loss;
        spec.axes = {axis("alpha_theta_etap", 0.0, 2.0, 201, true)};
        return run_sweep(spec);
    }
    if (name == "fig3") {
        spec.channel = Channel::Mismatch;
        spec.axes = {axis("alpha", 0.1, 3.0, 30, true), axis("delta0", 0.0, 1.0, 41, false)};
        return run_sweep(spec);
    }
    if (name == "fig4") {
        spec.channel = Channel::SelfKerr;
        spec.axes = {axis("lambda", 0.0, 0.05, 26, true), axis("theta", 0.0, 0.2, 21, false)};
        std::vector<double> alphas = ov.alphas.empty() ? std::vector<double>{2.0, 4.0}
                                                       : ov.alphas;
        SweepTable table;
        for (double a : alphas) {
            spec.fixed["alpha"] = a;
            SweepTable part = run_sweep(spec);
            if (table.columns.empty()) table.columns = part.columns;
            table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
        }
        return table;
    }
    throw usage_error("unknown figure '" + name + "' (valid: fig1, fig2, fig3, fig4)");
}

std::string gnuplot_script(const std::string& figure, const SweepTable& table,
                           const std::string& csv_path) {
    auto col_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            if (table.columns[i] == name) return static_cast<int>(i) + 1;  // 1-based
        }
        return -1;
    };
    std::ostringstream os;
    os << "set datafile separator ','\n";
    os << "set key outside\n";
    if (figure == "fig2") {
        os << "set xlabel 'alpha*theta*eta_prime'\n";
        os << "set ylabel 'p_flip'\n";
        os << "plot '" << csv_path << "' skip 1 using " << col_index("alpha_theta_etap")
           << ":" << col_index("p_flip") << " with lines title 'exact', \\\n"
           << "     '" << csv_path << "' skip 1 using " << col_index("alpha_theta_etap")
           << ":" << col_index("p_flip_small_theta")
           << " with lines dashtype 2 title 'small-theta'\n";
        return os.str();
    }
    // Surface figures: first two columns are the grid axes; plot the first
    // result column.
    const std::string zcol = figure == "fig1"   ? "error_window"
                             : figure == "fig3" ? (col_index("p_paper") > 0 ? "p_paper"
                                                                            : "p_normalized")
                                                : "error";
    os << "set xlabel '" << table.columns[0] << "'\n";
    os << "set ylabel '" << table.columns[1] << "'\n";
    os << "set dgrid3d\n";
    os << "set logscale z\n";
    os << "splot '" << csv_path << "' skip 1 using 1:2:" << col_index(zcol)
       << " with lines title '" << zcol << "'\n";
    return os.str();
}

namespace {

struct ThresholdMetric {
    std::function<double(double)> f;
    double def_lo = 0.0;
    double def_hi = 1.0;
};

ThresholdMetric threshold_metric(Channel ch, const std::string& free_param,
                                 const ParamMap& fixed, Convention conv) {
    ParamMap pm = channel_defaults(ch);
    // Threshold solves may fix parameters outside the sweep set (e.g. theta
    // for the postselect alpha solve).
    for (const auto& [k, v] : fixed) pm[k] = v;
    auto get = [pm](const std::string& k, double dflt) {
        const auto it = pm.find(k);
        return it == pm.end() ? dflt : it->second;
    };
    ThresholdMetric m;
    if (ch == Channel::Postselect) {
        const double theta = get("theta", 0.01);
        // The point metric is the default; only an explicit x0 > 0 switches to
        // the windowed acceptance error.
        const auto x0_it = fixed.find("x0");
        const double x0 = x0_it == fixed.end() ? 0.0 : x0_it->second;
        auto err_of_d_conv = [x0, conv](double d) {
            return x0 > 0.0 ? postselect_error_window(x0, d)
                            : postselect_error_point(d, conv);
        };
        if (free_param == "alpha") {
            m.f = [theta, err_of_d_conv](double a) {
                return err_of_d_conv(separation_d(a, theta));
            };
            m.def_lo = 1e-6;
            m.def_hi = 1e3;
            return m;
        }
        if (free_param == "d") {
            m.f = err_of_d_conv;
            m.def_lo = 0.0;
            m.def_hi = 50.0;
            return m;
        }
        if (free_param == "x0") {
            const double d = get("d", 1.0);
            m.f = [d](double x) { return postselect_error_window(x, d); };
            m.def_lo = 1e-9;
            m.def_hi = 20.0;
            return m;
        }
        throw usage_error(
            "solve_threshold: free parameter for postselect must be alpha, d, or x0");
    }
    if (ch == Channel::Loss) {
        const double alpha = get("alpha", 1.0);
        const double theta = get("theta", 0.01);
        const double etap = get("eta_prime", 0.1);
        if (free_param == "alpha_theta_etap") {
            m.f = [](double x) { return 0.5 * (1.0 - std::exp(-0.5 * x * x)); };
            m.def_lo = 0.0;
            m.def_hi = 50.0;
            return m;
        }
        if (free_param == "eta_prime") {
            m.f = [alpha, theta](double e) {
                return loss_dephasing(loss_gamma(alpha, theta, e)).p_flip;
            };
            m.def_lo = 0.0;
            m.def_hi = 1.0;
            return m;
        }
        if (free_param == "alpha") {
            m.f = [theta, etap](double a) {
                return loss_dephasing(loss_gamma(a, theta, etap)).p_flip;
            };
            m.def_lo = 0.0;
            m.def_hi = 1e3;
            return m;
        }
        if (free_param == "theta") {
            m.f = [alpha, etap](double t) {
                return loss_dephasing(loss_gamma(alpha, t, etap)).p_flip;
            };
            m.def_lo = 0.0;
            m.def_hi = 1.5;
            return m;
        }
        throw usage_error(
            "solve_threshold: free parameter for loss must be alpha_theta_etap, "
            "eta_prime, alpha, or theta");
    }
    if (ch == Channel::ModeMatch) {
        if (free_param == "lambda1") {
            m.f = [](double l) { return mode_mismatch_error(ModeOverlapParams{l, l}); };
            m.def_lo = 0.0;
            m.def_hi = 1.0;
            return m;
        }
        if (free_param == "lambda1_a" || free_param == "lambda1_b") {
            const double other = free_param == "lambda1_a" ? get("lambda1_b", 0.995)
                                                           : get("lambda1_a", 0.995);
            m.f = [other, free_param](double l) {
                return free_param == "lambda1_a"
                           ? mode_mismatch_error(ModeOverlapParams{l, other})
                           : mode_mismatch_error(ModeOverlapParams{other, l});
            };
            m.def_lo = 0.0;
            m.def_hi = 1.0;
            return m;
        }
        throw usage_error(
            "solve_threshold: free parameter for modematch must be lambda1, lambda1_a, "
            "or lambda1_b");
    }
    if (ch == Channel::Mismatch) {
        const double alpha = get("alpha", 1.0);
        const double delta0 = get("delta0", 0.5);
        if (free_param == "delta0") {
            m.f = [alpha, conv](double d0) {
                return mismatch_dephasing(alpha, d0, conv).channel.p_flip;
            };
            m.def_lo = 0.0;
            m.def_hi = 1.5;
            return m;
        }
        if (free_param == "alpha") {
            m.f = [delta0, conv](double a) {
                return mismatch_dephasing(a, delta0, conv).channel.p_flip;
            };
            m.def_lo = 0.0;
            m.def_hi = 50.0;
            return m;
        }
        throw usage_error(
            "solve_threshold: free parameter for mismatch must be delta0 or alpha");
    }
    // SelfKerr
    const double alpha = get("alpha", 2.0);
    const double theta = get("theta", 0.1);
    const double lambda = get("lambda", 0.01);
    if (free_param == "lambda") {
        m.f = [alpha, theta](double l) {
            return self_kerr_error(alpha, theta, SelfKerrParams{l, 0});
        };
        m.def_lo = 0.0;
        m.def_hi = 0.8;
        return m;
    }
    if (free_param == "theta") {
        m.f = [alpha, lambda](double t) {
            return self_kerr_error(alpha, t, SelfKerrParams{lambda, 0});
        };
        m.def_lo = 0.0;
        m.def_hi = 1.5;
        return m;
    }
    throw usage_error("solve_threshold: free parameter for selfkerr must be lambda or theta");
}

}  // namespace

ThresholdResult solve_threshold(Channel ch, double target, const std::string& free_param,
                                const std::map<std::string, double>& fixed,
                                ConventionChoice conv, std::optional<double> lo,
                                std::optional<double> hi) {
    require(std::isfinite(target), "solve_threshold: target must be finite");
    // Threshold metrics are single-convention quantities; the shared default
    // of "both" falls back to the bare closed forms.
    const Convention cv =
        conv == ConventionChoice::Normalized ? Convention::Normalized : Convention::Unnormalized;
    ThresholdMetric metric = threshold_metric(ch, free_param, fixed, cv);
    ThresholdResult res;
    res.free_param = free_param;
    res.lo = lo.value_or(metric.def_lo);
    res.hi = hi.value_or(metric.def_hi);
    require(std::isfinite(res.lo) && std::isfinite(res.hi) && res.lo < res.hi,
            "solve_threshold: invalid bracket");
    res.f_lo = metric.f(res.lo);
    res.f_hi = metric.f(res.hi);
    const double g_lo = res.f_lo - target;
    const double g_hi = res.f_hi - target;
    if (g_lo == 0.0) {
        res.value = res.lo;
        res.achieved = res.f_lo;
        res.feasible = true;
        return res;
    }
    if (g_hi == 0.0) {
        res.value = res.hi;
        res.achieved = res.f_hi;
        res.feasible = true;
        return res;
    }
    if ((g_lo > 0.0) == (g_hi > 0.0)) {
        res.feasible = false;  // caller reports the achievable range
        res.value = std::fabs(g_lo) < std::fabs(g_hi) ? res.lo : res.hi;
        res.achieved = metric.f(res.value);
        return res;
    }
    double a = res.lo;
    double b = res.hi;
    double fa = g_lo;
    int it = 0;
    while (b - a > 0.5e-12 * std::max(1.0, std::fabs(a) + std::fabs(b)) && it < 200) {
        const double mid = 0.5 * (a + b);
        const double fm = metric.f(mid) - target;
        if (fm == 0.0) {
            a = b = mid;
            break;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        ++it;
    }
    res.value = 0.5 * (a + b);
    res.achieved = metric.f(res.value);
    res.iterations = it;
    res.feasible = true;
    return res;
}

VerifyReport run_verify(Channel ch, double tol, int grid) {
    require(tol > 0.0, "run_verify: tol must be > 0");
    VerifyReport rep;
    rep.channel = ch;
    rep.tol = tol;
    auto push_ok = [&rep](std::vector<double> vals) {
        rep.rows.push_back(VerifyRow{std::move(vals), "ok"});
    };
    switch (ch) {
        case Channel::Postselect: {
            rep.columns = {"d",       "formula_paper", "formula_normalized",
                           "oracle",  "dev_paper",     "dev_normalized"};
            const int n = std::max(3, grid);
            for (double d : linspace(0.5, 3.0, n)) {
                const double fp = postselect_error_point(d, Convention::Unnormalized);
                const double fn = postselect_error_point(d, Convention::Normalized);
                const double oc = oracle_point_error(d, Convention::Normalized);
                const double dp = std::fabs(oc - fp);
                const double dn = std::fabs(oc - fn);
                rep.max_dev_paper = std::max(rep.max_dev_paper, dp);
                rep.max_dev_normalized = std::max(rep.max_dev_normalized, dn);
                push_ok({d, fp, fn, oc, dp, dn});
            }
            break;
        }
        case Channel::Loss: {
            rep.columns = {"alpha", "theta",      "eta_prime", "gamma",
                           "oracle", "dev",       "phase_dev"};
            for (double alpha : {1.0, 3.0, 50.0}) {
                for (double theta : {0.01, 0.1}) {
                    for (double etap : {0.1, 0.3}) {
                        const double g = loss_gamma(alpha, theta, etap);
                        oracle::GateRun gr;
                        gr.alpha = alpha;
                        gr.theta_a = theta;
                        gr.theta_b = theta;
                        gr.eta = std::sqrt(1.0 - etap * etap);
                        const auto cond = oracle::homodyne_point(
                            oracle::run_gate(gr), 0.0, Convention::Normalized);
                        const auto& m = cond.rho.matrix;
                        const double sup =
                            std::abs(m(0, 3)) /
                            std::sqrt(m(0, 0).real() * m(3, 3).real());
                        // Deterministic rotation: arg rho_{00,11} =
                        // -eta'^2 alpha^2 sin(theta); correcting it must land
                        // on the positive real axis.
                        const Complex corrected =
                            m(0, 3) * std::polar(1.0, etap * etap * alpha * alpha *
                                                          std::sin(theta));
                        const double phase_dev = std::fabs(std::arg(corrected));
                        const double dev = std::fabs(sup - g);
                        rep.max_dev_paper = std::max(rep.max_dev_paper, dev);
                        rep.max_dev_normalized = std::max(rep.max_dev_normalized, dev);
                        push_ok({alpha, theta, etap, g, sup, dev, phase_dev});
                    }
                }
            }
            break;
        }
        case Channel::Mismatch: {
            rep.columns = {"alpha",         "delta0",           "recon_dev_paper",
                           "recon_dev_normalized", "printed_gap_paper",
                           "printed_gap_normalized"};
            for (double alpha : {0.5, 1.0, 2.0}) {
                for (double delta0 : {0.2, 0.5, 0.8}) {
                    const MismatchOracle op = oracle_mismatch(
                        alpha, delta0, 801, Convention::Unnormalized, 1e-12);
                    const MismatchOracle on = oracle_mismatch(
                        alpha, delta0, 801, Convention::Normalized, 1e-12);
                    const MismatchDephasing mp =
                        mismatch_dephasing(alpha, delta0, Convention::Unnormalized);
                    const MismatchDephasing mn =
                        mismatch_dephasing(alpha, delta0, Convention::Normalized);
                    rep.max_dev_paper = std::max(rep.max_dev_paper, op.recon_dev);
                    rep.max_dev_normalized =
                        std::max(rep.max_dev_normalized, on.recon_dev);
                    push_ok({alpha, delta0, op.recon_dev, on.recon_dev,
                             std::fabs(mp.mu_printed - mp.bias.mu),
                             std::fabs(mn.mu_printed - mn.bias.mu)});
                }
            }
            break;
        }
        case Channel::ModeMatch: {
            rep.columns = {"lambda1_a", "lambda1_b", "error", "weight_dev"};
            const std::vector<std::pair<double, double>> pts = {
                {0.9, 0.9}, {0.995, 0.995}, {0.9, 1.0}, {0.7, 0.95}, {1.0, 1.0}};
            for (const auto& [a, b] : pts) {
                const double err = mode_mismatch_error(ModeOverlapParams{a, b});
                const double dev = oracle_modematch_weight_dev(a, b);
                rep.max_dev_paper = std::max(rep.max_dev_paper, dev);
                rep.max_dev_normalized = std::max(rep.max_dev_normalized, dev);
                push_ok({a, b, err, dev});
            }
            break;
        }
        case Channel::SelfKerr: {
            rep.columns = {"alpha", "theta", "lambda", "analytic", "oracle", "dev"};
            auto do_row = [&](double alpha, double theta, double lambda) {
                if (alpha > kMaxFockAlpha) {
                    rep.rows.push_back(
                        VerifyRow{{alpha, theta, lambda, kNaN, kNaN, kNaN}, "skip"});
                    ++rep.skipped;
                    return;
                }
                const double an = self_kerr_error(alpha, theta, SelfKerrParams{lambda, 0});
                const SelfKerrOracle oc = oracle_selfkerr(alpha, theta, lambda, 0.0, 0);
                const double dev = std::fabs(oc.error - an);
                rep.max_dev_normalized = std::max(rep.max_dev_normalized, dev);
                push_ok({alpha, theta, lambda, an, oc.error, dev});
            };
            for (double alpha : {1.0, 2.0, 4.0}) {
                for (double theta : {0.05, 0.1}) {
                    for (double lambda : {0.0, 0.005, 0.02}) {
                        do_row(alpha, theta, lambda);
                    }
                }
            }
            // One deliberately infeasible oracle point: reported, not dropped.
            do_row(9.0, 0.1, 0.01);
            rep.max_dev_paper = kNaN;
            break;
        }
    }
    (void)grid;
    rep.paper_within = std::isfinite(rep.max_dev_paper) && rep.max_dev_paper <= tol;
    rep.normalized_within =
        std::isfinite(rep.max_dev_normalized) && rep.max_dev_normalized <= tol;
    if (ch == Channel::SelfKerr) {
        rep.verdict = rep.normalized_within ? "normalized" : "none";
    } else if (rep.paper_within && rep.normalized_within) {
        rep.verdict = "both";
    } else if (rep.normalized_within) {
        rep.verdict = "normalized";
    } else if (rep.paper_within) {
        rep.verdict = "paper";
    } else {
        rep.verdict = "none";
    }
    rep.pass = rep.paper_within || rep.normalized_within;
    return rep;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return std::string(buf);
}

void write_csv(std::ostream& os, const SweepTable& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << table.columns[i];
    }
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_full(row[i]);
        }
        os << "\n";
    }
}

void write_json(std::ostream& os, const SweepTable& table) {
    nlohmann::ordered_json j;
    j["columns"] = table.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        auto r = nlohmann::ordered_json::array();
        for (double v : row) {
            if (std::isfinite(v)) {
                r.push_back(v);
            } else {
                r.push_back(nullptr);  // NaN/inf are not representable in JSON
            }
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    os << j.dump(2) << "\n";
}

void write_verify_csv(std::ostream& os, const VerifyReport& rep) {
    for (std::size_t i = 0; i < rep.columns.size(); ++i) {
        os << (i ? "," : "") << rep.columns[i];
    }
    os << ",status\n";
    for (const auto& row : rep.rows) {
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            os << (i ? "," : "") << format_full(row.values[i]);
        }
        os << "," << row.status << "\n";
    }
}

void write_verify_json(std::ostream& os, const VerifyReport& rep) {
    nlohmann::ordered_json j;
    j["channel"] = channel_name(rep.channel);
    j["tol"] = rep.tol;
    j["columns"] = rep.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : rep.rows) {
        nlohmann::ordered_json r;
        auto vals = nlohmann::ordered_json::array();
        for (double v : row.values) {
            if (std::isfinite(v)) {
                vals.push_back(v);
            } else {
                vals.push_back(nullptr);
            }
        }
        r["values"] = std::move(vals);
        r["status"] = row.status;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["max_dev_paper"] =
        std::isfinite(rep.max_dev_paper) ? nlohmann::ordered_json(rep.max_dev_paper)
                                         : nlohmann::ordered_json(nullptr);
    j["max_dev_normalized"] = std::isfinite(rep.max_dev_normalized)
                                  ? nlohmann::ordered_json(rep.max_dev_normalized)
                                  : nlohmann::ordered_json(nullptr);
    j["skipped"] = rep.skipped;
    j["verdict"] = rep.verdict;
    j["pass"] = rep.pass;
    os << j.dump(2) << "\n";
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw usage_error("config: cannot open '" + path + "'");
    }
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw usage_error("config: line " + std::to_string(lineno) +
                              " is not key=value: '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw usage_error("config: line " + std::to_string(lineno) + " has empty key");
        }
        out[key] = val;
    }
    return out;
}

}  // namespace busgate::sweep
