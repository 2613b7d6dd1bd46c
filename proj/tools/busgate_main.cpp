// busgate: sweeps, thresholds, figures, and oracle verification for the
// weak-nonlinearity bus-mediated parity gate error models.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "busgate/analytic.hpp"
#include "busgate/errors.hpp"
#include "busgate/sweep.hpp"

namespace {

using busgate::numerical_error;
using busgate::usage_error;
namespace sw = busgate::sweep;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFail = 3;

const std::vector<std::string> kChannelNames = {"postselect", "loss", "mismatch",
                                                "modematch", "selfkerr"};

// Fixed-value flags offered for a channel subcommand. alpha_theta_etap is
// derived (or swept) for loss, never fixed directly.
std::vector<std::string> fixable_parameters(sw::Channel ch) {
    std::vector<std::string> out;
    for (const std::string& name : sw::channel_parameters(ch)) {
        if (name == "alpha_theta_etap") continue;
        out.push_back(name);
    }
    return out;
}

std::set<std::string> config_keys_for(const std::string& subcmd) {
    std::set<std::string> keys = {"out", "format", "tol"};
    auto is_channel = [&](const std::string& s) {
        for (const auto& n : kChannelNames) {
            if (n == s) return true;
        }
        return false;
    };
    if (is_channel(subcmd)) {
        keys.insert({"convention", "oracle", "axis1", "min1", "max1", "n1", "axis2",
                     "min2", "max2", "n2"});
        for (const std::string& p : fixable_parameters(sw::channel_from_name(subcmd))) {
            keys.insert(p);
        }
    } else if (subcmd == "threshold") {
        keys.insert({"convention", "channel", "target", "free", "lo", "hi", "fix"});
    } else if (subcmd == "figure") {
        keys.insert({"convention", "oracle", "n1", "n2", "min1", "max1", "min2", "max2",
                     "alphas", "gnuplot"});
    } else if (subcmd == "verify") {
        keys.insert({"grid"});
    } else {
        throw usage_error("--config: unknown subcommand '" + subcmd + "'");
    }
    return keys;
}

bool truthy(const std::string& v) {
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

bool falsy(const std::string& v) {
    return v == "0" || v == "false" || v == "no" || v == "off";
}

// Splice config-file settings in as command-line tokens, placed right after
// the subcommand so explicit flags still win (options take the last value).
std::vector<std::string> inject_config(std::vector<std::string> args) {
    std::string path;
    std::vector<std::string> stripped;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw usage_error("--config needs a file path");
            path = args[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            path = a.substr(std::string("--config=").size());
        } else {
            stripped.push_back(a);
        }
    }
    if (path.empty()) return args;
    if (stripped.empty() || stripped.front().empty() || stripped.front()[0] == '-') {
        throw usage_error("--config requires a subcommand");
    }
    const std::string subcmd = stripped.front();
    const std::set<std::string> valid = config_keys_for(subcmd);
    const auto kv = sw::parse_config_file(path);
    std::vector<std::string> out;
    out.push_back(subcmd);
    for (const auto& [k, v] : kv) {
        if (valid.find(k) == valid.end()) {
            std::string names;
            for (const auto& n : valid) names += (names.empty() ? "" : ", ") + n;
            throw usage_error("config: unknown key '" + k + "' for subcommand '" +
                              subcmd + "' (valid: " + names + ")");
        }
        if (k == "oracle") {
            if (truthy(v)) {
                out.push_back("--oracle");
            } else if (!falsy(v)) {
                throw usage_error("config: oracle must be a boolean, got '" + v + "'");
            }
            continue;
        }
        out.push_back("--" + k);
        out.push_back(v);
    }
    out.insert(out.end(), stripped.begin() + 1, stripped.end());
    return out;
}

struct OutputOptions {
    std::string out_path;
    std::string format = "csv";
};

// Writes through to --out, or stdout when no path was given.
class OutputStream {
  public:
    explicit OutputStream(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw usage_error("cannot open output file '" + path + "'");
        }
    }
    std::ostream& get() { return file_.is_open() ? file_ : std::cout; }
    bool to_file() const { return file_.is_open(); }

  private:
    std::ofstream file_;
};

void add_output_options(CLI::App* sub, OutputOptions& oo) {
    sub->add_option("--out", oo.out_path, "Write the table to this file (default: stdout)")
        ->take_last();
    sub->add_option("--format", oo.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->take_last();
}

struct ChannelCmd {
    CLI::App* sub = nullptr;
    sw::Channel channel = sw::Channel::Postselect;
    OutputOptions oo;
    std::string axis1, axis2;
    double min1 = 0.0, max1 = 0.0, min2 = 0.0, max2 = 0.0;
    int n1 = 41, n2 = 41;
    std::string convention = "both";
    bool oracle = false;
    double tol = 1e-10;
    std::vector<std::string> fixed_names;
    std::map<std::string, double> fixed_vals;
};

void add_channel_subcommand(CLI::App& app, std::vector<std::unique_ptr<ChannelCmd>>& cmds,
                            const std::string& name, const std::string& desc) {
    auto cmd = std::make_unique<ChannelCmd>();
    cmd->channel = sw::channel_from_name(name);
    CLI::App* sub = app.add_subcommand(name, desc);
    cmd->sub = sub;
    sub->add_option("--axis1", cmd->axis1, "First sweep axis (parameter name)")
        ->required()
        ->take_last();
    sub->add_option("--min1", cmd->min1, "First axis lower bound")->required()->take_last();
    sub->add_option("--max1", cmd->max1, "First axis upper bound")->required()->take_last();
    sub->add_option("--n1", cmd->n1, "First axis point count")->take_last();
    sub->add_option("--axis2", cmd->axis2, "Optional second sweep axis")->take_last();
    sub->add_option("--min2", cmd->min2, "Second axis lower bound")->take_last();
    sub->add_option("--max2", cmd->max2, "Second axis upper bound")->take_last();
    sub->add_option("--n2", cmd->n2, "Second axis point count")->take_last();
    sub->add_option("--convention", cmd->convention,
                    "Homodyne amplitude convention: paper, normalized, or both")
        ->check(CLI::IsMember({"paper", "normalized", "both"}))
        ->take_last();
    sub->add_flag("--oracle", cmd->oracle,
                  "Also evaluate the first-principles oracle columns");
    sub->add_option("--tol", cmd->tol, "Quadrature tolerance for integral columns")
        ->take_last();
    add_output_options(sub, cmd->oo);
    cmd->fixed_names = fixable_parameters(cmd->channel);
    for (const std::string& p : cmd->fixed_names) {
        cmd->fixed_vals[p] = 0.0;
        sub->add_option("--" + p, cmd->fixed_vals[p], "Fix parameter " + p)->take_last();
    }
    cmds.push_back(std::move(cmd));
}

int run_channel(const ChannelCmd& cmd) {
    sw::SweepSpec spec;
    spec.channel = cmd.channel;
    spec.conv = sw::convention_from_name(cmd.convention);
    spec.with_oracle = cmd.oracle;
    spec.tol = cmd.tol;
    spec.axes.push_back(sw::AxisSpec{cmd.axis1, cmd.min1, cmd.max1, cmd.n1});
    const bool has2 = cmd.sub->count("--axis2") > 0;
    if (has2) {
        if (cmd.sub->count("--min2") == 0 || cmd.sub->count("--max2") == 0) {
            throw usage_error("--axis2 needs --min2 and --max2");
        }
        spec.axes.push_back(sw::AxisSpec{cmd.axis2, cmd.min2, cmd.max2, cmd.n2});
    } else if (cmd.sub->count("--min2") || cmd.sub->count("--max2") ||
               cmd.sub->count("--n2")) {
        throw usage_error("--min2/--max2/--n2 are only valid with --axis2");
    }
    for (const std::string& p : cmd.fixed_names) {
        if (cmd.sub->count("--" + p) > 0) spec.fixed[p] = cmd.fixed_vals.at(p);
    }
    const sw::SweepTable table = sw::run_sweep(spec);
    OutputStream os(cmd.oo.out_path);
    if (cmd.oo.format == "json") {
        sw::write_json(os.get(), table);
    } else {
        sw::write_csv(os.get(), table);
    }
    if (os.to_file()) {
        std::cout << "wrote " << table.rows.size() << " rows to " << cmd.oo.out_path
                  << "\n";
    }
    return kExitOk;
}

struct ThresholdCmd {
    CLI::App* sub = nullptr;
    OutputOptions oo;
    std::string channel;
    double target = 0.0;
    std::string free_param;
    std::string convention = "paper";
    std::vector<std::string> fixes;
    double lo = 0.0, hi = 0.0;
};

int run_threshold(const ThresholdCmd& cmd) {
    const sw::Channel ch = sw::channel_from_name(cmd.channel);
    std::map<std::string, double> fixed;
    for (const std::string& fx : cmd.fixes) {
        const auto eq = fx.find('=');
        if (eq == std::string::npos) {
            throw usage_error("--fix expects key=value, got '" + fx + "'");
        }
        const std::string key = fx.substr(0, eq);
        double val = 0.0;
        try {
            std::size_t pos = 0;
            val = std::stod(fx.substr(eq + 1), &pos);
            if (pos != fx.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw usage_error("--fix " + fx + ": value is not a number");
        }
        const auto& params = sw::channel_parameters(ch);
        const bool known =
            std::find(params.begin(), params.end(), key) != params.end() ||
            (ch == sw::Channel::Postselect && key == "theta");
        if (!known) {
            throw usage_error("--fix: unknown parameter '" + key + "' for channel " +
                              std::string(sw::channel_name(ch)));
        }
        fixed[key] = val;
    }
    std::optional<double> lo, hi;
    if (cmd.sub->count("--lo")) lo = cmd.lo;
    if (cmd.sub->count("--hi")) hi = cmd.hi;
    const sw::ThresholdResult res = sw::solve_threshold(
        ch, cmd.target, cmd.free_param, fixed, sw::convention_from_name(cmd.convention),
        lo, hi);
    std::cout << "channel=" << sw::channel_name(ch) << " free=" << res.free_param
              << " target=" << sw::format_full(cmd.target) << "\n";
    std::cout << "bracket=[" << sw::format_full(res.lo) << ", " << sw::format_full(res.hi)
              << "] f_lo=" << sw::format_full(res.f_lo)
              << " f_hi=" << sw::format_full(res.f_hi) << "\n";
    if (res.feasible) {
        std::cout << "value=" << sw::format_full(res.value) << "\n";
        std::cout << "achieved=" << sw::format_full(res.achieved) << "\n";
        std::cout << "iterations=" << res.iterations << "\n";
        std::cout << "feasible=yes\n";
    } else {
        std::cout << "feasible=no (target outside achievable range ["
                  << sw::format_full(std::min(res.f_lo, res.f_hi)) << ", "
                  << sw::format_full(std::max(res.f_lo, res.f_hi)) << "])\n";
    }
    if (!cmd.oo.out_path.empty()) {
        OutputStream os(cmd.oo.out_path);
        if (cmd.oo.format == "json") {
            os.get() << "{\n"
                     << "  \"channel\": \"" << sw::channel_name(ch) << "\",\n"
                     << "  \"free\": \"" << res.free_param << "\",\n"
                     << "  \"target\": " << sw::format_full(cmd.target) << ",\n"
                     << "  \"value\": " << sw::format_full(res.value) << ",\n"
                     << "  \"achieved\": " << sw::format_full(res.achieved) << ",\n"
                     << "  \"feasible\": " << (res.feasible ? "true" : "false") << ",\n"
                     << "  \"f_lo\": " << sw::format_full(res.f_lo) << ",\n"
                     << "  \"f_hi\": " << sw::format_full(res.f_hi) << ",\n"
                     << "  \"iterations\": " << res.iterations << "\n"
                     << "}\n";
        } else {
            os.get() << "channel,free,target,value,achieved,feasible,f_lo,f_hi,iterations\n"
                     << sw::channel_name(ch) << "," << res.free_param << ","
                     << sw::format_full(cmd.target) << "," << sw::format_full(res.value)
                     << "," << sw::format_full(res.achieved) << ","
                     << (res.feasible ? 1 : 0) << "," << sw::format_full(res.f_lo) << ","
                     << sw::format_full(res.f_hi) << "," << res.iterations << "\n";
        }
    }
    return res.feasible ? kExitOk : kExitNumerical;
}

struct FigureCmd {
    CLI::App* sub = nullptr;
    OutputOptions oo;
    std::string name;
    std::string convention = "both";
    bool oracle = false;
    double tol = 1e-10;
    int n1 = 0, n2 = 0;
    double min1 = 0.0, max1 = 0.0, min2 = 0.0, max2 = 0.0;
    std::vector<double> alphas;
    std::string gnuplot_path;
};

int run_figure_cmd(const FigureCmd& cmd) {
    sw::FigureOverrides ov;
    ov.conv = sw::convention_from_name(cmd.convention);
    ov.with_oracle = cmd.oracle;
    ov.tol = cmd.tol;
    if (cmd.sub->count("--n1")) ov.n1 = cmd.n1;
    if (cmd.sub->count("--n2")) ov.n2 = cmd.n2;
    if (cmd.sub->count("--min1")) ov.min1 = cmd.min1;
    if (cmd.sub->count("--max1")) ov.max1 = cmd.max1;
    if (cmd.sub->count("--min2")) ov.min2 = cmd.min2;
    if (cmd.sub->count("--max2")) ov.max2 = cmd.max2;
    ov.alphas = cmd.alphas;
    const sw::SweepTable table = sw::run_figure(cmd.name, ov);
    if (!cmd.gnuplot_path.empty() && cmd.oo.out_path.empty()) {
        throw usage_error("--gnuplot needs --out so the script can reference the CSV");
    }
    OutputStream os(cmd.oo.out_path);
    if (cmd.oo.format == "json") {
        sw::write_json(os.get(), table);
    } else {
        sw::write_csv(os.get(), table);
    }
    if (!cmd.gnuplot_path.empty()) {
        std::ofstream gp(cmd.gnuplot_path, std::ios::binary);
        if (!gp) throw usage_error("cannot open gnuplot file '" + cmd.gnuplot_path + "'");
        gp << sw::gnuplot_script(cmd.name, table, cmd.oo.out_path);
    }
    if (os.to_file()) {
        std::cout << "wrote " << table.rows.size() << " rows to " << cmd.oo.out_path
                  << "\n";
    }
    return kExitOk;
}

struct VerifyCmd {
    CLI::App* sub = nullptr;
    OutputOptions oo;
    std::string channel;
    double tol = 1e-8;
    int grid = 7;
};

int run_verify_cmd(const VerifyCmd& cmd) {
    const sw::Channel ch = sw::channel_from_name(cmd.channel);
    const sw::VerifyReport rep = sw::run_verify(ch, cmd.tol, cmd.grid);
    if (!cmd.oo.out_path.empty()) {
        OutputStream os(cmd.oo.out_path);
        if (cmd.oo.format == "json") {
            sw::write_verify_json(os.get(), rep);
        } else {
            sw::write_verify_csv(os.get(), rep);
        }
    }
    std::cout << "verify channel=" << sw::channel_name(ch)
              << " tol=" << sw::format_full(rep.tol) << " rows=" << rep.rows.size()
              << " skipped=" << rep.skipped << "\n";
    std::cout << "max_dev_paper="
              << (std::isfinite(rep.max_dev_paper) ? sw::format_full(rep.max_dev_paper)
                                                   : std::string("n/a"))
              << " max_dev_normalized="
              << (std::isfinite(rep.max_dev_normalized)
                      ? sw::format_full(rep.max_dev_normalized)
                      : std::string("n/a"))
              << "\n";
    std::cout << "verdict=" << rep.verdict << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
    return rep.pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Error models for a bus-mediated two-qubit parity gate: closed-form sweeps, "
        "threshold solves, figure tables, and first-principles oracle verification."};
    app.set_version_flag("--version", "busgate 1.0.0");
    app.require_subcommand(1);

    std::vector<std::unique_ptr<ChannelCmd>> channels;
    add_channel_subcommand(app, channels, "postselect",
                           "Post-selection window/point error vs separation");
    add_channel_subcommand(app, channels, "loss",
                           "Bus-loss dephasing (exact and small-angle forms)");
    add_channel_subcommand(app, channels, "mismatch",
                           "Coupling-mismatch dephasing and measurement bias");
    add_channel_subcommand(app, channels, "modematch",
                           "Mode-mismatch parity error from imperfect overlap");
    add_channel_subcommand(app, channels, "selfkerr",
                           "Self-Kerr parity error from bus phase curvature");

    ThresholdCmd th;
    th.sub = app.add_subcommand("threshold",
                                "Solve one parameter for a target error level");
    th.sub->add_option("--channel", th.channel, "Error channel")
        ->required()
        ->check(CLI::IsMember(kChannelNames))
        ->take_last();
    th.sub->add_option("--target", th.target, "Target error level")->required()->take_last();
    th.sub->add_option("--free", th.free_param, "Parameter to solve for")
        ->required()
        ->take_last();
    th.sub->add_option("--lo", th.lo, "Bracket lower endpoint")->take_last();
    th.sub->add_option("--hi", th.hi, "Bracket upper endpoint")->take_last();
    th.sub->add_option("--fix", th.fixes, "Fix a parameter, key=value (repeatable)");
    th.sub->add_option("--convention", th.convention, "Convention for the metric")
        ->check(CLI::IsMember({"paper", "normalized", "both"}))
        ->take_last();
    add_output_options(th.sub, th.oo);

    FigureCmd fg;
    fg.sub = app.add_subcommand("figure", "Emit a pinned figure table (fig1..fig4)");
    fg.sub->add_option("name", fg.name, "Figure name: fig1, fig2, fig3, fig4")->required();
    fg.sub->add_option("--n1", fg.n1, "Override first axis point count")->take_last();
    fg.sub->add_option("--n2", fg.n2, "Override second axis point count")->take_last();
    fg.sub->add_option("--min1", fg.min1, "Override first axis lower bound")->take_last();
    fg.sub->add_option("--max1", fg.max1, "Override first axis upper bound")->take_last();
    fg.sub->add_option("--min2", fg.min2, "Override second axis lower bound")->take_last();
    fg.sub->add_option("--max2", fg.max2, "Override second axis upper bound")->take_last();
    fg.sub->add_option("--alphas", fg.alphas, "Amplitude stack for fig4")
        ->delimiter(',')
        ->take_last();
    fg.sub->add_option("--convention", fg.convention, "Convention choice")
        ->check(CLI::IsMember({"paper", "normalized", "both"}))
        ->take_last();
    fg.sub->add_flag("--oracle", fg.oracle, "Include oracle columns");
    fg.sub->add_option("--tol", fg.tol, "Quadrature tolerance")->take_last();
    fg.sub->add_option("--gnuplot", fg.gnuplot_path, "Also write a gnuplot script here")
        ->take_last();
    add_output_options(fg.sub, fg.oo);

    VerifyCmd vf;
    vf.sub = app.add_subcommand(
        "verify", "Check closed forms against the first-principles oracle");
    vf.sub->add_option("channel", vf.channel, "Error channel to verify")
        ->required()
        ->check(CLI::IsMember(kChannelNames));
    vf.sub->add_option("--tol", vf.tol, "Deviation tolerance")->take_last();
    vf.sub->add_option("--grid", vf.grid, "Grid density where applicable")->take_last();
    add_output_options(vf.sub, vf.oo);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config(std::move(args));
        std::vector<const char*> cargv;
        cargv.push_back(argv[0]);
        for (const std::string& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());

        for (const auto& cmd : channels) {
            if (cmd->sub->parsed()) return run_channel(*cmd);
        }
        if (th.sub->parsed()) return run_threshold(th);
        if (fg.sub->parsed()) return run_figure_cmd(fg);
        if (vf.sub->parsed()) return run_verify_cmd(vf);
        std::cerr << "no subcommand selected\n";
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
