#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "busgate/types.hpp"

// Parameter sweeps, threshold solving, oracle verification, and the
// deterministic CSV/JSON writers behind the CLI.
namespace busgate::sweep {

enum class Channel { Postselect, Loss, Mismatch, ModeMatch, SelfKerr };

enum class ConventionChoice { Paper, Normalized, Both };

Channel channel_from_name(const std::string& name);          // usage_error lists valid names
const char* channel_name(Channel ch);
ConventionChoice convention_from_name(const std::string& s);  // "paper"|"normalized"|"both"

// Valid sweep-axis / fixed-parameter names for a channel, with defaults for
// anything not swept.
const std::vector<std::string>& channel_parameters(Channel ch);
const std::map<std::string, double>& channel_defaults(Channel ch);

struct AxisSpec {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;  // >= 1; n = 1 pins the axis at lo
};

struct SweepSpec {
    Channel channel = Channel::Postselect;
    std::vector<AxisSpec> axes;              // 1 or 2 axes
    std::map<std::string, double> fixed;     // overrides for non-swept parameters
    ConventionChoice conv = ConventionChoice::Both;
    bool with_oracle = false;
    double tol = 1e-10;
};

// Row-major evaluated grid (first axis slowest). Column order is fixed per
// channel/convention/oracle choice; values are doubles (NaN marks an
// infeasible oracle point).
struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

SweepTable run_sweep(const SweepSpec& spec);

// Pinned figure presets (fig1..fig4). Overrides adjust grid resolution and
// ranges without changing the column contract.
struct FigureOverrides {
    std::optional<int> n1, n2;
    std::optional<double> min1, max1, min2, max2;
    std::vector<double> alphas;  // fig4 only: discrete outer axis
    ConventionChoice conv = ConventionChoice::Both;
    bool with_oracle = false;
    double tol = 1e-10;
};
SweepTable run_figure(const std::string& name, const FigureOverrides& ov = {});

// Gnuplot script that plots a CSV written from the same table.
std::string gnuplot_script(const std::string& figure, const SweepTable& table,
                           const std::string& csv_path);

// Bisection threshold solve: find free_param where the channel's headline
// error metric crosses target. Brackets default per parameter; an endpoint
// pair that does not straddle the target reports the achievable range
// (feasible = false). Deterministic; interval shrunk below 1e-12.
struct ThresholdResult {
    double value = 0.0;
    double achieved = 0.0;
    bool feasible = false;
    double f_lo = 0.0;
    double f_hi = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
    std::string free_param;
};
ThresholdResult solve_threshold(Channel ch, double target, const std::string& free_param,
                                const std::map<std::string, double>& fixed,
                                ConventionChoice conv = ConventionChoice::Paper,
                                std::optional<double> lo = std::nullopt,
                                std::optional<double> hi = std::nullopt);

// Closed-form-vs-oracle verification on a pinned per-channel grid. Rows with
// infeasible oracle parameters are kept with status "skip", never dropped
// silently. pass = at least one convention within tol everywhere.
struct VerifyRow {
    std::vector<double> values;
    std::string status;  // "ok" or "skip"
};
struct VerifyReport {
    Channel channel = Channel::Postselect;
    std::vector<std::string> columns;
    std::vector<VerifyRow> rows;
    double max_dev_paper = 0.0;
    double max_dev_normalized = 0.0;
    bool paper_within = false;
    bool normalized_within = false;
    int skipped = 0;
    double tol = 0.0;
    std::string verdict;
    bool pass = false;
};
VerifyReport run_verify(Channel ch, double tol, int grid);

// --- deterministic output ---

// 17-significant-digit scientific form ("%.16e"): round-trips any double,
// byte-stable across runs.
std::string format_full(double v);

void write_csv(std::ostream& os, const SweepTable& table);
void write_json(std::ostream& os, const SweepTable& table);
void write_verify_csv(std::ostream& os, const VerifyReport& rep);
void write_verify_json(std::ostream& os, const VerifyReport& rep);

// Flat key=value config file ('#' comments, blank lines ignored). Malformed
// lines are usage errors.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace busgate::sweep
