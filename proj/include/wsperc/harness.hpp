#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsperc/stats.hpp"

namespace wsperc {

/// Flat `key = value` experiment file. '#' starts a comment; unknown or repeated keys are errors.
///
///   d             dimension (required)
///   lambda        intensity, default 1
///   r             comma-separated radii in (0, 1) (required)
///   L             comma-separated box sides in units of sqrt(t_ref), each >= 4; default 6
///   c_b           coarse-grain ball constant, default 1 (recorded in the summary)
///   step_divisor  path step is (r / step_divisor)^2, default 4
///   n_trials      trials per (r, L), default 20
///   seed          default 1
///   safety        horizon is safety * t_ref rounded up to the step grid, default 8
///   margin        starting points sampled margin * sqrt(t_ref) beyond the box, default 0
///   bootstrap     bootstrap resamples for the median interval, default 1000
///   model         power_law | log_root | auto (log_root for d = 4), default auto
///   output_csv    default tc.csv
///   output_json   default tc_summary.json
struct ExperimentConfig {
    int d = 0;
    double lambda = 1.0;
    std::vector<double> r;
    std::vector<double> box_sides{6.0};
    double c_b = 1.0;
    double step_divisor = 4.0;
    std::size_t n_trials = 20;
    std::uint64_t seed = 1;
    double safety = 8.0;
    double margin = 0.0;
    std::size_t bootstrap = 1000;
    std::string model = "auto";
    std::string output_csv = "tc.csv";
    std::string output_json = "tc_summary.json";

    /// Throws ConfigError on any invalid field.
    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Predicted critical-time scale: r^{(4-d)/2}, or sqrt(log(1/r)) for d = 4.
double predicted_scale(int d, double r);

enum class TcFlag { ok, none_heavy, underpowered };
std::string to_string(TcFlag f);

struct TcSummary {
    double median = 0.0;  ///< +inf when the censored median is NONE
    Interval ci;
    std::size_t n_none = 0;
    TcFlag flag = TcFlag::ok;
};

/// Median and percentile-bootstrap interval of per-trial crossing times. NONE trials are
/// dropped when they are under 20% of the total, otherwise kept as +inf (flagged); over 50%
/// is UNDERPOWERED. Input order does not matter.
TcSummary summarize_trials(const std::vector<std::optional<double>>& tau,
                           std::size_t n_resamples, std::uint64_t seed);

struct TcEstimate {
    double r = 0.0;
    double box_side = 0.0;  ///< in units of sqrt(t_ref)
    double t_ref = 0.0;
    double t_max = 0.0;
    double step = 0.0;
    std::vector<std::optional<double>> tau;  ///< per trial
    std::vector<std::uint64_t> trial_seeds;
    std::size_t n_sausages = 0;              ///< summed over trials
    TcSummary summary;
};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t r_index, std::size_t trial);

/// Crossing time of one sampled configuration of the sweep.
std::optional<double> run_trial(const ExperimentConfig& cfg, double r, double box_side,
                                std::uint64_t seed, std::size_t* n_sausages = nullptr);

TcEstimate estimate_tc(const ExperimentConfig& cfg, std::size_t r_index, double box_side,
                       unsigned workers);

enum class ScalingModel { power_law, log_root };
std::string to_string(ScalingModel m);
ScalingModel parse_model(const std::string& s, int d);

struct ScalingFit {
    ScalingModel model = ScalingModel::power_law;
    double amplitude = 0.0, amplitude_se = 0.0;
    double exponent = 0.0, exponent_se = 0.0;  ///< power law only
    std::vector<double> residuals;            ///< in the transformed coordinates
    std::size_t n = 0;
};

/// Least squares of log t on log r (power law) or of t on sqrt(log(1/r)) through the origin
/// (log root). Needs at least 3 points and 2 distinct radii.
ScalingFit fit_scaling(const std::vector<double>& r, const std::vector<double>& t, ScalingModel m);
ScalingFit fit_scaling(const std::vector<TcEstimate>& estimates, ScalingModel m);

struct ExperimentResult {
    std::vector<TcEstimate> estimates;  ///< r-major, then box side
    std::vector<std::optional<ScalingFit>> fits;  ///< one per box side
    bool underpowered = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers);

void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res);
void write_summary_json(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res);
/// Writes both files named in cfg; throws IoError when a path cannot be written.
void write_results(const ExperimentConfig& cfg, const ExperimentResult& res);

}  // namespace wsperc
