///
/// \file bench.hpp
///
/// Config-driven Monte-Carlo harness.
///
/// Every trial draws a fresh instance (matrix, objects, noise) from its own
/// seed and runs all listed algorithms on that same instance.  Trial t uses
/// the same seed at every sweep value, so sweep points are paired as well.
/// Output depends only on the config: worker count and scheduling never
/// change a byte of the CSV.
///
#ifndef BANDEX_BENCH_HPP
#define BANDEX_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <bandex/coherence.hpp>
#include <bandex/l1.hpp>
#include <bandex/metrics.hpp>
#include <bandex/serialize.hpp>

namespace bandex
{

enum class Ensemble
{
    spectral, ///< on-grid objects, random sample times
    frame,    ///< A = Phi Psi, error measured on the signal y = Psi x
    offgrid,  ///< continuous frequencies, scored against the true positions
};

enum class Placement
{
    random,      ///< sorted-uniform with a minimum separation
    consecutive, ///< equally spaced run at min_sep_rl, random shift
};

/// Band policy as written in a config; `half_spacing` resolves per sweep
/// point to FixedRadius(h/2, h/2) with h the object spacing.
struct BandRule
{
    std::optional<double> eta;
    double be_radius  = 2.0;
    double lo_radius  = 1.0;
    bool half_spacing = false;

    BandPolicy resolve(double spacing_rl) const;
};

/// Iteration limits for the L1 arms.
struct L1Settings
{
    int lasso_max_iters = 20000;
    double lasso_tol    = 1e-10;
    AdmmOptions bp{};
};

struct ExperimentConfig
{
    std::string name = "experiment";
    Ensemble ensemble   = Ensemble::spectral;
    Placement placement = Placement::random;
    Index N = 100;
    double R = 200.0; ///< window length in RL (frames need an integer)
    int F = 20;
    int s = 10;
    double min_sep_rl    = 3.0;
    double dynamic_range = 1.0;
    double noise_level   = 0.0;
    double frame_sigma   = -1.0; ///< < 0 selects 1 / sqrt(N)
    BandRule band;
    std::vector<std::string> algorithms;
    std::string sweep_variable = "dynamic_range";
    std::vector<double> sweep_values;
    int trials = 100;
    std::uint64_t base_seed = 1;
    bool record_timing = true;
    L1Settings l1;
};

/// Parse and validate; errors name the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
Json config_to_json(const ExperimentConfig& cfg);

/// Throws std::invalid_argument naming the first invalid field.
void validate_config(const ExperimentConfig& cfg);

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trial t: splitmix64(base ^ splitmix64(t)).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial);

/// Everything an algorithm arm may read for one trial.
struct TrialContext
{
    const CMatrix& A;
    const LinearOperator& op;
    const CVector& b;
    Index sparsity;
    const BandIndex& bands;
    double noise_norm;  ///< ||e||, the BP constraint radius
    double noise_sigma; ///< per-component noise deviation for Lasso
    const L1Settings& l1;
    const FrameModel* frame = nullptr;
};

struct ArmOutput
{
    RecoveryResult result;
    /// Analysis-form estimates of y have no coefficient vector.
    std::optional<CVector> signal;
};

struct AlgorithmInfo
{
    std::string name;
    std::string description;
    bool frame_only = false;
    std::function<ArmOutput(const TrialContext&)> run;
};

const std::vector<AlgorithmInfo>& algorithm_registry();
/// Throws std::invalid_argument for an unknown name.
const AlgorithmInfo& find_algorithm(const std::string& name);

struct TrialRecord
{
    double sweep_value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t instance_hash = 0;
    std::vector<TrialOutcome> outcomes; ///< one per algorithm, config order
    std::vector<double> runtime_ms;
};

struct SweepRow
{
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string algorithm;
    int trials = 0;
    double success_rate       = 0.0;
    double mean_bottleneck_rl = 0.0; ///< over finite trials; nan if none
    double mean_rel_residual  = 0.0;
    double mean_rel_coeff_err = 0.0;
    double mean_rel_signal_err = 0.0; ///< nan outside frame runs
    double mean_runtime_ms    = 0.0;
};

struct SweepResult
{
    ExperimentConfig config;
    std::vector<double> dropped_values; ///< sweep values skipped by range policy
    std::vector<SweepRow> rows;         ///< value-major, algorithms in config order
    std::vector<TrialRecord> records;   ///< value-major, trial order
};

struct RunOptions
{
    int workers = 1;
    bool full_range = false; ///< allow dynamic range above 1e8
};

/// Largest dynamic range run without RunOptions::full_range.
inline constexpr double default_max_dynamic_range = 1e8;

/// One trial at one sweep value, all algorithms.
TrialRecord run_trial(const ExperimentConfig& cfg, double sweep_value, int trial);

SweepResult run_sweep(const ExperimentConfig& cfg, const RunOptions& opt = {});

/// run_sweep with consecutive placement over spacing and half-spacing bands.
/// Throws if any spacing is at or below the grid spacing 1/F.
SweepResult run_resolution_experiment(ExperimentConfig cfg,
                                      const RunOptions& opt = {});

/// run_sweep on the frame ensemble.
SweepResult run_frame_experiment(ExperimentConfig cfg, const RunOptions& opt = {});

inline constexpr const char* csv_header =
    "sweep_var,sweep_value,algorithm,trials,success_rate,mean_bottleneck_rl,"
    "mean_rel_residual,mean_rel_coeff_err,mean_rel_signal_err,mean_runtime_ms";

std::string to_csv(const SweepResult& result);
Json meta_json(const SweepResult& result);

/// Writes <dir>/<name>.csv and <dir>/<name>.meta.json; returns the CSV path.
std::filesystem::path write_outputs(const SweepResult& result,
                                    const std::filesystem::path& dir);

/// (separation in RL, mean coherence) for the config's first matrix draw.
std::string coherence_csv(const ExperimentConfig& cfg, double max_sep_rl = 5.0);

/// |Psi^* y| sorted descending for the first trial of a frame config.
std::string analysis_profile_csv(const ExperimentConfig& cfg);

} // namespace bandex

#endif // BANDEX_BENCH_HPP
