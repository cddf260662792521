#include <bandex/bench.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <bandex/greedy.hpp>
#include <bandex/thresh.hpp>

#ifndef BANDEX_VERSION
#define BANDEX_VERSION "unknown"
#endif

namespace bandex
{

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace
{

const std::vector<std::string> sweep_variables = {
    "dynamic_range", "noise_level", "N", "min_sep_rl", "F"};

[[noreturn]] void field_error(const std::string& field, const std::string& what)
{
    throw std::invalid_argument("config field '" + field + "': " + what);
}

template <typename T>
T read(const Json& j, const std::string& field, const T& fallback)
{
    if (!j.contains(field)) {
        return fallback;
    }
    try {
        return j.at(field).get<T>();
    } catch (const Json::exception& e) {
        field_error(field, std::string("wrong type (") + e.what() + ")");
    }
}

bool is_integer(double v)
{
    return std::isfinite(v) && std::floor(v) == v;
}

std::string ensemble_name(Ensemble e)
{
    switch (e) {
    case Ensemble::spectral: return "spectral";
    case Ensemble::frame:    return "frame";
    case Ensemble::offgrid:  return "offgrid";
    }
    return "spectral";
}

std::string placement_name(Placement p)
{
    return p == Placement::random ? "random" : "consecutive";
}

ExperimentConfig at_sweep_point(const ExperimentConfig& cfg, double value)
{
    ExperimentConfig out = cfg;
    const std::string& var = cfg.sweep_variable;
    if (var == "dynamic_range") {
        out.dynamic_range = value;
    } else if (var == "noise_level") {
        out.noise_level = value;
    } else if (var == "N") {
        out.N = static_cast<Index>(value);
    } else if (var == "min_sep_rl") {
        out.min_sep_rl = value;
    } else if (var == "F") {
        out.F = static_cast<int>(value);
    }
    return out;
}

void validate_point(const ExperimentConfig& c, const std::string& where)
{
    auto fail = [&](const std::string& field, const std::string& what) {
        field_error(field, what + where);
    };
    if (c.N < 1) {
        fail("N", "must be >= 1");
    }
    if (c.F < 1) {
        fail("F", "must be >= 1");
    }
    if (!(c.R > 0.0)) {
        fail("R", "must be > 0");
    }
    if (!is_integer(c.R * c.F)) {
        fail("R", "R * F must be an integer");
    }
    if (c.ensemble == Ensemble::frame && !is_integer(c.R)) {
        fail("R", "frame ensembles need an integer R");
    }
    if (c.s < 1) {
        fail("s", "must be >= 1");
    }
    if (c.s > c.N) {
        fail("s", "must not exceed N");
    }
    if (!(c.min_sep_rl > 0.0)) {
        fail("min_sep_rl", "must be > 0");
    }
    if (!(c.dynamic_range >= 1.0) || !std::isfinite(c.dynamic_range)) {
        fail("dynamic_range", "must be finite and >= 1");
    }
    if (!(c.noise_level >= 0.0) || !std::isfinite(c.noise_level)) {
        fail("noise_level", "must be finite and >= 0");
    }
    const double m = c.R * c.F;
    if (c.placement == Placement::consecutive) {
        if (c.min_sep_rl <= 1.0 / c.F) {
            fail("min_sep_rl", "consecutive spacing must exceed the grid spacing 1/F");
        }
        const double steps = std::round(c.min_sep_rl * c.F);
        if ((c.s - 1) * steps > m - 1) {
            fail("min_sep_rl", "objects do not fit in the window");
        }
    } else {
        const double steps = std::max(1.0, std::ceil(c.min_sep_rl * c.F - 1e-9));
        if ((c.s - 1) * steps > m - 1) {
            fail("min_sep_rl", "objects do not fit in the window");
        }
    }
}

} // namespace

BandPolicy BandRule::resolve(double spacing_rl) const
{
    if (eta) {
        return CoherenceThreshold{*eta};
    }
    if (half_spacing) {
        return FixedRadius{0.5 * spacing_rl, 0.5 * spacing_rl};
    }
    return FixedRadius{be_radius, lo_radius};
}

void validate_config(const ExperimentConfig& cfg)
{
    if (cfg.trials < 1) {
        field_error("trials", "must be >= 1");
    }
    if (cfg.algorithms.empty()) {
        field_error("algorithms", "must list at least one algorithm");
    }
    for (const std::string& name : cfg.algorithms) {
        const AlgorithmInfo* info = nullptr;
        try {
            info = &find_algorithm(name);
        } catch (const std::invalid_argument&) {
            field_error("algorithms", "unknown algorithm '" + name + "'");
        }
        if (info->frame_only && cfg.ensemble != Ensemble::frame) {
            field_error("algorithms", "'" + name + "' needs the frame ensemble");
        }
    }
    std::vector<std::string> sorted = cfg.algorithms;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        field_error("algorithms", "duplicate algorithm name");
    }
    if (std::find(sweep_variables.begin(), sweep_variables.end(), cfg.sweep_variable) ==
        sweep_variables.end()) {
        field_error("sweep.variable", "must be one of dynamic_range, noise_level, N, "
                                      "min_sep_rl, F");
    }
    if (cfg.sweep_values.empty()) {
        field_error("sweep.values", "must not be empty");
    }
    if (cfg.band.eta && !(*cfg.band.eta > 0.0 && *cfg.band.eta < 1.0)) {
        field_error("band.eta", "must lie in (0, 1)");
    }
    if (!cfg.band.eta && !cfg.band.half_spacing &&
        !(cfg.band.be_radius > 0.0 && cfg.band.lo_radius > 0.0)) {
        field_error("band", "radii must be > 0");
    }
    if (cfg.ensemble == Ensemble::offgrid && cfg.placement != Placement::random) {
        field_error("placement", "offgrid scenes support random placement only");
    }
    if (cfg.l1.lasso_max_iters < 1 || cfg.l1.bp.max_iters < 1) {
        field_error("l1", "iteration limits must be >= 1");
    }
    if (!(cfg.l1.lasso_tol > 0.0) || !(cfg.l1.bp.tol > 0.0) || !(cfg.l1.bp.rho > 0.0)) {
        field_error("l1", "tolerances and rho must be > 0");
    }
    const bool integral = cfg.sweep_variable == "N" || cfg.sweep_variable == "F";
    for (double v : cfg.sweep_values) {
        if (integral && (!is_integer(v) || v < 1.0)) {
            field_error("sweep.values", "values of " + cfg.sweep_variable +
                                            " must be positive integers");
        }
        validate_point(at_sweep_point(cfg, v),
                       " (at " + cfg.sweep_variable + " = " + format_double(v) + ")");
    }
}

ExperimentConfig parse_config(const Json& j)
{
    if (!j.is_object()) {
        throw std::invalid_argument("config: top level must be a JSON object");
    }
    static const std::vector<std::string> known = {
        "name", "description", "ensemble", "placement", "N", "R", "F", "s",
        "min_sep_rl", "dynamic_range", "noise_level", "frame_sigma", "band",
        "algorithms", "sweep", "trials", "base_seed", "record_timing", "l1"};
    for (const auto& item : j.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            field_error(item.key(), "unknown field");
        }
    }

    ExperimentConfig c;
    c.name = read<std::string>(j, "name", c.name);

    const auto ens = read<std::string>(j, "ensemble", "spectral");
    if (ens == "spectral") {
        c.ensemble = Ensemble::spectral;
    } else if (ens == "frame") {
        c.ensemble = Ensemble::frame;
    } else if (ens == "offgrid") {
        c.ensemble = Ensemble::offgrid;
    } else {
        field_error("ensemble", "must be spectral, frame or offgrid");
    }
    const auto place = read<std::string>(j, "placement", "random");
    if (place == "random") {
        c.placement = Placement::random;
    } else if (place == "consecutive") {
        c.placement = Placement::consecutive;
    } else {
        field_error("placement", "must be random or consecutive");
    }

    c.N  = read<Index>(j, "N", c.N);
    c.R  = read<double>(j, "R", c.R);
    c.F  = read<int>(j, "F", c.F);
    c.s  = read<int>(j, "s", c.s);
    c.min_sep_rl    = read<double>(j, "min_sep_rl", c.min_sep_rl);
    c.dynamic_range = read<double>(j, "dynamic_range", c.dynamic_range);
    c.noise_level   = read<double>(j, "noise_level", c.noise_level);
    c.frame_sigma   = read<double>(j, "frame_sigma", c.frame_sigma);
    c.trials        = read<int>(j, "trials", c.trials);
    c.base_seed     = read<std::uint64_t>(j, "base_seed", c.base_seed);
    c.record_timing = read<bool>(j, "record_timing", c.record_timing);
    c.algorithms    = read<std::vector<std::string>>(j, "algorithms", {});

    if (j.contains("band")) {
        const Json& b = j.at("band");
        if (!b.is_object()) {
            field_error("band", "must be an object");
        }
        for (const auto& item : b.items()) {
            const std::string& k = item.key();
            if (k != "eta" && k != "be_radius" && k != "lo_radius" && k != "half_spacing") {
                field_error("band." + k, "unknown field");
            }
        }
        if (b.contains("eta")) {
            c.band.eta = read<double>(b, "eta", 0.0);
        }
        c.band.be_radius    = read<double>(b, "be_radius", c.band.be_radius);
        c.band.lo_radius    = read<double>(b, "lo_radius", c.band.lo_radius);
        c.band.half_spacing = read<bool>(b, "half_spacing", false);
    }
    if (!j.contains("sweep") || !j.at("sweep").is_object()) {
        field_error("sweep", "required object with 'variable' and 'values'");
    }
    const Json& sw = j.at("sweep");
    if (!sw.contains("variable")) {
        field_error("sweep.variable", "required");
    }
    c.sweep_variable = read<std::string>(sw, "variable", "");
    c.sweep_values   = read<std::vector<double>>(sw, "values", {});

    if (j.contains("l1")) {
        const Json& l = j.at("l1");
        if (!l.is_object()) {
            field_error("l1", "must be an object");
        }
        static const std::vector<std::string> l1_keys = {
            "lasso_max_iters", "lasso_tol", "bp_max_iters", "bp_tol", "bp_rho"};
        for (const auto& item : l.items()) {
            if (std::find(l1_keys.begin(), l1_keys.end(), item.key()) == l1_keys.end()) {
                field_error("l1." + item.key(), "unknown field");
            }
        }
        c.l1.lasso_max_iters = read<int>(l, "lasso_max_iters", c.l1.lasso_max_iters);
        c.l1.lasso_tol       = read<double>(l, "lasso_tol", c.l1.lasso_tol);
        c.l1.bp.max_iters    = read<int>(l, "bp_max_iters", c.l1.bp.max_iters);
        c.l1.bp.tol          = read<double>(l, "bp_tol", c.l1.bp.tol);
        c.l1.bp.rho          = read<double>(l, "bp_rho", c.l1.bp.rho);
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file '" + path.string() + "'");
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("config '" + path.string() + "' is not valid JSON: " +
                                    e.what());
    }
    if (j.is_object() && !j.contains("name")) {
        j["name"] = path.stem().string();
    }
    return parse_config(j);
}

Json config_to_json(const ExperimentConfig& c)
{
    Json band;
    if (c.band.eta) {
        band["eta"] = *c.band.eta;
    } else if (c.band.half_spacing) {
        band["half_spacing"] = true;
    } else {
        band["be_radius"] = c.band.be_radius;
        band["lo_radius"] = c.band.lo_radius;
    }
    return {{"name", c.name},
            {"ensemble", ensemble_name(c.ensemble)},
            {"placement", placement_name(c.placement)},
            {"N", c.N},
            {"R", c.R},
            {"F", c.F},
            {"s", c.s},
            {"min_sep_rl", c.min_sep_rl},
            {"dynamic_range", c.dynamic_range},
            {"noise_level", c.noise_level},
            {"frame_sigma", c.frame_sigma},
            {"band", band},
            {"algorithms", c.algorithms},
            {"sweep", {{"variable", c.sweep_variable}, {"values", c.sweep_values}}},
            {"trials", c.trials},
            {"base_seed", c.base_seed},
            {"record_timing", c.record_timing},
            {"l1",
             {{"lasso_max_iters", c.l1.lasso_max_iters},
              {"lasso_tol", c.l1.lasso_tol},
              {"bp_max_iters", c.l1.bp.max_iters},
              {"bp_tol", c.l1.bp.tol},
              {"bp_rho", c.l1.bp.rho}}}};
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial)
{
    return splitmix64(base ^ splitmix64(trial));
}

// ---------------------------------------------------------------------------
// Algorithm registry
// ---------------------------------------------------------------------------

namespace
{

ArmOutput wrap(RecoveryResult r)
{
    return ArmOutput{std::move(r), std::nullopt};
}

L1Config lasso_config(const TrialContext& c, LambdaRule rule)
{
    L1Config cfg;
    cfg.rule      = rule;
    cfg.sigma     = c.noise_sigma;
    cfg.max_iters = c.l1.lasso_max_iters;
    cfg.tol       = c.l1.lasso_tol;
    return cfg;
}

Index capped(Index k, const TrialContext& c)
{
    return std::min<Index>(k, c.A.rows());
}

std::vector<AlgorithmInfo> build_registry()
{
    std::vector<AlgorithmInfo> r;
    auto add = [&](std::string name, std::string desc,
                   std::function<ArmOutput(const TrialContext&)> fn, bool frame_only = false) {
        r.push_back({std::move(name), std::move(desc), frame_only, std::move(fn)});
    };

    add("omp", "orthogonal matching pursuit, s picks",
        [](const TrialContext& c) { return wrap(omp(c.A, c.b, c.sparsity)); });
    add("omp_2s", "orthogonal matching pursuit, 2s picks", [](const TrialContext& c) {
        return wrap(omp(c.A, c.b, capped(2 * c.sparsity, c)));
    });
    add("omp_5s", "orthogonal matching pursuit, 5s picks", [](const TrialContext& c) {
        return wrap(omp(c.A, c.b, capped(5 * c.sparsity, c)));
    });
    add("bomp", "band-excluded OMP",
        [](const TrialContext& c) { return wrap(bomp(c.A, c.b, c.sparsity, c.bands)); });
    add("loomp", "OMP with local optimisation",
        [](const TrialContext& c) { return wrap(loomp(c.A, c.b, c.sparsity, c.bands)); });
    add("bloomp", "band-excluded, locally optimised OMP",
        [](const TrialContext& c) { return wrap(bloomp(c.A, c.b, c.sparsity, c.bands)); });
    add("bmt", "band-excluded matched thresholding",
        [](const TrialContext& c) { return wrap(bmt(c.A, c.b, c.sparsity, c.bands)); });
    add("sp", "subspace pursuit",
        [](const TrialContext& c) { return wrap(sp(c.A, c.b, c.sparsity)); });
    add("cosamp", "CoSaMP",
        [](const TrialContext& c) { return wrap(cosamp(c.A, c.b, c.sparsity)); });
    add("bsp", "band-excluded subspace pursuit", [](const TrialContext& c) {
        return wrap(be_only_variant(c.A, c.b, c.sparsity, c.bands, BandExcludedKind::bsp));
    });
    add("bcosamp", "band-excluded CoSaMP", [](const TrialContext& c) {
        return wrap(be_only_variant(c.A, c.b, c.sparsity, c.bands, BandExcludedKind::bcosamp));
    });
    add("bniht", "band-excluded normalised iterative hard thresholding",
        [](const TrialContext& c) {
            return wrap(be_only_variant(c.A, c.b, c.sparsity, c.bands, BandExcludedKind::bniht));
        });
    add("blosp", "band-excluded, locally optimised subspace pursuit",
        [](const TrialContext& c) { return wrap(blosp(c.A, c.b, c.sparsity, c.bands)); });
    add("blocosamp", "band-excluded, locally optimised CoSaMP",
        [](const TrialContext& c) { return wrap(blocosamp(c.A, c.b, c.sparsity, c.bands)); });
    add("bloiht", "band-excluded, locally optimised iterative hard thresholding",
        [](const TrialContext& c) { return wrap(bloiht(c.A, c.b, c.sparsity, c.bands)); });
    add("bp", "basis pursuit (denoising), raw output", [](const TrialContext& c) {
        const L1Solution z = basis_pursuit(c.op, c.b, c.noise_norm, c.l1.bp);
        return wrap(dense_result(z.coefficients, c.A, c.b, c.bands.grid()));
    });
    add("bp_blot", "basis pursuit followed by BLOT", [](const TrialContext& c) {
        const L1Solution z = basis_pursuit(c.op, c.b, c.noise_norm, c.l1.bp);
        return wrap(blot_postprocess(z.coefficients, c.A, c.b, c.sparsity, c.bands));
    });
    add("lasso", "Lasso with lambda = 0.5 sqrt(ln M), raw output", [](const TrialContext& c) {
        const L1Solution z = lasso(c.op, c.b, lasso_config(c, LambdaRule::half_sqrt_log_m));
        return wrap(dense_result(z.coefficients, c.A, c.b, c.bands.grid()));
    });
    add("lasso_blot_half", "Lasso (lambda = 0.5 sqrt(ln M)) followed by BLOT",
        [](const TrialContext& c) {
            const L1Solution z =
                lasso(c.op, c.b, lasso_config(c, LambdaRule::half_sqrt_log_m));
            return wrap(blot_postprocess(z.coefficients, c.A, c.b, c.sparsity, c.bands));
        });
    add("lasso_blot_sqrt2", "Lasso (lambda = sqrt(2 ln M)) followed by BLOT",
        [](const TrialContext& c) {
            const L1Solution z = lasso(c.op, c.b, lasso_config(c, LambdaRule::sqrt_2_log_m));
            return wrap(blot_postprocess(z.coefficients, c.A, c.b, c.sparsity, c.bands));
        });
    add(
        "analysis_bp", "analysis-form basis pursuit over signals (frame only)",
        [](const TrialContext& c) {
            const L1Solution z =
                analysis_bp(c.frame->phi, c.frame->psi, c.b, c.noise_norm, c.l1.bp);
            ArmOutput out;
            out.result.estimate.grid = c.bands.grid();
            out.result.estimate.amplitudes.resize(0);
            out.result.residual = c.b - c.frame->phi * z.coefficients;
            out.result.iterations = z.iterations;
            out.result.termination = z.converged ? Termination::residual_below_eps
                                                 : Termination::max_iterations;
            out.signal = z.coefficients;
            return out;
        },
        true);
    return r;
}

} // namespace

const std::vector<AlgorithmInfo>& algorithm_registry()
{
    static const std::vector<AlgorithmInfo> registry = build_registry();
    return registry;
}

const AlgorithmInfo& find_algorithm(const std::string& name)
{
    for (const AlgorithmInfo& info : algorithm_registry()) {
        if (info.name == name) {
            return info;
        }
    }
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

namespace
{

SparseSignal draw_objects(const ExperimentConfig& c, const GridSpec& grid, Rng& rng)
{
    if (c.placement == Placement::consecutive) {
        return make_consecutive_objects(c.s, c.min_sep_rl, c.dynamic_range, grid, rng);
    }
    return make_objects(c.s, c.dynamic_range, c.min_sep_rl, grid, rng);
}

struct Instance
{
    SensingMatrix sensing;              ///< spectral / offgrid
    std::optional<FrameModel> frame;
    CVector b;
    CVector y;                          ///< frame signal Psi x
    SparseSignal truth;                 ///< on-grid truth or gridded scene
    std::optional<OffGridScene> scene;
    double noise_norm  = 0.0;
    double noise_sigma = 0.0;

    const CMatrix& A() const { return frame ? frame->A : sensing.matrix; }
};

Instance draw_instance(const ExperimentConfig& c, std::uint64_t seed)
{
    Rng rng(seed);
    const GridSpec grid{c.F, c.R};
    Instance inst;
    switch (c.ensemble) {
    case Ensemble::spectral: {
        inst.sensing = spectral_matrix(c.N, grid, rng);
        inst.truth   = draw_objects(c, grid, rng);
        const CVector clean = inst.sensing.matrix * inst.truth.dense();
        const NoiseDraw n = relative_noise(clean, c.noise_level, rng);
        inst.b           = clean + n.noise;
        inst.noise_norm  = n.noise.norm();
        inst.noise_sigma = n.sigma;
        break;
    }
    case Ensemble::offgrid: {
        inst.sensing = spectral_matrix(c.N, grid, rng);
        inst.scene   = make_offgrid_scene(c.s, c.dynamic_range, c.min_sep_rl, c.R, rng);
        SynthesizedData d = synthesize_data(*inst.scene, inst.sensing.times, grid,
                                            c.noise_level, rng);
        inst.b           = std::move(d.b);
        inst.truth       = std::move(d.x_nearest);
        inst.noise_norm  = d.total_error.norm();
        inst.noise_sigma = d.sigma;
        break;
    }
    case Ensemble::frame: {
        const double sigma =
            c.frame_sigma < 0.0 ? 1.0 / std::sqrt(static_cast<double>(c.N)) : c.frame_sigma;
        inst.frame = frame_model(c.N, static_cast<Index>(c.R), c.F, sigma, rng);
        inst.truth = draw_objects(c, grid, rng);
        inst.y = inst.frame->psi * inst.truth.dense();
        const CVector clean = inst.frame->phi * inst.y;
        const NoiseDraw n = relative_noise(clean, c.noise_level, rng);
        inst.b           = clean + n.noise;
        inst.noise_norm  = n.noise.norm();
        inst.noise_sigma = n.sigma;
        break;
    }
    }
    return inst;
}

} // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, double sweep_value, int trial)
{
    const ExperimentConfig c = at_sweep_point(cfg, sweep_value);
    TrialRecord rec;
    rec.sweep_value = sweep_value;
    rec.trial = trial;
    rec.seed  = trial_seed(c.base_seed, static_cast<std::uint64_t>(trial));

    const Instance inst = draw_instance(c, rec.seed);
    const CMatrix& A = inst.A();
    const GridSpec grid{c.F, c.R};
    const BandPolicy policy = c.band.resolve(c.min_sep_rl);
    const BandIndex bands = inst.frame ? build_band_index(A, grid, policy, false)
                                       : build_band_index(inst.sensing, policy);

    std::optional<SpectralOperator> fast;
    std::optional<DenseOperator> dense;
    const LinearOperator* op = nullptr;
    if (inst.frame) {
        op = &dense.emplace(A);
    } else {
        op = &fast.emplace(inst.sensing);
    }
    rec.instance_hash = instance_hash(A, inst.b);

    const TrialContext ctx{A,
                           *op,
                           inst.b,
                           static_cast<Index>(c.s),
                           bands,
                           inst.noise_norm,
                           inst.noise_sigma,
                           c.l1,
                           inst.frame ? &*inst.frame : nullptr};

    for (const std::string& name : c.algorithms) {
        const AlgorithmInfo& info = find_algorithm(name);
        const auto t0 = std::chrono::steady_clock::now();
        ArmOutput out = info.run(ctx);
        const auto t1 = std::chrono::steady_clock::now();
        // Solvers run without bands report index units; score on the instance grid.
        out.result.estimate.grid = bands.grid();

        TrialOutcome o = inst.scene ? score_trial(*inst.scene, inst.truth, out.result, inst.b)
                                    : score_trial(inst.truth, out.result, inst.b);
        if (inst.frame) {
            const CVector y_hat =
                out.signal ? *out.signal : CVector(inst.frame->psi * out.result.estimate.dense());
            o.rel_signal_error = relative_error(y_hat, inst.y);
        }
        rec.outcomes.push_back(o);
        rec.runtime_ms.push_back(
            c.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0);
    }
    return rec;
}

namespace
{

// Values above the default ceiling run at the ceiling unless full range is on.
std::vector<double> effective_values(const ExperimentConfig& cfg, bool full_range,
                                     std::vector<double>& capped_out)
{
    std::vector<double> out;
    for (double v : cfg.sweep_values) {
        double e = v;
        if (cfg.sweep_variable == "dynamic_range" && !full_range &&
            v > default_max_dynamic_range) {
            e = default_max_dynamic_range;
            capped_out.push_back(v);
        }
        if (std::find(out.begin(), out.end(), e) == out.end()) {
            out.push_back(e);
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v)
{
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    return sum / static_cast<double>(v.size());
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& cfg_in, const RunOptions& opt)
{
    validate_config(cfg_in);
    if (opt.workers < 1) {
        throw std::invalid_argument("run_sweep: workers must be >= 1");
    }
    SweepResult result;
    result.config = cfg_in;
    ExperimentConfig& cfg = result.config;
    if (!opt.full_range && cfg.dynamic_range > default_max_dynamic_range) {
        result.dropped_values.push_back(cfg.dynamic_range);
        cfg.dynamic_range = default_max_dynamic_range;
    }
    const std::vector<double> values = effective_values(cfg, opt.full_range, result.dropped_values);

    const std::size_t trials = static_cast<std::size_t>(cfg.trials);
    const std::size_t jobs = values.size() * trials;
    std::vector<TrialRecord> records(jobs);
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs || failed.load()) {
                return;
            }
            try {
                records[j] = run_trial(cfg, values[j / trials], static_cast<int>(j % trials));
            } catch (...) {
                errors[j] = std::current_exception();
                failed.store(true);
            }
        }
    };
    const int workers = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(opt.workers), std::max<std::size_t>(jobs, 1)));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread& t : pool) {
        t.join();
    }
    for (const std::exception_ptr& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    // Aggregation walks records in job order, so the result ignores scheduling.
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
            SweepRow row;
            row.sweep_var   = cfg.sweep_variable;
            row.sweep_value = values[vi];
            row.algorithm   = cfg.algorithms[a];
            row.trials      = cfg.trials;
            std::vector<double> bottleneck, residual, coeff, signal, runtime;
            int successes = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                const TrialRecord& rec = records[vi * trials + t];
                const TrialOutcome& o = rec.outcomes[a];
                successes += o.success ? 1 : 0;
                if (std::isfinite(o.bottleneck_rl)) {
                    bottleneck.push_back(o.bottleneck_rl);
                }
                residual.push_back(o.rel_residual);
                coeff.push_back(o.rel_coeff_error);
                if (!std::isnan(o.rel_signal_error)) {
                    signal.push_back(o.rel_signal_error);
                }
                runtime.push_back(rec.runtime_ms[a]);
            }
            row.success_rate        = static_cast<double>(successes) / static_cast<double>(trials);
            row.mean_bottleneck_rl  = mean_of(bottleneck);
            row.mean_rel_residual   = mean_of(residual);
            row.mean_rel_coeff_err  = mean_of(coeff);
            row.mean_rel_signal_err = mean_of(signal);
            row.mean_runtime_ms     = mean_of(runtime);
            result.rows.push_back(std::move(row));
        }
    }
    result.records = std::move(records);
    return result;
}

SweepResult run_resolution_experiment(ExperimentConfig cfg, const RunOptions& opt)
{
    cfg.placement = Placement::consecutive;
    cfg.sweep_variable = "min_sep_rl";
    cfg.band = BandRule{};
    cfg.band.half_spacing = true;
    for (double h : cfg.sweep_values) {
        if (h <= 1.0 / cfg.F) {
            field_error("sweep.values", "spacing " + format_double(h) +
                                            " RL is not above the grid spacing 1/F");
        }
    }
    return run_sweep(cfg, opt);
}

SweepResult run_frame_experiment(ExperimentConfig cfg, const RunOptions& opt)
{
    cfg.ensemble = Ensemble::frame;
    return run_sweep(cfg, opt);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string to_csv(const SweepResult& result)
{
    std::ostringstream os;
    os << csv_header << '\n';
    for (const SweepRow& r : result.rows) {
        os << r.sweep_var << ',' << format_double(r.sweep_value) << ',' << r.algorithm << ','
           << r.trials << ',' << format_double(r.success_rate) << ','
           << format_double(r.mean_bottleneck_rl) << ',' << format_double(r.mean_rel_residual)
           << ',' << format_double(r.mean_rel_coeff_err) << ','
           << format_double(r.mean_rel_signal_err) << ',' << format_double(r.mean_runtime_ms)
           << '\n';
    }
    return os.str();
}

Json meta_json(const SweepResult& result)
{
    const ExperimentConfig& c = result.config;
    Json trials = Json::array();
    for (const TrialRecord& rec : result.records) {
        Json outcomes = Json::object();
        for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
            Json o = to_json(rec.outcomes[a]);
            outcomes[c.algorithms[a]] = std::move(o);
        }
        std::ostringstream hash;
        hash << std::hex << rec.instance_hash;
        trials.push_back({{"sweep_value", rec.sweep_value},
                          {"trial", rec.trial},
                          {"seed", rec.seed},
                          {"instance_hash", hash.str()},
                          {"outcomes", std::move(outcomes)}});
    }
    std::vector<double> run_values;
    for (const SweepRow& r : result.rows) {
        if (run_values.empty() || run_values.back() != r.sweep_value) {
            run_values.push_back(r.sweep_value);
        }
    }
    return {{"tool", "bandex"},
            {"version", BANDEX_VERSION},
            {"config", config_to_json(c)},
            {"seed_rule", "trial seed = splitmix64(base_seed ^ splitmix64(trial))"},
            {"sweep_values_run", run_values},
            {"capped_values", result.dropped_values},
            {"csv_rows", result.rows.size()},
            {"trials", std::move(trials)}};
}

std::filesystem::path write_outputs(const SweepResult& result,
                                    const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir.string() +
                                 "': " + ec.message());
    }
    const std::string stem = result.config.name;
    const auto csv_path  = dir / (stem + ".csv");
    const auto meta_path = dir / (stem + ".meta.json");
    {
        std::ofstream out(csv_path, std::ios::binary);
        out << to_csv(result);
        if (!out) {
            throw std::runtime_error("cannot write '" + csv_path.string() + "'");
        }
    }
    {
        std::ofstream out(meta_path, std::ios::binary);
        out << meta_json(result).dump(2) << '\n';
        if (!out) {
            throw std::runtime_error("cannot write '" + meta_path.string() + "'");
        }
    }
    return csv_path;
}

std::string coherence_csv(const ExperimentConfig& cfg, double max_sep_rl)
{
    validate_config(cfg);
    const ExperimentConfig c = at_sweep_point(cfg, cfg.sweep_values.front());
    const Instance inst = draw_instance(c, trial_seed(c.base_seed, 0));
    SensingMatrix view;
    if (inst.frame) {
        view.matrix = inst.frame->A;
        view.grid = GridSpec{c.F, c.R};
    } else {
        view = inst.sensing;
    }
    std::ostringstream os;
    os << "separation_rl,coherence\n";
    for (const auto& [sep, mu] : coherence_profile(view, max_sep_rl)) {
        os << format_double(sep) << ',' << format_double(mu) << '\n';
    }
    return os.str();
}

std::string analysis_profile_csv(const ExperimentConfig& cfg)
{
    validate_config(cfg);
    if (cfg.ensemble != Ensemble::frame) {
        throw std::invalid_argument("analysis profile needs the frame ensemble");
    }
    const ExperimentConfig c = at_sweep_point(cfg, cfg.sweep_values.front());
    const Instance inst = draw_instance(c, trial_seed(c.base_seed, 0));
    const CVector coeffs = inst.frame->psi.adjoint() * inst.y;
    std::vector<double> mags(static_cast<std::size_t>(coeffs.size()));
    for (Index i = 0; i < coeffs.size(); ++i) {
        mags[static_cast<std::size_t>(i)] = std::abs(coeffs(i));
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    std::ostringstream os;
    os << "rank,magnitude\n";
    for (std::size_t i = 0; i < mags.size(); ++i) {
        os << (i + 1) << ',' << format_double(mags[i]) << '\n';
    }
    return os.str();
}

} // namespace bandex
