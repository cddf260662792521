// bandex: run benchmark sweeps and dump diagnostics from JSON configs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include <bandex/bench.hpp>

namespace
{

int workers_from_env()
{
    const char* env = std::getenv("BANDEX_WORKERS");
    if (!env || !*env) {
        return 1;
    }
    try {
        std::size_t used = 0;
        const int w = std::stoi(env, &used);
        if (used != std::string(env).size() || w < 1) {
            throw std::invalid_argument("");
        }
        return w;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("BANDEX_WORKERS must be a positive integer, got '") +
                                    env + "'");
    }
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Band-excluded sparse recovery benchmark"};
    app.set_version_flag("--version", BANDEX_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "results";
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool full_range = false;
    bool no_timing  = false;

    auto* run = app.add_subcommand("run", "execute a sweep and write <name>.csv and <name>.meta.json");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override the base seed");
    run->add_option("--workers", workers, "worker threads (default: $BANDEX_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    run->add_flag("--full-range", full_range, "run dynamic ranges above 1e8 as given");
    run->add_flag("--no-timing", no_timing, "write 0 for runtimes so output is byte-stable");

    std::string coh_out;
    double max_sep = 5.0;
    auto* coh = app.add_subcommand("coherence", "coherence versus separation for the first draw");
    coh->add_option("config", config_path, "experiment config (JSON)")->required();
    coh->add_option("--max-sep", max_sep, "largest separation in RL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    coh->add_option("-o,--output", coh_out, "CSV file (default: stdout)");

    std::string prof_out;
    auto* prof = app.add_subcommand("profile", "sorted |Psi^* y| for the first frame trial");
    prof->add_option("config", config_path, "frame experiment config (JSON)")->required();
    prof->add_option("-o,--output", prof_out, "CSV file (default: stdout)");

    auto* list = app.add_subcommand("list-algorithms", "print registered algorithm names");
    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config_path, "experiment config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& info : bandex::algorithm_registry()) {
                std::cout << info.name << '\t' << info.description << '\n';
            }
            return 0;
        }
        bandex::ExperimentConfig cfg = bandex::load_config(config_path);
        if (*validate) {
            std::cout << config_path << ": ok (" << cfg.sweep_values.size() << " values x "
                      << cfg.algorithms.size() << " algorithms x " << cfg.trials
                      << " trials)\n";
            return 0;
        }
        if (*coh) {
            emit(bandex::coherence_csv(cfg, max_sep), coh_out);
            return 0;
        }
        if (*prof) {
            emit(bandex::analysis_profile_csv(cfg), prof_out);
            return 0;
        }

        if (trials) {
            cfg.trials = *trials;
        }
        if (seed) {
            cfg.base_seed = *seed;
        }
        if (no_timing) {
            cfg.record_timing = false;
        }
        bandex::RunOptions opt;
        opt.workers    = workers ? *workers : workers_from_env();
        opt.full_range = full_range;
        // Fail before the sweep, not after it.
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec) {
            throw std::runtime_error("cannot create output directory '" + out_dir +
                                     "': " + ec.message());
        }
        const bandex::SweepResult result = bandex::run_sweep(cfg, opt);
        const auto csv = bandex::write_outputs(result, out_dir);
        for (double v : result.dropped_values) {
            std::cerr << "note: dynamic range " << bandex::format_double(v)
                      << " run at 1e8 (pass --full-range to keep it)\n";
        }
        std::cout << csv.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "bandex: " << e.what() << '\n';
        return 2;
    }
}
