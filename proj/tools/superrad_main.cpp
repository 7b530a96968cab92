// Command-line experiment runner.
//
// Exit codes: 0 success, 2 config error, 3 capacity error, 4 numerical
// failure.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "superrad/experiments.hpp"
#include "superrad/liouville.hpp"
#include "superrad/params.hpp"
#include "superrad/types.hpp"

using namespace superrad;

namespace {

int worst_exit_code(const Manifest& m) {
    if (m.complete) return 0;
    int code = 4;
    for (const auto& s : m.incomplete_outputs) {
        if (s.find("[config]") != std::string::npos) code = std::max(code, 2);
        if (s.find("[capacity]") != std::string::npos) return 3;
    }
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"superrad: steady-state superradiance trajectory simulator"};

    std::string experiment, params_path, out_dir;
    uint64_t seed = 0;
    bool have_seed = false, no_plots = false, validate_only = false;
    int threads = 0;

    app.add_option("--experiment", experiment,
                   "experiment id: fig3 | fig4 | fig5a | fig5b | fig5c | sweep "
                   "| custom (overrides the config file)");
    app.add_option("--params", params_path,
                   "experiment config file (key = value, schema_version "
                   "mandatory)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed override");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker cap for trajectory ensembles");
    app.add_flag("--no-plots", no_plots, "skip SVG rendering");
    app.add_flag("--validate", validate_only,
                 "print the validity report and regime for the config, then "
                 "exit");
    std::string oracle_table;
    app.add_option("--oracle-table", oracle_table,
                   "write the dense reference moment table "
                   "(N in {1..4}, w/Gamma_c in {2,5,20}) to this CSV and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    have_seed = seed_opt->count() > 0;

    try {
        if (!oracle_table.empty()) {
            write_moment_table(oracle_table, {1, 2, 3, 4}, {2.0, 5.0, 20.0});
            std::printf("moment table written to %s\n", oracle_table.c_str());
            return 0;
        }
        ExperimentConfig cfg;
        if (!params_path.empty()) cfg = load_experiment_config_file(params_path);
        if (!experiment.empty()) cfg.experiment = experiment;
        if (cfg.experiment.empty())
            throw ConfigError("no experiment selected: pass --experiment or a "
                              "--params file");
        if (have_seed) cfg.master_seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads > 0) cfg.threads = threads;
        if (no_plots) cfg.no_plots = true;

        if (validate_only) {
            const double w = cfg.w_over_gc > 0 ? cfg.w_over_gc : 1.0;
            SystemParams p =
                SystemParams::adiabatic(cfg.n_atoms, cfg.gamma_c, w * cfg.gamma_c);
            const ValidityReport rep = validity_report(p);
            std::printf("N = %d, w/Gamma_c = %g\n", cfg.n_atoms, w);
            std::printf("cooperativity C      : %s\n",
                        rep.cooperativity_infinite
                            ? "infinite (free-space decay neglected)"
                            : std::to_string(rep.cooperativity).c_str());
            std::printf("N*C                  : %g\n",
                        rep.collective_cooperativity);
            std::printf("kappa/(N*C*gamma)    : %g\n", rep.bad_cavity_ratio);
            std::printf("collective coupling  : %s\n",
                        rep.collective_strong_coupling ? "ok" : "violated");
            std::printf("bad-cavity condition : %s\n",
                        rep.bad_cavity ? "ok" : "violated");
            std::printf("regime               : %s\n",
                        regime_name(classify_regime(w, cfg.n_atoms, 1.0)));
            return 0;
        }

        const Manifest manifest = run_experiment(cfg);
        std::printf("experiment %s: %zu outputs under %s (wall %.1f s)%s\n",
                    manifest.experiment.c_str(), manifest.outputs.size(),
                    manifest.directory.c_str(), manifest.wall_time_s,
                    manifest.complete ? "" : " [INCOMPLETE]");
        for (const auto& s : manifest.incomplete_outputs)
            std::fprintf(stderr, "incomplete: %s\n", s.c_str());
        return worst_exit_code(manifest);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CapacityError& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
