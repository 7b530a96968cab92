// Experiment runner: named parameter bundles reproducing the figure-style
// outputs (CSV + SVG) plus a hash-carrying run manifest.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "superrad/params.hpp"
#include "superrad/types.hpp"

namespace superrad {

/// One run = one experiment id + knobs.  Everything an output depends on is
/// in here (plus the master seed), so outputs are pure functions of the
/// config.  Zero-valued knobs mean "use the experiment's documented default".
struct ExperimentConfig {
    std::string experiment;  ///< fig3 | fig4 | fig5a | fig5b | fig5c | sweep | custom
    int n_atoms = 10;
    double gamma_c = 1.0;
    double w_over_gc = 0.0;  ///< fig5*/custom; fig3 uses its documented grid
    int n_trajectories = 0;
    double duration = 0.0;   ///< units of 1/gamma_c
    double burn_in = -1.0;   ///< < 0: default
    double bin_width = 0.0;  ///< 0: regime default
    int n_lags = 0;          ///< 0: regime default
    double sample_stride = 0.0;
    uint64_t master_seed = 20260808;
    std::string out_dir = "out";
    int threads = 0;
    bool no_plots = false;
    std::string model = "adiabatic"; ///< custom only: adiabatic | full
    int photon_cutoff = 0;           ///< custom full model
    double kappa_over_gc = 0.0;      ///< custom full model; 0: 1000*N
    std::string integrator = "auto";
};

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

ExperimentConfig load_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config_file(const std::string& path);

/// The documented fig3 Monte-Carlo pump grid, in units of Gamma_c.
const std::vector<double>& fig3_pump_grid();

struct ManifestEntry {
    std::string path; ///< relative to the manifest directory
    std::string kind; ///< g2_tau | g2_vs_w | sweep | sweep_fig4 | records | plot
    uint64_t fnv1a64 = 0;
    long n_rows = 0;
};

struct Manifest {
    int schema_version = kManifestSchemaVersion;
    std::string experiment;
    uint64_t master_seed = 0;
    uint64_t config_hash = 0;
    std::string library_version;
    double wall_time_s = 0.0;
    bool complete = true;
    std::vector<ManifestEntry> outputs;
    std::vector<std::string> incomplete_outputs; ///< error strings per failure
    std::string directory; ///< set on load/run; not serialized
};

/// Runs the configured experiment, writing CSVs, raw jump records and the
/// manifest (manifest.json) under cfg.out_dir; renders plots unless
/// no_plots.  Partial failures are recorded in the manifest rather than
/// aborting remaining outputs.
Manifest run_experiment(const ExperimentConfig& cfg);

Manifest read_manifest_file(const std::string& path);

/// Renders every CSV output of the manifest to an SVG alongside it.
/// Missing CSVs are reported (returned list) while the rest still render.
std::vector<std::string> emit_plots(const Manifest& manifest);

/// FNV-1a 64-bit content hash used in manifests.
uint64_t fnv1a64(const std::string& bytes);
uint64_t fnv1a64_file(const std::string& path);

} // namespace superrad
