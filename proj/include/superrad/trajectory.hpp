// Quantum-jump (Monte-Carlo wavefunction) trajectory propagation and
// reproducible parallel ensembles.
//
// Between jumps the state evolves under H_eff = H - (i/2) sum_k L_k^dag L_k;
// a jump fires when the squared norm since the last jump crosses a uniform
// threshold r in (0,1).  The crossing time is refined by bisection to
// relative tolerance 1e-9, the channel is drawn with probability
// proportional to ||L_k psi||^2, and the state collapses to L_k psi
// (renormalized).
//
// Three interchangeable no-jump propagation backends:
//   rk4      - fixed-step classical Runge-Kutta on the unnormalized state,
//              step 0.01 / (spectral bound of sum L^dag L); the reference.
//   spectral - exact semigroup via one eigendecomposition of the real
//              symmetric damping matrix; adiabatic model (H = 0) only.
//   expm     - exact semigroup via precomputed matrix exponentials on a
//              dyadic time lattice.
// All backends implement the same norm-threshold contract and agree on the
// produced records up to integrator accuracy (tested).
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "superrad/operators.hpp"
#include "superrad/rng.hpp"
#include "superrad/types.hpp"

namespace superrad {

/// Normalized state of one trajectory at a point in time.
struct StateVector {
    Vec amplitudes;
    double time = 0.0;
};

/// One recorded jump event.
struct JumpEvent {
    double time = 0.0;
    uint32_t channel = 0; ///< index into channel_labels
};

/// Time-stamped photon/pump record of a single trajectory.
struct JumpRecord {
    std::vector<JumpEvent> events; ///< strictly increasing times
    double total_time = 0.0;
    double burn_in = 0.0; ///< events before this are transient; estimators drop them
    uint64_t seed = 0;
    ModelTag model_tag = ModelTag::Adiabatic;
    std::vector<std::string> channel_labels;
    SystemParams params;

    const std::string& label(const JumpEvent& e) const {
        return channel_labels.at(e.channel);
    }
    /// Count of events with the given label inside [from, to].
    std::size_t count_events(const std::string& label, double from, double to) const;
};

enum class Integrator { Auto, Rk4, Spectral, Expm };

const char* integrator_name(Integrator i);
Integrator integrator_from_name(const std::string& name);

struct EngineOptions {
    Integrator integrator = Integrator::Auto;
    double rk4_step_factor = 0.01;   ///< h = factor / rate_bound
    double sample_stride = 0.0;      ///< 0: engine picks; used by expm lattice
    Eigen::Index spectral_max_dim = 2048;
    Eigen::Index expm_max_dim = 256;
    double top_fock_tolerance = 1e-6; ///< full model: abort above this population
};

/// Named scalar observables evaluated on sampled states.  Built-in names:
///   s        2 <J_z>/N
///   p        pair-averaged Re <sigma_+ sigma_->
///   z2       pair-averaged <sigma_z sigma_z>
///   jpjm     <J+ J->
///   jppjmm   <J+ J+ J- J->
///   n_phot   <a^dag a>              (full model)
///   nn_phot  <a^dag a^dag a a>      (full model)
///   sz_1 ... sz_N   per-atom <sigma_z^(j)>
struct SampleSpec {
    double stride = 0.5;
    double burn_in = 0.0;
    std::vector<std::string> observables;
    bool store_traces = false;
};

struct TrajectoryResult {
    JumpRecord record;
    StateVector final_state;
    /// Post-burn-in time averages, one per requested observable.
    std::vector<double> observable_means;
    std::vector<long> observable_samples;
    /// Full series when store_traces is set; outer index = observable.
    std::vector<std::vector<double>> traces;
    std::vector<double> trace_times;
};

/// Shared, immutable propagation plan for one OperatorSet.  Thread-safe:
/// run() is const and carries no mutable state between calls.
class Engine {
  public:
    Engine(const OperatorSet& ops, const EngineOptions& opt = {});
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    TrajectoryResult run(const StateVector& init, double duration,
                         uint64_t seed, const SampleSpec* sampling = nullptr) const;

    Integrator integrator() const;
    double rk4_step() const;
    const OperatorSet& ops() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Single-shot convenience wrapper around Engine.
std::pair<JumpRecord, StateVector> run_trajectory(const OperatorSet& ops,
                                                  const StateVector& init,
                                                  double duration,
                                                  uint64_t seed,
                                                  const EngineOptions& opt = {});

struct EnsembleConfig {
    int n_trajectories = 1;
    double duration = 100.0;
    double burn_in = 10.0;
    uint64_t master_seed = 0;
    double sample_stride = 0.5;
    std::vector<std::string> observables;
    bool store_traces = false;
    int threads = 0; ///< 0: hardware concurrency
    std::optional<StateVector> initial_state; ///< default: all ground (x) vacuum
    EngineOptions engine;
};

struct ObservableStats {
    std::string name;
    std::vector<double> per_trajectory_mean;
    std::vector<long> per_trajectory_samples;
    double mean = 0.0;
    double std_error = 0.0; ///< across trajectories
};

struct EnsembleResult {
    std::vector<JumpRecord> records; ///< ordered by trajectory index
    std::vector<ObservableStats> observables;
    /// Sampled expectation series when store_traces is set:
    /// traces[trajectory][observable][sample] on the shared trace_times grid.
    std::vector<std::vector<std::vector<double>>> traces;
    std::vector<double> trace_times;
    uint64_t master_seed = 0;
    int n_trajectories = 0;
    double burn_in = 0.0;
    double duration = 0.0;

    const ObservableStats& observable(const std::string& name) const;
    bool has_observable(const std::string& name) const;
};

/// Independent trajectories with per-trajectory seeds
/// derive_stream_seed(master_seed, index); results are bit-identical for a
/// given (config, master_seed) regardless of the worker count.
EnsembleResult run_ensemble(const OperatorSet& ops, const EnsembleConfig& cfg);

/// Mean and standard error of the per-trajectory "cavity" event rate over
/// the post-burn-in window.
struct RateEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};
RateEstimate cavity_rate(const EnsembleResult& ensemble);

// --- record serialization ---------------------------------------------------
//
// Text format, one record per block, concatenable:
//   #jumprecord v1
//   #model adiabatic
//   #seed 42
//   #total_time 2.0000000000000000e+02
//   #burn_in 1.0000000000000000e+01
//   #params n_atoms=10 coupling=... kappa=... pump=... gamma_free=...
//           detuning=... photon_cutoff=...     (single line)
//   #channels cavity pump-1 ... pump-N
//   #events 1234
//   <time%.16e>\t<channel_label>               (one line per event)
//   #end
inline constexpr int kRecordSchemaVersion = 1;

void write_record(std::ostream& out, const JumpRecord& rec);
void write_records_file(const std::string& path, const std::vector<JumpRecord>& recs);
std::vector<JumpRecord> read_records(std::istream& in);
std::vector<JumpRecord> read_records_file(const std::string& path);

} // namespace superrad
