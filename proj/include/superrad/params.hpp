// System parameters, derived rates, regime classification and the
// key/value parameter-file format.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "superrad/types.hpp"

namespace superrad {

/// Physical constants of the atom-cavity model.  All rates are absolute
/// (same time unit); the CLI layer converts from units of the collective
/// decay rate Gamma_c = g^2/kappa.
struct SystemParams {
    int n_atoms = 1;          ///< N
    double coupling = 0.0;    ///< g, atom-cavity coupling
    double kappa = 0.0;       ///< cavity intensity decay rate
    double pump = 0.0;        ///< w, incoherent repump rate per atom
    double gamma_free = 0.0;  ///< free-space decay; validity checks only
    double detuning = 0.0;    ///< delta = omega_c - omega_a
    int photon_cutoff = 0;    ///< max Fock index (full model only)

    /// Collective decay rate Gamma_c = g^2/kappa.  Throws if kappa == 0,
    /// since the expression only exists under the bad-cavity elimination.
    double gamma_c() const;

    /// Checks the type invariants (N >= 1, rates >= 0).  Throws ConfigError.
    void validate() const;

    /// Convenience: parameters for an adiabatic run specified directly by
    /// (N, Gamma_c, w).  Picks a bad-cavity-compliant (g, kappa) pair with
    /// kappa = 1000 * N * Gamma_c so that a full-model build of the same
    /// params stays in the regime where both models agree.
    static SystemParams adiabatic(int n_atoms, double gamma_c, double pump);
};

/// Cooperativity bookkeeping for the two validity conditions
/// N*C >> 1 and kappa >> N*C*gamma.
struct ValidityReport {
    double cooperativity = 0.0;   ///< C = g^2/(kappa*gamma)
    bool cooperativity_infinite = false; ///< gamma == 0
    double collective_cooperativity = 0.0; ///< N*C
    double bad_cavity_ratio = 0.0; ///< kappa/(N*C*gamma) = kappa/(N*Gamma_c)
    double margin = 10.0;         ///< factor defining ">>"
    bool collective_strong_coupling = false; ///< N*C >= margin
    bool bad_cavity = false;      ///< ratio >= margin
    std::string note;             ///< e.g. "free-space decay neglected"
};

ValidityReport validity_report(const SystemParams& p, double margin = 10.0);

/// Emission regimes as a function of pump strength.
enum class Regime {
    Subradiant,      // w < Gamma_c
    LowerThreshold,  // w == Gamma_c
    Superradiant,    // Gamma_c < w < N*Gamma_c
    UpperThreshold,  // w == N*Gamma_c
    StrongPumping,   // w > N*Gamma_c
};

const char* regime_name(Regime r);

/// Total classification of (w, N, Gamma_c); scale invariant in (w, Gamma_c).
Regime classify_regime(double pump, const SystemParams& p);
Regime classify_regime(double pump, int n_atoms, double gamma_c);

/// True for the threshold values w = Gamma_c and w = N*Gamma_c.
inline bool is_threshold(Regime r) {
    return r == Regime::LowerThreshold || r == Regime::UpperThreshold;
}

// --- parameter files -------------------------------------------------------
//
// Plain "key = value" text, one pair per line, '#' comments.  The field
// schema_version is mandatory; unknown keys are rejected.  Keys:
//   schema_version n_atoms coupling kappa pump gamma_free detuning
//   photon_cutoff
inline constexpr int kParamsSchemaVersion = 1;

SystemParams load_params(std::istream& in);
SystemParams load_params_file(const std::string& path);
void save_params(std::ostream& out, const SystemParams& p);
void save_params_file(const std::string& path, const SystemParams& p);

} // namespace superrad
