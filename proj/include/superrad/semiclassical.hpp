// Pair-correlation cumulant equations for the atoms-only model, their
// closed-form steady state, and the field correlation quantities built
// from them.
#pragma once

#include <vector>

#include "superrad/types.hpp"

namespace superrad {

/// Single-atom and pair moments closed under the triple-moment
/// factorization <sz sp sm> ~= s * p.
struct PairCorrelations {
    double s = 0.0;  ///< <sigma_z^(1)>
    double p = 0.0;  ///< <sigma_+^(1) sigma_-^(2)>; real in steady state
    double z2 = 0.0; ///< <sigma_z^(1) sigma_z^(2)>
    double d0 = 0.0; ///< (w - Gamma_c)/(w + Gamma_c)
    int n_atoms = 0;
    double pump = 0.0;
    double gamma_c = 0.0;
    bool below_threshold = false; ///< w < Gamma_c: pair closure unreliable

    /// True when the moments satisfy the physicality bounds |s|,|p|,|z2| <= 1.
    bool physical(double slack = 1e-9) const;
};

struct CumulantParams {
    int n_atoms = 0;
    double pump = 0.0;
    double gamma_c = 1.0;

    double d0() const { return (pump - gamma_c) / (pump + gamma_c); }
};

struct CumulantRates {
    double ds = 0.0, dp = 0.0, dz2 = 0.0;
    double norm() const;
};

/// Equations of motion of (s, p, z2) under collective decay plus
/// individual repumping, with the three-atom moment factorized as s*p:
///   ds  = -(w+Gc)(s - d0) - 2 Gc (N-1) p
///   dp  = -(w+Gc) p + (Gc/2)(z2 + s) + Gc (N-2) s p
///   dz2 = -2 (w+Gc)(z2 - d0 s) + 4 Gc (p - (N-2) s p)
CumulantRates cumulant_rhs(const CumulantParams& cp, const PairCorrelations& st);

/// Default initial condition: uncorrelated atoms at the single-atom fixed
/// point, (s, p, z2) = (d0, 0, d0^2).
PairCorrelations uncorrelated_state(const CumulantParams& cp);

/// Integrates cumulant_rhs to its fixed point: RK4 with step halving until
/// the residual norm drops below tolerance*(w+Gamma_c), then Newton steps on
/// the same right-hand side to polish.  Independent of the closed form.
/// Throws NumericalError with the last state attached on non-convergence.
PairCorrelations integrate_to_steady_state(const CumulantParams& cp,
                                           const PairCorrelations& init,
                                           double tolerance = 1e-10);
PairCorrelations integrate_to_steady_state(const CumulantParams& cp,
                                           double tolerance = 1e-10);

/// Closed-form steady state: quadratic root for p (the physical branch,
/// evaluated in cancellation-safe form), then z2 and s by back substitution.
/// Requires N >= 3 and w > 0.
PairCorrelations closed_form_steady_state(const CumulantParams& cp);

/// Which two-atom diagonal term enters the g2(0) numerator.
enum class DiagonalTerm {
    LadderExact,   // (1 + 2 s + z2)/2, the exact operator identity
    PrintedVariant // (1 + z2 + 2 s^2)/2, kept for comparison plots
};

/// g2(0) = <J+ J+ J- J->/<J+ J->^2 from pair correlations, using the
/// three- and four-atom factorizations.  NaN when the denominator vanishes;
/// below-threshold inputs give an unreliable value (check the flag).
double g2_zero_semiclassical(const PairCorrelations& c,
                             DiagonalTerm term = DiagonalTerm::LadderExact);

/// <J+ J-> from pair correlations: N(s+1)/2 + N(N-1) p.
double collective_intensity(const PairCorrelations& c);

/// Reference curve for chaotic light, g2(tau) = 1 + exp(-tau*w/pi).
double thermal_g2(double tau, double pump);
/// Thermal ensemble zero-delay value 2(1 - 1/N).
double thermal_g2_zero(int n_atoms);

/// One row of a pump-strength sweep.
struct SweepRow {
    double w_over_gc = 0.0;
    PairCorrelations corr;
    double g2_zero = 0.0;
};

/// Closed-form sweep over the given w/Gamma_c grid (Gamma_c = 1 internally;
/// all outputs are dimensionless).
std::vector<SweepRow> sweep_closed_form(int n_atoms,
                                        const std::vector<double>& w_over_gc);

} // namespace superrad
