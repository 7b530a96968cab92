// Dense Liouvillian reference solver for small systems: exact steady states
// and exact moments that anchor the trajectory and cumulant approximations.
//
// Vectorization is column-stacking: vec(A rho B) = kron(B^T, A) vec(rho),
// so rho(r, c) lives at vec index c*D + r.
#pragma once

#include <optional>
#include <string>

#include "superrad/operators.hpp"
#include "superrad/types.hpp"

namespace superrad {

struct DensityMatrix {
    DenseMat rho;
    ModelTag model = ModelTag::Adiabatic;
    int n_atoms = 0;

    /// Checks Hermiticity, unit trace and positivity within tol; throws
    /// ConsistencyError on violation.
    void validate(double tol = 1e-10) const;
};

struct LiouvillianOptions {
    Eigen::Index max_superop_dim = 4096; ///< bound on D^2
};

/// Dense matrix of rho -> -i[H, rho] + sum_k (L rho L^dag - {L^dag L, rho}/2).
DenseMat build_liouvillian(const OperatorSet& ops,
                           const LiouvillianOptions& opt = {});

/// Thrown when the stationary space has dimension > 1 (e.g. w = 0, where
/// dark states make the steady state non-unique).
struct DegenerateSteadyState : NumericalError {
    explicit DegenerateSteadyState(const std::string& msg) : NumericalError(msg) {}
};

struct SteadyStateResult {
    DensityMatrix rho;
    double residual = 0.0;      ///< ||L vec(rho)||_2
    double liouvillian_norm = 0.0; ///< ||L||_F, for the relative bound
};

/// Null vector of the Liouvillian, trace-normalized.  Uses dense LU inverse
/// iteration (the standard route to the eigenvector of smallest-magnitude
/// eigenvalue); certifies ||L rho|| <= tol * ||L||_F and probes for a second
/// independent null vector, throwing DegenerateSteadyState if one exists.
SteadyStateResult steady_state(const DenseMat& liouvillian,
                               const OperatorSet& ops, double tol = 1e-10);

/// Exact moments of a density matrix in the atomic sector.
struct ExactMoments {
    double s = 0.0;   ///< <sigma_z^(1)>
    double p = 0.0;   ///< Re <sigma_+^(1) sigma_-^(2)>  (N >= 2)
    double z2 = 0.0;  ///< <sigma_z^(1) sigma_z^(2)>     (N >= 2)
    std::optional<double> triple; ///< <sigma_z^(1) sigma_+^(2) sigma_-^(3)>, N >= 3
    double jp_jm = 0.0;     ///< <J+ J->
    double jpp_jmm = 0.0;   ///< <J+ J+ J- J->
    std::optional<double> g2_zero; ///< jpp_jmm / jp_jm^2; empty at zero flux
    std::optional<double> quad; ///< <sp^1 sp^2 sm^3 sm^4>, N >= 4
    /// |triple - s*p| when defined; quantifies the cumulant closure.
    std::optional<double> factorization_residual;
};

ExactMoments exact_moments(const DensityMatrix& rho, const OperatorSet& ops);

/// Propagates vec(rho) by expm(L t); used for stationarity checks.
DensityMatrix propagate(const DenseMat& liouvillian, const DensityMatrix& rho,
                        double t);

/// CSV row "N,w_over_gc,s,p,z2,triple,JpJm,JppJmm,g2_zero" for the moment
/// tables consumed by the test suite.
std::string moments_csv_header();
std::string moments_csv_row(int n_atoms, double w_over_gc, const ExactMoments& m);

/// Solves the adiabatic steady state for each (N, w/Gamma_c) pair and writes
/// the moment table.  Sizes are bounded by the oracle capacity (N <= 6).
void write_moment_table(const std::string& path, const std::vector<int>& n_atoms,
                        const std::vector<double>& w_over_gc);

} // namespace superrad
