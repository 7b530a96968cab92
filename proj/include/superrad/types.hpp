// Common linear-algebra aliases and error types used across the library.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace superrad {

using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Vec = Eigen::VectorXcd;
using DenseMat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

/// Bad or inconsistent user input (config files, parameter bundles).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested problem size exceeds a configured capacity bound.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed its own validity checks
/// (integrator instability, photon-cutoff violation, non-convergence).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal invariant was violated; indicates a bug, not bad input.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

inline constexpr const char* kVersion = "0.1.0";

} // namespace superrad
