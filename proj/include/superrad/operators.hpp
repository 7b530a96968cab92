// Sparse operator construction for the full atom-cavity model and the
// adiabatically eliminated (atoms-only) model.
//
// Basis conventions, fixed so that records and states serialize
// deterministically:
//  * Atomic configurations are indexed by an integer a in [0, 2^N).
//    Bit (j-1) of a is the state of atom j (1-based): bit set = excited.
//  * Full model: global index = a * (photon_cutoff + 1) + n, with n the
//    Fock index.  Equivalently, atomic_operator (x) field_operator maps to
//    kron(atomic, field) in row-major ordering.
//  * Adiabatic model: global index = a.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "superrad/params.hpp"
#include "superrad/types.hpp"

namespace superrad {

enum class ModelTag { Full, Adiabatic };

const char* model_name(ModelTag m);
ModelTag model_from_name(const std::string& name);

/// One collapse channel; the rate prefactor (sqrt of the rate) is already
/// folded into op, so the jump rate of channel k is <psi| op^dag op |psi>.
struct JumpChannel {
    std::string label; // "cavity" or "pump-j"
    SpMat op;
};

/// Immutable bundle of all operators of one model instance.  Safe to share
/// across trajectory workers after construction.
struct OperatorSet {
    SystemParams params;
    ModelTag model = ModelTag::Adiabatic;
    Eigen::Index dimension = 0;

    std::optional<SpMat> annihilate; // cavity a-hat; full model only
    SpMat j_plus, j_minus, j_z;
    std::vector<SpMat> sigma_plus, sigma_minus, sigma_z; // index j-1 = atom j
    SpMat h_coherent;
    std::vector<JumpChannel> jump_channels;

    /// Index of the all-ground (vacuum) basis state; always 0 by convention.
    Eigen::Index ground_index() const { return 0; }
    /// Normalized all-ground (tensor vacuum) state.
    Vec ground_state() const;
    /// Normalized all-excited (tensor vacuum) state.
    Vec all_excited_state() const;
    /// Number of Fock levels per atomic configuration (1 for adiabatic).
    Eigen::Index fock_dim() const;
};

/// Caps on the Hilbert-space size; construction beyond this throws
/// CapacityError.
struct BuildOptions {
    Eigen::Index max_dimension = 1 << 14;
};

/// Full model of Eq.-(1)-type coupling with cavity decay and repumping:
///   H = detuning * a^dag a + (g/2) (a^dag J_- + J_+ a)        (frame at omega_a)
///   L_0 = sqrt(kappa) a                 "cavity"
///   L_j = sqrt(w) sigma_+^(j)           "pump-j",  j = 1..N
OperatorSet build_full_model(const SystemParams& p, const BuildOptions& opt = {});

/// Adiabatic (bad-cavity) model on the 2^N atomic space:
///   H = 0,  L_0 = sqrt(Gamma_c) J_-  "cavity",  L_j = sqrt(w) sigma_+^(j).
OperatorSet build_adiabatic_model(const SystemParams& p, const BuildOptions& opt = {});

/// <psi| op |psi> for a normalized state.  Throws on dimension mismatch.
Complex expectation(const Vec& state, const SpMat& op);

} // namespace superrad
