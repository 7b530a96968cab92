#include <doctest.h>

#include <cmath>

#include "superrad/operators.hpp"
#include "superrad/rng.hpp"

using namespace superrad;

namespace {

// Independent dense construction of the same operators by explicit Kronecker
// products of 2x2 blocks; the reference the sparse builders are checked
// against.
DenseMat dense_kron(const DenseMat& a, const DenseMat& b) {
    DenseMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

DenseMat dense_single_atom(int n_atoms, int atom, const DenseMat& op2) {
    // Atom j occupies bit (j-1); with index = sum_j bit_j 2^(j-1), atom 1 is
    // the FASTEST-varying factor, so the chain is op_N (x) ... (x) op_1.
    DenseMat acc = DenseMat::Identity(1, 1);
    for (int j = 1; j <= n_atoms; ++j) {
        const DenseMat factor =
            j == atom ? op2 : DenseMat::Identity(2, 2);
        acc = dense_kron(factor, acc);
    }
    return acc;
}

DenseMat dense_sigma_minus2() {
    DenseMat m = DenseMat::Zero(2, 2);
    m(0, 1) = 1.0; // |g><e| with index 0 = ground, 1 = excited
    return m;
}

DenseMat dense_sigma_z2() {
    DenseMat m = DenseMat::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return m;
}

SystemParams adiabatic_params(int n, double w) {
    return SystemParams::adiabatic(n, 1.0, w);
}

} // namespace

TEST_CASE("sparse single-atom operators match the dense Kronecker oracle") {
    const int n = 4;
    const OperatorSet ops = build_adiabatic_model(adiabatic_params(n, 0.5));
    DenseMat jm_ref = DenseMat::Zero(ops.dimension, ops.dimension);
    for (int j = 1; j <= n; ++j) {
        const DenseMat sm_ref = dense_single_atom(n, j, dense_sigma_minus2());
        const DenseMat sz_ref = dense_single_atom(n, j, dense_sigma_z2());
        CHECK((DenseMat(ops.sigma_minus[j - 1]) - sm_ref).norm() == 0.0);
        CHECK((DenseMat(ops.sigma_z[j - 1]) - sz_ref).norm() == 0.0);
        jm_ref += sm_ref;
    }
    CHECK((DenseMat(ops.j_minus) - jm_ref).norm() == 0.0);
    CHECK((DenseMat(ops.j_plus) - jm_ref.adjoint()).norm() == 0.0);
}

TEST_CASE("full model N=1 cutoff=1: dimension and J_z eigenvalue") {
    SystemParams p;
    p.n_atoms = 1;
    p.coupling = 1.0;
    p.kappa = 40.0;
    p.pump = 1.0;
    p.photon_cutoff = 1;
    const OperatorSet ops = build_full_model(p);
    CHECK(ops.dimension == 4);
    // |e, 0>: atomic bit set, Fock 0 -> index 1*2 + 0 = 2.
    Vec e0 = Vec::Zero(4);
    e0(2) = 1.0;
    CHECK(expectation(e0, ops.j_z).real() == doctest::Approx(0.5));
    CHECK((DenseMat(ops.j_z) * e0 - 0.5 * e0).norm() == doctest::Approx(0.0));
}

TEST_CASE("full model N=2: all-excited J_z expectation is N/2") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = 1.0;
    p.kappa = 40.0;
    p.pump = 1.0;
    p.photon_cutoff = 1;
    const OperatorSet ops = build_full_model(p);
    const Vec ee = ops.all_excited_state();
    CHECK(expectation(ee, ops.j_z).real() == doctest::Approx(1.0));
}

TEST_CASE("angular momentum commutator [J+, J-] = 2 Jz holds elementwise") {
    SystemParams p;
    p.n_atoms = 3;
    p.coupling = 0.7;
    p.kappa = 11.0;
    p.pump = 0.3;
    p.photon_cutoff = 2;
    for (const OperatorSet& ops :
         {build_full_model(p), build_adiabatic_model(p)}) {
        const DenseMat comm = DenseMat(ops.j_plus) * DenseMat(ops.j_minus) -
                              DenseMat(ops.j_minus) * DenseMat(ops.j_plus);
        CHECK((comm - 2.0 * DenseMat(ops.j_z)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("adiabatic model channels") {
    const OperatorSet one = build_adiabatic_model(adiabatic_params(1, 0.4));
    CHECK(one.dimension == 2);
    REQUIRE(one.jump_channels.size() == 2);
    CHECK(one.jump_channels[0].label == "cavity");
    CHECK(one.jump_channels[1].label == "pump-1");
    // sqrt(Gamma_c) sigma_- and sqrt(w) sigma_+ on the 2-dim space.
    CHECK(DenseMat(one.jump_channels[0].op)(0, 1).real() ==
          doctest::Approx(1.0));
    CHECK(DenseMat(one.jump_channels[1].op)(1, 0).real() ==
          doctest::Approx(std::sqrt(0.4)));

    const OperatorSet two = build_adiabatic_model(adiabatic_params(2, 0.4));
    // L_0 |ee> lands in the symmetric one-excitation (triplet) state.
    const Vec after = DenseMat(two.jump_channels[0].op) * two.all_excited_state();
    CHECK(after(1).real() == doctest::Approx(after(2).real()));
    CHECK(after(0).real() == doctest::Approx(0.0));
    CHECK(after(3).real() == doctest::Approx(0.0));

    CHECK(build_adiabatic_model(adiabatic_params(10, 1.0)).dimension == 1024);
}

TEST_CASE("h_coherent is Hermitian and has the rotating-frame form") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = 3.0;
    p.kappa = 50.0;
    p.pump = 0.5;
    p.detuning = 0.7;
    p.photon_cutoff = 3;
    const OperatorSet ops = build_full_model(p);
    const DenseMat h = DenseMat(ops.h_coherent);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    // delta a^dag a + (g/2)(a^dag J- + J+ a), checked against dense algebra.
    const DenseMat a = DenseMat(*ops.annihilate);
    const DenseMat jm = DenseMat(ops.j_minus);
    const DenseMat ref = p.detuning * (a.adjoint() * a) +
                         0.5 * p.coupling *
                             (a.adjoint() * jm + jm.adjoint() * a);
    CHECK((h - ref).cwiseAbs().maxCoeff() < 1e-14);
    // Adiabatic model is in the resonant rotating frame: H = 0.
    const OperatorSet ad = build_adiabatic_model(p);
    CHECK(DenseMat(ad.h_coherent).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ladder operators annihilate the extreme states") {
    SystemParams p;
    p.n_atoms = 3;
    p.coupling = 1.0;
    p.kappa = 30.0;
    p.pump = 1.0;
    p.photon_cutoff = 2;
    const OperatorSet ops = build_full_model(p);
    CHECK((DenseMat(ops.j_minus) * ops.ground_state()).norm() == 0.0);
    CHECK((DenseMat(ops.j_plus) * ops.all_excited_state()).norm() == 0.0);
    // a |vacuum> = 0 for every atomic configuration with Fock index 0.
    Vec vac = ops.ground_state();
    CHECK((DenseMat(*ops.annihilate) * vac).norm() == 0.0);
}

TEST_CASE("(J-)^(N+1) vanishes exactly") {
    const int n = 5;
    const OperatorSet ops = build_adiabatic_model(adiabatic_params(n, 1.0));
    DenseMat acc = DenseMat::Identity(ops.dimension, ops.dimension);
    for (int k = 0; k <= n; ++k) acc = DenseMat(ops.j_minus) * acc;
    CHECK(acc.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-atom operators on different atoms commute exactly") {
    const OperatorSet ops = build_adiabatic_model(adiabatic_params(4, 1.0));
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            const DenseMat x = DenseMat(ops.sigma_plus[a]);
            const DenseMat y = DenseMat(ops.sigma_minus[b]);
            CHECK((x * y - y * x).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("j_z equals half the sum of sigma_z") {
    const OperatorSet ops = build_adiabatic_model(adiabatic_params(4, 1.0));
    DenseMat sum = DenseMat::Zero(ops.dimension, ops.dimension);
    for (const auto& sz : ops.sigma_z) sum += DenseMat(sz);
    CHECK((DenseMat(ops.j_z) - 0.5 * sum).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("capacity bounds produce explicit errors") {
    SystemParams p;
    p.n_atoms = 10;
    p.coupling = 1.0;
    p.kappa = 10.0;
    p.pump = 1.0;
    p.photon_cutoff = 63;
    BuildOptions opt;
    opt.max_dimension = 1 << 12;
    CHECK_THROWS_AS(build_full_model(p, opt), CapacityError);
    SystemParams q = adiabatic_params(13, 1.0);
    CHECK_THROWS_AS(build_adiabatic_model(q, opt), CapacityError);
}

TEST_CASE("full model requires a photon cutoff") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = 1.0;
    p.kappa = 10.0;
    p.photon_cutoff = 0;
    CHECK_THROWS_AS(build_full_model(p), ConfigError);
}

TEST_CASE("expectation checks dimensions") {
    const OperatorSet ops = build_adiabatic_model(adiabatic_params(2, 1.0));
    Vec wrong = Vec::Zero(3);
    CHECK_THROWS_AS(expectation(wrong, ops.j_z), ConsistencyError);
    // (|g> + |e>)/sqrt(2) for one atom has <sigma_z> = 0.
    const OperatorSet one = build_adiabatic_model(adiabatic_params(1, 1.0));
    Vec plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    CHECK(expectation(plus, one.sigma_z[0]).real() == doctest::Approx(0.0));
}
