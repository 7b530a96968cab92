#include "superrad/operators.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace superrad {

const char* model_name(ModelTag m) {
    return m == ModelTag::Full ? "full" : "adiabatic";
}

ModelTag model_from_name(const std::string& name) {
    if (name == "full") return ModelTag::Full;
    if (name == "adiabatic") return ModelTag::Adiabatic;
    throw ConfigError("unknown model tag '" + name + "'");
}

namespace {

using Triplet = Eigen::Triplet<Complex>;

SpMat from_triplets(Eigen::Index rows, Eigen::Index cols,
                    const std::vector<Triplet>& ts) {
    SpMat m(rows, cols);
    m.setFromTriplets(ts.begin(), ts.end());
    m.makeCompressed();
    return m;
}

// sigma_-^(j) on the 2^N atomic space: |...g_j...><...e_j...|.
SpMat atomic_sigma_minus(int n_atoms, int atom /*1-based*/) {
    const Eigen::Index dim = Eigen::Index(1) << n_atoms;
    const Eigen::Index bit = Eigen::Index(1) << (atom - 1);
    std::vector<Triplet> ts;
    ts.reserve(dim / 2);
    for (Eigen::Index a = 0; a < dim; ++a)
        if (a & bit) ts.emplace_back(a & ~bit, a, 1.0);
    return from_triplets(dim, dim, ts);
}

SpMat atomic_sigma_z(int n_atoms, int atom) {
    const Eigen::Index dim = Eigen::Index(1) << n_atoms;
    const Eigen::Index bit = Eigen::Index(1) << (atom - 1);
    std::vector<Triplet> ts;
    ts.reserve(dim);
    for (Eigen::Index a = 0; a < dim; ++a)
        ts.emplace_back(a, a, (a & bit) ? 1.0 : -1.0);
    return from_triplets(dim, dim, ts);
}

SpMat fock_annihilate(int cutoff) {
    const Eigen::Index dim = cutoff + 1;
    std::vector<Triplet> ts;
    for (Eigen::Index n = 1; n < dim; ++n)
        ts.emplace_back(n - 1, n, std::sqrt(double(n)));
    return from_triplets(dim, dim, ts);
}

SpMat identity(Eigen::Index dim) {
    SpMat id(dim, dim);
    id.setIdentity();
    return id;
}

SpMat dagger(const SpMat& m) { return SpMat(m.adjoint()); }

} // namespace

Vec OperatorSet::ground_state() const {
    Vec v = Vec::Zero(dimension);
    v(0) = 1.0;
    return v;
}

Vec OperatorSet::all_excited_state() const {
    const Eigen::Index a = (Eigen::Index(1) << params.n_atoms) - 1;
    Vec v = Vec::Zero(dimension);
    v(a * fock_dim()) = 1.0;
    return v;
}

Eigen::Index OperatorSet::fock_dim() const {
    return model == ModelTag::Full ? params.photon_cutoff + 1 : 1;
}

OperatorSet build_full_model(const SystemParams& p, const BuildOptions& opt) {
    p.validate();
    if (p.kappa <= 0) throw ConfigError("full model requires kappa > 0");
    if (p.photon_cutoff < 1)
        throw ConfigError("full model requires photon_cutoff >= 1");
    if (p.n_atoms > 62) throw CapacityError("n_atoms too large for 2^N indexing");
    const Eigen::Index atom_dim = Eigen::Index(1) << p.n_atoms;
    const Eigen::Index fock_dim = p.photon_cutoff + 1;
    if (atom_dim > opt.max_dimension / fock_dim)
        throw CapacityError("full model dimension 2^N*(cutoff+1) = " +
                            std::to_string(double(atom_dim) * double(fock_dim)) +
                            " exceeds max_dimension = " +
                            std::to_string(opt.max_dimension));
    const Eigen::Index dim = atom_dim * fock_dim;

    OperatorSet ops;
    ops.params = p;
    ops.model = ModelTag::Full;
    ops.dimension = dim;

    const SpMat id_a = identity(atom_dim);
    const SpMat id_f = identity(fock_dim);
    const SpMat a_f = fock_annihilate(p.photon_cutoff);

    ops.annihilate = SpMat(Eigen::kroneckerProduct(id_a, a_f));

    SpMat jm_atomic(atom_dim, atom_dim), jz_atomic(atom_dim, atom_dim);
    ops.sigma_minus.reserve(p.n_atoms);
    for (int j = 1; j <= p.n_atoms; ++j) {
        const SpMat sm = atomic_sigma_minus(p.n_atoms, j);
        const SpMat sz = atomic_sigma_z(p.n_atoms, j);
        jm_atomic = jm_atomic + sm;
        jz_atomic = jz_atomic + sz;
        ops.sigma_minus.push_back(SpMat(Eigen::kroneckerProduct(sm, id_f)));
        ops.sigma_plus.push_back(dagger(ops.sigma_minus.back()));
        ops.sigma_z.push_back(SpMat(Eigen::kroneckerProduct(sz, id_f)));
    }
    ops.j_minus = SpMat(Eigen::kroneckerProduct(jm_atomic, id_f));
    ops.j_plus = dagger(ops.j_minus);
    ops.j_z = SpMat(Complex(0.5) * Eigen::kroneckerProduct(jz_atomic, id_f));

    // Rotating frame at omega_a: H = delta a^dag a + (g/2)(a^dag J_- + J_+ a).
    const SpMat adag_jm =
        SpMat(Eigen::kroneckerProduct(jm_atomic, dagger(a_f)));
    SpMat h = SpMat(Complex(0.5 * p.coupling) * (adag_jm + dagger(adag_jm)));
    if (p.detuning != 0.0) {
        const SpMat num_op =
            SpMat(Eigen::kroneckerProduct(id_a, SpMat(dagger(a_f) * a_f)));
        h = h + SpMat(Complex(p.detuning) * num_op);
    }
    h.makeCompressed();
    ops.h_coherent = h;

    ops.jump_channels.push_back(
        {"cavity", SpMat(Complex(std::sqrt(p.kappa)) * *ops.annihilate)});
    for (int j = 1; j <= p.n_atoms; ++j)
        ops.jump_channels.push_back(
            {"pump-" + std::to_string(j),
             SpMat(Complex(std::sqrt(p.pump)) * ops.sigma_plus[j - 1])});
    return ops;
}

OperatorSet build_adiabatic_model(const SystemParams& p, const BuildOptions& opt) {
    p.validate();
    const double gc = p.gamma_c();
    if (p.n_atoms > 62) throw CapacityError("n_atoms too large for 2^N indexing");
    const Eigen::Index dim = Eigen::Index(1) << p.n_atoms;
    if (dim > opt.max_dimension)
        throw CapacityError("adiabatic model dimension 2^N = " +
                            std::to_string(dim) + " exceeds max_dimension = " +
                            std::to_string(opt.max_dimension));

    OperatorSet ops;
    ops.params = p;
    ops.model = ModelTag::Adiabatic;
    ops.dimension = dim;

    SpMat jm(dim, dim), jz(dim, dim);
    for (int j = 1; j <= p.n_atoms; ++j) {
        ops.sigma_minus.push_back(atomic_sigma_minus(p.n_atoms, j));
        ops.sigma_plus.push_back(dagger(ops.sigma_minus.back()));
        ops.sigma_z.push_back(atomic_sigma_z(p.n_atoms, j));
        jm = jm + ops.sigma_minus.back();
        jz = jz + ops.sigma_z.back();
    }
    ops.j_minus = jm;
    ops.j_plus = dagger(jm);
    ops.j_z = SpMat(Complex(0.5) * jz);

    ops.h_coherent = SpMat(dim, dim); // resonant rotating frame

    ops.jump_channels.push_back(
        {"cavity", SpMat(Complex(std::sqrt(gc)) * ops.j_minus)});
    for (int j = 1; j <= p.n_atoms; ++j)
        ops.jump_channels.push_back(
            {"pump-" + std::to_string(j),
             SpMat(Complex(std::sqrt(p.pump)) * ops.sigma_plus[j - 1])});
    return ops;
}

Complex expectation(const Vec& state, const SpMat& op) {
    if (state.size() != op.rows() || op.rows() != op.cols())
        throw ConsistencyError("expectation: dimension mismatch");
    return state.dot(op * state); // Eigen's dot conjugates the left argument
}

} // namespace superrad
