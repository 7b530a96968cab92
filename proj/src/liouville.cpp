#include "superrad/liouville.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace superrad {

void DensityMatrix::validate(double tol) const {
    if (rho.rows() != rho.cols())
        throw ConsistencyError("density matrix must be square");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol)
        throw ConsistencyError("density matrix not Hermitian: asymmetry " +
                               std::to_string(herm));
    const double tr_err = std::abs(rho.trace() - Complex(1.0));
    if (tr_err > tol)
        throw ConsistencyError("density matrix trace differs from 1 by " +
                               std::to_string(tr_err));
    Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (rho + rho.adjoint()));
    if (es.eigenvalues().minCoeff() < -tol)
        throw ConsistencyError("density matrix has eigenvalue " +
                               std::to_string(es.eigenvalues().minCoeff()));
}

DenseMat build_liouvillian(const OperatorSet& ops, const LiouvillianOptions& opt) {
    const Eigen::Index d = ops.dimension;
    if (d * d > opt.max_superop_dim)
        throw CapacityError("superoperator dimension D^2 = " +
                            std::to_string(d * d) + " exceeds bound " +
                            std::to_string(opt.max_superop_dim));

    const DenseMat id = DenseMat::Identity(d, d);
    auto kron = [d](const DenseMat& a, const DenseMat& b) {
        DenseMat out(d * d, d * d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                out.block(i * d, j * d, d, d) = a(i, j) * b;
        return out;
    };

    const DenseMat h = DenseMat(ops.h_coherent);
    const Complex im(0.0, 1.0);
    // vec(-i [H, rho]) = -i (kron(I, H) - kron(H^T, I)) vec(rho)
    DenseMat liou = -im * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& ch : ops.jump_channels) {
        const DenseMat l = DenseMat(ch.op);
        const DenseMat ldl = l.adjoint() * l;
        liou += kron(l.conjugate(), l);
        liou -= 0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
    }
    return liou;
}

namespace {

DenseMat unvec(const Vec& v, Eigen::Index d) {
    DenseMat m(d, d);
    for (Eigen::Index c = 0; c < d; ++c) m.col(c) = v.segment(c * d, d);
    return m;
}

// Inverse-iteration null vector orthogonal to the given set; returns the
// vector and its relative residual ||L v|| / ||L||_F.
std::pair<Vec, double> null_vector(const Eigen::PartialPivLU<DenseMat>& lu,
                                   const DenseMat& liou, double norm_l,
                                   const std::vector<Vec>& ortho_against) {
    const Eigen::Index n = liou.rows();
    // Deterministic start vector, spread over all components.
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = Complex(std::cos(0.7 * double(i) + 0.3),
                       std::sin(1.3 * double(i) + 1.1));
    v.normalize();
    double rel = 1.0;
    for (int it = 0; it < 8; ++it) {
        for (const Vec& q : ortho_against) v -= q.dot(v) * q;
        v = lu.solve(v);
        for (const Vec& q : ortho_against) v -= q.dot(v) * q;
        const double nv = v.norm();
        if (!(nv > 0) || !std::isfinite(nv))
            throw NumericalError("inverse iteration produced a zero vector");
        v /= nv;
        rel = (liou * v).norm() / norm_l;
        if (rel < 1e-14) break;
    }
    return {v, rel};
}

} // namespace

SteadyStateResult steady_state(const DenseMat& liouvillian,
                               const OperatorSet& ops, double tol) {
    const Eigen::Index n = liouvillian.rows();
    const Eigen::Index d = ops.dimension;
    if (n != d * d)
        throw ConsistencyError("Liouvillian size does not match operator set");
    const double norm_l = liouvillian.norm();
    if (norm_l == 0.0)
        throw DegenerateSteadyState("zero Liouvillian: every state is stationary");

    // Shifted factorization keeps the solve well-posed when a pivot of the
    // exactly singular matrix underflows; the shift is far below the
    // Liouvillian gap, so the dominant inverse-iteration direction is
    // unchanged and the residual is still certified against the true L.
    const double shift = 1e-12 * norm_l / std::sqrt(double(n));
    const Eigen::PartialPivLU<DenseMat> lu(
        liouvillian + shift * DenseMat::Identity(n, n));
    auto [v, rel] = null_vector(lu, liouvillian, norm_l, {});
    if (rel > tol)
        throw NumericalError("steady-state residual " + std::to_string(rel) +
                             " exceeds tolerance " + std::to_string(tol));

    // Probe for a second null direction; a degenerate stationary space must
    // be surfaced, not resolved by an arbitrary pick.
    auto [v2, rel2] = null_vector(lu, liouvillian, norm_l, {v});
    if (rel2 <= tol)
        throw DegenerateSteadyState(
            "Liouvillian null space has dimension >= 2 (second vector residual " +
            std::to_string(rel2) + "); steady state is not unique");

    DenseMat rho = unvec(v, d);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-10)
        throw NumericalError("null vector has (near-)zero trace; cannot "
                             "normalize to a density matrix");
    rho /= tr;

    SteadyStateResult out;
    out.rho.rho = rho;
    out.rho.model = ops.model;
    out.rho.n_atoms = ops.params.n_atoms;
    Vec vec_rho(n);
    for (Eigen::Index c = 0; c < d; ++c) vec_rho.segment(c * d, d) = rho.col(c);
    out.residual = (liouvillian * vec_rho).norm();
    out.liouvillian_norm = norm_l;
    if (out.residual > tol * norm_l)
        throw NumericalError("normalized steady state residual exceeds bound");
    out.rho.validate(1e-9);
    return out;
}

ExactMoments exact_moments(const DensityMatrix& dm, const OperatorSet& ops) {
    if (dm.rho.rows() != ops.dimension)
        throw ConsistencyError("exact_moments: basis mismatch");
    const DenseMat& rho = dm.rho;
    auto expect = [&rho](const SpMat& op) {
        return (op * rho).eval().trace();
    };

    ExactMoments m;
    const int n = ops.params.n_atoms;
    m.s = expect(ops.sigma_z[0]).real();
    if (n >= 2) {
        m.p = expect(SpMat(ops.sigma_plus[0] * ops.sigma_minus[1])).real();
        m.z2 = expect(SpMat(ops.sigma_z[0] * ops.sigma_z[1])).real();
    }
    if (n >= 3) {
        m.triple = expect(SpMat(ops.sigma_z[0] * ops.sigma_plus[1] *
                                ops.sigma_minus[2]))
                       .real();
        m.factorization_residual = std::abs(*m.triple - m.s * m.p);
    }
    if (n >= 4)
        m.quad = expect(SpMat(ops.sigma_plus[0] * ops.sigma_plus[1] *
                              ops.sigma_minus[2] * ops.sigma_minus[3]))
                     .real();
    const SpMat jpjm(ops.j_plus * ops.j_minus);
    m.jp_jm = expect(jpjm).real();
    m.jpp_jmm = expect(SpMat(ops.j_plus * jpjm * ops.j_minus)).real();
    if (m.jp_jm > 1e-14) m.g2_zero = m.jpp_jmm / (m.jp_jm * m.jp_jm);
    return m;
}

DensityMatrix propagate(const DenseMat& liouvillian, const DensityMatrix& dm,
                        double t) {
    const Eigen::Index d = dm.rho.rows();
    Vec v(d * d);
    for (Eigen::Index c = 0; c < d; ++c) v.segment(c * d, d) = dm.rho.col(c);
    const DenseMat e = (liouvillian * t).exp();
    v = e * v;
    DensityMatrix out = dm;
    out.rho = unvec(v, d);
    return out;
}

std::string moments_csv_header() {
    return "N,w_over_gc,s,p,z2,triple,JpJm,JppJmm,g2_zero";
}

std::string moments_csv_row(int n_atoms, double w_over_gc, const ExactMoments& m) {
    std::ostringstream os;
    os.precision(17);
    os << n_atoms << ',' << w_over_gc << ',' << m.s << ',' << m.p << ',' << m.z2
       << ',';
    if (m.triple) os << *m.triple;
    os << ',' << m.jp_jm << ',' << m.jpp_jmm << ',';
    if (m.g2_zero) os << *m.g2_zero;
    return os.str();
}

void write_moment_table(const std::string& path, const std::vector<int>& n_atoms,
                        const std::vector<double>& w_over_gc) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write moment table: " + path);
    out << moments_csv_header() << "\n";
    for (int n : n_atoms) {
        for (double w : w_over_gc) {
            const OperatorSet ops =
                build_adiabatic_model(SystemParams::adiabatic(n, 1.0, w));
            const auto ss = steady_state(build_liouvillian(ops), ops);
            out << moments_csv_row(n, w, exact_moments(ss.rho, ops)) << "\n";
        }
    }
}

} // namespace superrad
