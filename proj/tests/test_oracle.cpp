#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "superrad/liouville.hpp"
#include "superrad/semiclassical.hpp"

using namespace superrad;

namespace {

OperatorSet adiabatic(int n, double w) {
    return build_adiabatic_model(SystemParams::adiabatic(n, 1.0, w));
}

DensityMatrix pure_state(const Vec& psi, const OperatorSet& ops) {
    DensityMatrix dm;
    dm.rho = psi * psi.adjoint();
    dm.model = ops.model;
    dm.n_atoms = ops.params.n_atoms;
    return dm;
}

} // namespace

TEST_CASE("two-level Liouvillian matches the hand-built matrix") {
    const double w = 0.7, gc = 1.0;
    const OperatorSet ops = adiabatic(1, w);
    const DenseMat liou = build_liouvillian(ops);
    REQUIRE(liou.rows() == 4);
    // Column stacking (rho_gg, rho_eg, rho_ge, rho_ee).
    DenseMat ref = DenseMat::Zero(4, 4);
    ref(0, 0) = -w;
    ref(0, 3) = gc;
    ref(3, 0) = w;
    ref(3, 3) = -gc;
    ref(1, 1) = ref(2, 2) = -0.5 * (w + gc);
    CHECK((liou - ref).cwiseAbs().maxCoeff() < 1e-14);

    // Rate flow out of the maximally mixed state.
    Vec mixed(4);
    mixed << 0.5, 0.0, 0.0, 0.5;
    const Vec flow = liou * mixed;
    CHECK(flow(0).real() == doctest::Approx(0.5 * (gc - w)));
    CHECK(flow(3).real() == doctest::Approx(0.5 * (w - gc)));
}

TEST_CASE("the vectorized identity is a left null vector (trace preservation)") {
    for (const OperatorSet& ops : {adiabatic(2, 0.8), adiabatic(3, 5.0)}) {
        const DenseMat liou = build_liouvillian(ops);
        const Eigen::Index d = ops.dimension;
        Vec id_vec = Vec::Zero(d * d);
        for (Eigen::Index i = 0; i < d; ++i) id_vec(i * d + i) = 1.0;
        CHECK((liou.transpose() * id_vec).norm() < 1e-12 * liou.norm());
    }
}

TEST_CASE("zero rates and zero Hamiltonian give the zero superoperator") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = 0.0;
    p.kappa = 1.0;
    p.pump = 0.0;
    const OperatorSet ops = build_adiabatic_model(p);
    CHECK(build_liouvillian(ops).norm() == 0.0);
}

TEST_CASE("capacity bound on the superoperator") {
    LiouvillianOptions opt;
    opt.max_superop_dim = 16;
    CHECK_THROWS_AS(build_liouvillian(adiabatic(3, 1.0), opt), CapacityError);
}

TEST_CASE("two-level steady state is the rate-balance state") {
    const double w = 0.7;
    const OperatorSet ops = adiabatic(1, w);
    const auto res = steady_state(build_liouvillian(ops), ops);
    CHECK(res.rho.rho(1, 1).real() == doctest::Approx(w / (w + 1.0)));
    CHECK(std::abs(res.rho.rho(0, 1)) < 1e-12);
    const ExactMoments m = exact_moments(res.rho, ops);
    const double d0 = (w - 1.0) / (w + 1.0);
    CHECK(m.s == doctest::Approx(d0).epsilon(1e-10));
    CHECK(res.residual <= 1e-10 * res.liouvillian_norm);
}

TEST_CASE("steady state agrees with the full eigendecomposition at small size") {
    const OperatorSet ops = adiabatic(2, 2.5);
    const DenseMat liou = build_liouvillian(ops);
    const auto res = steady_state(liou, ops);
    Eigen::ComplexEigenSolver<DenseMat> es(liou);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best)))
            best = i;
    CHECK(std::abs(es.eigenvalues()(best)) < 1e-12 * liou.norm());
    Vec v = es.eigenvectors().col(best);
    DenseMat rho(ops.dimension, ops.dimension);
    for (Eigen::Index c = 0; c < ops.dimension; ++c)
        rho.col(c) = v.segment(c * ops.dimension, ops.dimension);
    rho /= rho.trace();
    CHECK((rho - res.rho.rho).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("w = 0 degeneracy is surfaced, not resolved") {
    const OperatorSet ops = adiabatic(2, 0.0);
    CHECK_THROWS_AS(steady_state(build_liouvillian(ops), ops),
                    DegenerateSteadyState);
}

TEST_CASE("thermal-limit reference value at N=2, w=100") {
    const OperatorSet ops = adiabatic(2, 100.0);
    const auto res = steady_state(build_liouvillian(ops), ops);
    const ExactMoments m = exact_moments(res.rho, ops);
    REQUIRE(m.g2_zero.has_value());
    // 2(1 - 1/N) = 1 up to the finite-pump correction.
    CHECK(*m.g2_zero == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("exact moments of simple pure states") {
    {
        const OperatorSet ops = adiabatic(3, 1.0);
        const ExactMoments m =
            exact_moments(pure_state(ops.ground_state(), ops), ops);
        CHECK(m.s == doctest::Approx(-1.0));
        CHECK(m.p == doctest::Approx(0.0));
        CHECK(m.z2 == doctest::Approx(1.0));
        CHECK_FALSE(m.g2_zero.has_value()); // dark state: zero flux
    }
    {
        const OperatorSet ops = adiabatic(2, 1.0);
        const ExactMoments m =
            exact_moments(pure_state(ops.all_excited_state(), ops), ops);
        CHECK(m.jp_jm == doctest::Approx(2.0));
        CHECK(m.jpp_jmm == doctest::Approx(4.0));
        CHECK(*m.g2_zero == doctest::Approx(1.0));
    }
}

TEST_CASE("steady state is invariant under short-time propagation") {
    const OperatorSet ops = adiabatic(3, 5.0);
    const DenseMat liou = build_liouvillian(ops);
    const auto res = steady_state(liou, ops);
    const DensityMatrix later = propagate(liou, res.rho, 0.5);
    CHECK((later.rho - res.rho.rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("numerator identity: exact ladder moments reproduce the expansion") {
    // <J+J+J-J-> = N(N-1) [ (1+2s+z2)/2 + 2(N-2)(p + triple)
    //                       + (N-2)(N-3) quad ]
    // with exact (unfactorized) moments; validates the combinatorial
    // bookkeeping including the two-atom diagonal term.
    for (int n : {3, 4}) {
        for (double w : {2.0, 5.0, 20.0}) {
            const OperatorSet ops = adiabatic(n, w);
            const auto res = steady_state(build_liouvillian(ops), ops);
            const ExactMoments m = exact_moments(res.rho, ops);
            REQUIRE(m.triple.has_value());
            const double quad = n >= 4 ? *m.quad : 0.0;
            const double expansion =
                double(n) * (n - 1.0) *
                (0.5 * (1.0 + 2.0 * m.s + m.z2) +
                 2.0 * (n - 2.0) * (m.p + *m.triple) +
                 (n - 2.0) * (n - 3.0) * quad);
            CAPTURE(n);
            CAPTURE(w);
            CHECK(m.jpp_jmm == doctest::Approx(expansion).epsilon(1e-10));
        }
    }
}

TEST_CASE("printed-variant diagonal does not satisfy the exact identity") {
    const OperatorSet ops = adiabatic(3, 5.0);
    const auto res = steady_state(build_liouvillian(ops), ops);
    const ExactMoments m = exact_moments(res.rho, ops);
    const double exact_diag = 0.5 * (1.0 + 2.0 * m.s + m.z2);
    const double printed_diag = 0.5 * (1.0 + m.z2 + 2.0 * m.s * m.s);
    const double with_exact = 6.0 * (exact_diag + 2.0 * (m.p + *m.triple));
    const double with_printed = 6.0 * (printed_diag + 2.0 * (m.p + *m.triple));
    CHECK(m.jpp_jmm == doctest::Approx(with_exact).epsilon(1e-10));
    CHECK(std::abs(m.jpp_jmm - with_printed) > 1e-3);
}

TEST_CASE("semiclassical g2(0) tracks the dense value at N=3 within 10%") {
    const OperatorSet ops = adiabatic(3, 5.0);
    const auto res = steady_state(build_liouvillian(ops), ops);
    const ExactMoments m = exact_moments(res.rho, ops);
    CumulantParams cp{3, 5.0, 1.0};
    const double g2_sc = g2_zero_semiclassical(closed_form_steady_state(cp));
    CHECK(g2_sc == doctest::Approx(*m.g2_zero).epsilon(0.10));
    REQUIRE(m.factorization_residual.has_value());
    CHECK(*m.factorization_residual < 0.05);
}

TEST_CASE("full-model steady state balances photon flux in the bad-cavity limit") {
    SystemParams p;
    p.n_atoms = 2;
    p.coupling = std::sqrt(200.0);
    p.kappa = 200.0; // Gamma_c = 1
    p.pump = 2.0;
    p.photon_cutoff = 3;
    const OperatorSet full = build_full_model(p);
    const auto res = steady_state(build_liouvillian(full), full);
    const DenseMat a = DenseMat(*full.annihilate);
    const double n_phot = ((a.adjoint() * a) * res.rho.rho).trace().real();
    const ExactMoments m = exact_moments(res.rho, full);
    // kappa <a^dag a> = Gamma_c <J+J-> up to O(N Gamma_c / kappa).
    CHECK(p.kappa * n_phot == doctest::Approx(m.jp_jm).epsilon(0.05));
}

TEST_CASE("moment CSV row format") {
    const OperatorSet ops = adiabatic(3, 5.0);
    const auto res = steady_state(build_liouvillian(ops), ops);
    const ExactMoments m = exact_moments(res.rho, ops);
    CHECK(moments_csv_header() == "N,w_over_gc,s,p,z2,triple,JpJm,JppJmm,g2_zero");
    const std::string row = moments_csv_row(3, 5.0, m);
    CHECK(row.substr(0, 4) == "3,5,");
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
}

TEST_CASE("moment table export") {
    const std::string path = "oracle_moments_test.csv";
    write_moment_table(path, {2, 3}, {2.0, 5.0});
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == moments_csv_header());
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
    std::remove(path.c_str());
}
