#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_helpers.hpp"
#include "wcl/positivity.hpp"
#include "wcl/projections.hpp"

using namespace wcl;
using namespace wcl::cp;
using namespace wcltest;

namespace {

Superoperator transpose_superop(Index d) {
    Matrix m = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            m.col(i + d * j) = vectorize(Matrix(e.transpose()));
        }
    return {d, m};
}

Superoperator lindblad_superop(const Matrix& h, const std::vector<Matrix>& jumps) {
    const Index d = h.rows();
    const Matrix id = Matrix::Identity(d, d);
    Matrix m = -kI.real() * Matrix::Zero(d * d, d * d);
    m = -(kI * (kron(id, h) - kron(h.transpose(), id))).eval();
    for (const Matrix& j : jumps) {
        const Matrix jj = j.adjoint() * j;
        m += kron(j.conjugate(), j) -
             0.5 * (kron(id, jj) + kron(jj.transpose(), id));
    }
    return {d, m};
}

}  // namespace

TEST_CASE("choi matrix basics") {
    SUBCASE("identity channel: rank-1 unnormalized maximally entangled projector") {
        auto c = choi(Superoperator::identity(3));
        Eigen::SelfAdjointEigenSolver<Matrix> es(c.mat);
        CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(3.0));
        CHECK(es.eigenvalues().minCoeff() == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(std::abs(c.mat.trace() - Complex(3.0, 0)) < 1e-13);
    }
    SUBCASE("transpose map has Choi eigenvalue -1") {
        auto c = choi(transpose_superop(2));
        CHECK(c.min_eigenvalue() == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("linearity") {
        Rng rng(31);
        Superoperator s1(2, rng.hermitian(4) + kI * rng.hermitian(4));
        Superoperator s2(2, rng.hermitian(4) + kI * rng.hermitian(4));
        const Complex a(0.7, -0.2), b(-1.1, 0.4);
        const Matrix lhs = choi(a * s1 + b * s2).mat;
        const Matrix rhs = a * choi(s1).mat + b * choi(s2).mat;
        CHECK((lhs - rhs).norm() < 1e-12);
    }
    SUBCASE("kraus-built projections are CP") {
        Rng rng(32);
        auto p = proj::diagonal_projection(rng.unitary(3));
        CHECK(choi(p.matrix()).min_eigenvalue() >= -1e-12);
        auto q = proj::block_diagonal_projection({{0, 1}, {2, 3}}, 4);
        CHECK(choi(q.matrix()).min_eigenvalue() >= -1e-12);
    }
}

TEST_CASE("cp and tp verdicts") {
    Rng rng(33);
    SUBCASE("unitary conjugation is CP and TP") {
        const Matrix u = rng.unitary(3);
        auto s = sandwich_superop(u, u.adjoint());
        CHECK(is_cp(s).pass);
        CHECK(is_trace_preserving(s).pass);
    }
    SUBCASE("transpose is TP but not CP") {
        auto t = transpose_superop(2);
        CHECK_FALSE(is_cp(t).pass);
        CHECK(is_trace_preserving(t).pass);
    }
    SUBCASE("lindblad semigroup is CP and TP at several times") {
        const Matrix h = rng.hermitian(3);
        Matrix j(3, 3);
        j.setZero();
        j(0, 1) = 1.0;
        j(1, 2) = 0.5;
        auto l = lindblad_superop(h, {j});
        for (double t : {0.1, 1.0, 10.0}) {
            auto st = superop_exp(l, t);
            CHECK(is_cp(st, 1e-8).pass);
            CHECK(is_trace_preserving(st, 1e-9).pass);
        }
    }
}

TEST_CASE("gks canonical form, single algebra") {
    Rng rng(34);

    SUBCASE("pure commutator: zero dissipator, hamiltonian recovered") {
        const Matrix h = rng.hermitian(3);
        auto form = gks_canonical(commutator_superop(HermitianOperator::from(h)));
        CHECK(form.gks_matrix.norm() < 1e-12);
        // effective hamiltonian matches up to a multiple of the identity
        Matrix diff = form.effective_hamiltonian - h;
        diff -= (diff.trace() / 3.0) * Matrix::Identity(3, 3);
        CHECK(diff.norm() < 1e-12);
        CHECK(form.min_eigenvalue >= -1e-12);
        CHECK(form.reconstruction_residual < 1e-10);
    }
    SUBCASE("single-jump dissipator: PSD rank-1 coefficient matrix") {
        const Matrix l_op = rng.hermitian(3);
        // -[L,[L,rho]] = 2 L rho L - {LL, rho}
        auto comm = [&](const Matrix& x) -> Matrix { return l_op * x - x * l_op; };
        Matrix m(9, 9);
        for (Index c = 0; c < 9; ++c) {
            Vector e = Vector::Zero(9);
            e(c) = 1.0;
            m.col(c) = -vectorize(comm(comm(devectorize(e, 3))));
        }
        auto form = gks_canonical(Superoperator(3, m));
        CHECK(form.min_eigenvalue >= -1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(form.gks_matrix, Eigen::EigenvaluesOnly);
        int nonzero = 0;
        for (Index k = 0; k < es.eigenvalues().size(); ++k)
            if (std::abs(es.eigenvalues()(k)) > 1e-9) ++nonzero;
        CHECK(nonzero == 1);
        CHECK(form.reconstruction_residual < 1e-10);
    }
    SUBCASE("roundtrip on random hermiticity-preserving maps") {
        for (Index d = 2; d <= 4; ++d) {
            // random hermitian coefficient matrix over a full operator basis
            std::vector<Matrix> ops = gell_mann_traceless(d);
            ops.insert(ops.begin(), Matrix::Identity(d, d) / std::sqrt(double(d)));
            const Index n = static_cast<Index>(ops.size());
            const Matrix c = rng.hermitian(n);
            Matrix m = Matrix::Zero(d * d, d * d);
            for (Index a = 0; a < n; ++a)
                for (Index b = 0; b < n; ++b)
                    m += c(a, b) * kron(ops[b].conjugate(), ops[a]);
            auto form = gks_canonical(Superoperator(d, m));
            CHECK(form.reconstruction_residual < 1e-9);
        }
    }
    SUBCASE("sign-flipped dissipator fails conditional CP") {
        Matrix j(2, 2);
        j.setZero();
        j(0, 1) = 1.0;
        auto l = lindblad_superop(Matrix::Zero(2, 2), {j});
        auto good = gks_canonical(l);
        CHECK(good.conditionally_cp(1e-10));
        auto bad = gks_canonical(Superoperator(2, Matrix(-l.mat)));
        CHECK_FALSE(bad.conditionally_cp(1e-8));
        CHECK(bad.min_eigenvalue < -0.5);
    }
    SUBCASE("non-hermiticity-preserving input is rejected") {
        Rng r2(35);
        Matrix m = r2.hermitian(4) + kI * r2.hermitian(4);
        m(0, 1) += Complex(0.3, 0.4);
        CHECK_THROWS_AS(gks_canonical(Superoperator(2, m)), ValidationError);
    }
}

TEST_CASE("gks canonical form, direct sums") {
    // classical 2-state rate generator on two 1-dim blocks: embedding it as a
    // full-matrix-algebra generator freezes coherences and wrongly fails the
    // CP test; the sector-wise criterion must pass it.
    const double a = 1.5, b = 0.25;
    Matrix gen = Matrix::Zero(4, 4);  // superoperator on M_2, vec index r + 2c
    gen(0, 0) = -a;
    gen(3, 0) = a;
    gen(0, 3) = b;
    gen(3, 3) = -b;
    Superoperator l(2, gen);

    auto sectored = gks_canonical(l, {1, 1});
    CHECK(sectored.conditionally_cp(1e-12));
    CHECK(sectored.reconstruction_residual < 1e-12);

    auto naive = gks_canonical(l, {2});
    CHECK_FALSE(naive.conditionally_cp(1e-8));

    // negative rate must fail even sector-wise
    Matrix gen2 = gen;
    gen2(3, 0) = -a;
    gen2(0, 0) = a;
    auto bad = gks_canonical(Superoperator(2, gen2), {1, 1});
    CHECK_FALSE(bad.conditionally_cp(1e-8));
}

TEST_CASE("image restriction transports projections to the block identity") {
    Rng rng(36);

    SUBCASE("partial trace") {
        auto sigma = DensityMatrix::from(rng.density(3));
        auto p = proj::partial_trace_projection(2, 3, sigma);
        auto r = image_restriction(p);
        CHECK(r.m == 2);
        auto t = r.transport(p.matrix());
        CHECK((t.mat - r.block_mask).norm() < 1e-12);
        // transported unitary conjugation by H_A (x) 1 acts as conjugation by H_A
        const Matrix ha = rng.hermitian(2);
        const Matrix h0 = kron(ha, Matrix::Identity(3, 3));
        auto u = unitary_propagator(HermitianOperator::from(h0), 0.7);
        auto tu = r.transport(Superoperator(6, Matrix(p.matrix().mat * u.mat * p.matrix().mat)));
        auto direct = unitary_propagator(HermitianOperator::from(ha), 0.7);
        CHECK((tu.mat - direct.mat).norm() < 1e-10);
    }
    SUBCASE("block diagonal with scrambled index sets") {
        auto p = proj::block_diagonal_projection({{2, 0}, {1, 3}}, 4);
        auto r = image_restriction(p);
        REQUIRE(r.block_dims.size() == 2);
        auto t = r.transport(p.matrix());
        CHECK((t.mat - r.block_mask).norm() < 1e-12);
    }
    SUBCASE("entangling") {
        auto fam = proj::EntanglingFamily::random(rng, 4, 2, true);
        auto p = proj::entangling_projection(fam, 2);
        auto r = image_restriction(p);
        CHECK(r.m == 4);
        auto t = r.transport(p.matrix());
        CHECK((t.mat - r.block_mask).norm() < 1e-10);
    }
    SUBCASE("diagonal") {
        auto p = proj::diagonal_projection(rng.unitary(3));
        auto r = image_restriction(p);
        CHECK(r.block_dims.size() == 3);
        auto t = r.transport(p.matrix());
        CHECK((t.mat - r.block_mask).norm() < 1e-12);
    }
}

TEST_CASE("semigroup audit") {
    Rng rng(37);
    // two-block QFGR-style generator: coherent parts plus cross-block jumps
    auto p = proj::block_diagonal_projection({{0, 1}, {2, 3}}, 4);
    auto r = image_restriction(p);
    Matrix h = Matrix::Zero(4, 4);
    h.block(0, 0, 2, 2) = rng.hermitian(2);
    h.block(2, 2, 2, 2) = rng.hermitian(2);
    Matrix j1 = Matrix::Zero(4, 4);
    j1.block(0, 2, 2, 2) << 0.4, 0.1, 0.0, 0.7;  // block 2 -> block 1
    Matrix j2 = Matrix::Zero(4, 4);
    j2.block(2, 0, 2, 2) << 0.2, 0.0, 0.3, 0.5;  // block 1 -> block 2
    auto l = lindblad_superop(h, {j1, j2});
    auto lm = r.transport(l);

    SUBCASE("valid generator passes at all times") {
        auto audit = cp_semigroup_audit(lm, r.block_dims, {0.1, 1.0, 10.0});
        CHECK(audit.pass);
        CHECK(audit.generator_form.min_eigenvalue >= -1e-10);
        for (const auto& row : audit.rows) {
            CHECK(row.cp);
            CHECK(row.tp);
        }
    }
    SUBCASE("corrupted dissipator is caught with a negative Choi eigenvalue") {
        auto lh = lindblad_superop(h, {});
        // flip the sign of the dissipative part only
        Superoperator corrupted(4, Matrix(2.0 * lh.mat - l.mat));
        auto lm2 = r.transport(corrupted);
        auto audit = cp_semigroup_audit(lm2, r.block_dims, {0.1, 1.0});
        CHECK_FALSE(audit.pass);
        CHECK(audit.generator_form.min_eigenvalue < -1e-6);
        CHECK(audit.rows[0].choi_floor < -1e-8);
    }
    SUBCASE("unitary generator passes trivially") {
        auto lm3 = r.transport(lindblad_superop(h, {}));
        auto audit = cp_semigroup_audit(lm3, r.block_dims, {0.5, 5.0});
        CHECK(audit.pass);
    }
}
