#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_helpers.hpp"
#include "wcl/opcore.hpp"

using namespace wcl;
using namespace wcltest;

TEST_CASE("vectorize round trip and convention") {
    Rng rng(11);
    const Matrix x = rng.hermitian(3) + kI * rng.hermitian(3);
    CHECK((devectorize(vectorize(x), 3) - x).norm() == doctest::Approx(0.0).epsilon(1e-15));

    const Vector v = vectorize(Matrix::Identity(2, 2));
    CHECK(v(0) == Complex(1, 0));
    CHECK(v(1) == Complex(0, 0));
    CHECK(v(2) == Complex(0, 0));
    CHECK(v(3) == Complex(1, 0));

    CHECK_THROWS_AS(devectorize(Vector::Zero(5), 2), DimensionError);
}

TEST_CASE("sandwich law against direct multiplication") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a(2, 2), x(2, 2), b(2, 2);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 2; ++j) {
                a(i, j) = rng.cnormal();
                x(i, j) = rng.cnormal();
                b(i, j) = rng.cnormal();
            }
        const Matrix direct = a * x * b;
        const Matrix via_superop = sandwich_superop(a, b).apply(x);
        CHECK((direct - via_superop).norm() < 1e-13);
    }
}

TEST_CASE("commutator superoperator") {
    SUBCASE("zero hamiltonian gives zero map") {
        auto s = commutator_superop(HermitianOperator::from(Matrix::Zero(3, 3)));
        CHECK(superop_norm(s) == doctest::Approx(0.0));
    }
    SUBCASE("pauli algebra: -i[sz, sx] = 2 sy") {
        auto s = commutator_superop(HermitianOperator::from(pauli_z()));
        CHECK((s.apply(pauli_x()) - 2.0 * pauli_y()).norm() < 1e-14);
    }
    SUBCASE("output is traceless and hermitian on hermitian input") {
        Rng rng(13);
        for (int trial = 0; trial < 20; ++trial) {
            const Index d = 2 + trial % 4;
            auto s = commutator_superop(HermitianOperator::from(rng.hermitian(d)));
            const Matrix rho = rng.density(d);
            const Matrix out = s.apply(rho);
            CHECK(std::abs(out.trace()) < 1e-12);
            CHECK((out - out.adjoint()).norm() < 1e-12);
        }
    }
    SUBCASE("non-hermitian input rejected") {
        Matrix m(2, 2);
        m << 0, 1, 0, 0;
        CHECK_THROWS_AS(HermitianOperator::from(m), ValidationError);
    }
}

TEST_CASE("unitary propagator") {
    Rng rng(14);
    const auto h = HermitianOperator::from(rng.hermitian(4));

    SUBCASE("t = 0 is the identity") {
        CHECK(superop_norm(unitary_propagator(h, 0.0) - Superoperator::identity(4)) < 1e-14);
    }
    SUBCASE("group inverse") {
        auto u = unitary_propagator(h, 1.7) * unitary_propagator(h, -1.7);
        CHECK(superop_norm(u - Superoperator::identity(4)) < 1e-10);
    }
    SUBCASE("group law") {
        auto lhs = unitary_propagator(h, 0.8) * unitary_propagator(h, 0.9);
        auto rhs = unitary_propagator(h, 1.7);
        CHECK(superop_norm(lhs - rhs) < 1e-10);
    }
    SUBCASE("qubit rotation: sx -> -sx under H0 = sz/2 for t = pi") {
        auto u = unitary_propagator(HermitianOperator::from(0.5 * pauli_z()), M_PI);
        CHECK((u.apply(pauli_x()) + pauli_x()).norm() < 1e-12);
    }
    SUBCASE("isometry: norm 1") {
        for (double t : {0.3, 2.0, 17.0})
            CHECK(superop_norm(unitary_propagator(h, t)) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("bohr decomposition") {
    SUBCASE("two-level: frequencies {-1, 0, 1}") {
        Matrix h0 = Matrix::Zero(2, 2);
        h0(1, 1) = 1.0;
        auto bd = bohr_decompose(HermitianOperator::from(h0));
        REQUIRE(bd.bohr_frequencies.size() == 3);
        CHECK(bd.bohr_frequencies[0] == doctest::Approx(-1.0));
        CHECK(bd.bohr_frequencies[1] == doctest::Approx(0.0));
        CHECK(bd.bohr_frequencies[2] == doctest::Approx(1.0));
    }
    SUBCASE("scalar H0: single zero frequency, Q = identity") {
        auto bd = bohr_decompose(HermitianOperator::from(2.5 * Matrix::Identity(3, 3)));
        REQUIRE(bd.bohr_frequencies.size() == 1);
        CHECK(bd.bohr_frequencies[0] == 0.0);
        CHECK(superop_norm(bd.projectors[0] - Superoperator::identity(3)) < 1e-12);
    }
    SUBCASE("diag(0,1,3): frequencies {0,±1,±2,±3}, seven projectors sum to identity") {
        Matrix h0 = Matrix::Zero(3, 3);
        h0(1, 1) = 1.0;
        h0(2, 2) = 3.0;
        auto bd = bohr_decompose(HermitianOperator::from(h0));
        REQUIRE(bd.bohr_frequencies.size() == 7);
        std::vector<double> expect = {-3, -2, -1, 0, 1, 2, 3};
        for (std::size_t k = 0; k < 7; ++k)
            CHECK(bd.bohr_frequencies[k] == doctest::Approx(expect[k]));
        Superoperator sum = Superoperator::zero(3);
        for (const auto& q : bd.projectors) sum += q;
        CHECK(superop_norm(sum - Superoperator::identity(3)) < 1e-10);
    }
    SUBCASE("invariants on random spectra") {
        Rng rng(15);
        for (Index d = 2; d <= 6; ++d) {
            auto h0 = HermitianOperator::from(rng.hermitian(d));
            auto bd = bohr_decompose(h0);
            Superoperator sum = Superoperator::zero(d);
            for (const auto& q : bd.projectors) sum += q;
            CHECK(superop_norm(sum - Superoperator::identity(d)) < 1e-10);
            for (std::size_t a = 0; a < bd.projectors.size(); ++a)
                for (std::size_t b = 0; b < bd.projectors.size(); ++b) {
                    const Superoperator prod = bd.projectors[a] * bd.projectors[b];
                    if (a == b)
                        CHECK(superop_norm(prod - bd.projectors[a]) < 1e-10);
                    else
                        CHECK(superop_norm(prod) < 1e-10);
                }
            CHECK(superop_norm(bd.z_superop() - commutator_superop(h0)) < 1e-10);
        }
    }
    SUBCASE("adjoint action diagonalization: U_t Q_w = e^{iwt} Q_w") {
        Rng rng(16);
        auto h0 = HermitianOperator::from(rng.hermitian(4));
        auto bd = bohr_decompose(h0);
        const double t = 0.618;
        auto u = unitary_propagator(h0, t);
        for (std::size_t k = 0; k < bd.bohr_frequencies.size(); ++k) {
            const Complex phase = std::exp(Complex(0, bd.bohr_frequencies[k] * t));
            CHECK(superop_norm(u * bd.projectors[k] - phase * bd.projectors[k]) < 1e-9);
        }
    }
    SUBCASE("ambiguous clustering is an error") {
        Matrix h0 = Matrix::Zero(4, 4);
        h0(1, 1) = 1.0;
        h0(2, 2) = 1.0 + 0.6e-9;
        h0(3, 3) = 1.0 + 1.2e-9;
        CHECK_THROWS_AS(bohr_decompose(HermitianOperator::from(h0), 1e-9), ValidationError);
    }
}

TEST_CASE("superoperator norm") {
    CHECK(superop_norm(Superoperator::identity(3)) == doctest::Approx(1.0));
    Rng rng(17);
    auto s = commutator_superop(HermitianOperator::from(rng.hermitian(3)));
    CHECK(superop_norm(2.0 * s) == doctest::Approx(2.0 * superop_norm(s)).epsilon(1e-12));
}

TEST_CASE("superoperator exponential") {
    Rng rng(18);
    const auto h = HermitianOperator::from(rng.hermitian(4));
    const auto z = commutator_superop(h);

    SUBCASE("t = 0 is identity") {
        CHECK(superop_norm(superop_exp(z, 0.0) - Superoperator::identity(4)) < 1e-14);
    }
    SUBCASE("agrees with the unitary propagator code path") {
        CHECK(superop_norm(superop_exp(z, 2.0) - unitary_propagator(h, 2.0)) < 1e-9);
    }
    SUBCASE("semigroup law") {
        auto lhs = superop_exp(z, 1.3);
        auto rhs = superop_exp(z, 0.6) * superop_exp(z, 0.7);
        CHECK(superop_norm(lhs - rhs) < 1e-9);
    }
}

TEST_CASE("norm_from_range matches the dense norm") {
    // map with range inside a 2-dimensional operator subspace
    Rng rng(19);
    const Index d = 3;
    const Matrix e0 = Matrix::Identity(d, d) / std::sqrt(3.0);
    Matrix e1 = rng.hermitian(d);
    e1 -= hs_inner(e0, e1) * e0;
    e1 /= hs_norm(e1);
    const Matrix f0 = rng.hermitian(d), f1 = rng.hermitian(d);
    Matrix m = vectorize(e0) * vectorize(f0).adjoint() + vectorize(e1) * vectorize(f1).adjoint();
    Superoperator s(d, m);
    const double dense = superop_norm(s);
    const double viarange = norm_from_range(
        {e0, e1}, [&](const Matrix& y) { return s.adjoint().apply(y); });
    CHECK(viarange == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("dawson function") {
    // brute-force long-double Simpson of exp(t^2) as the independent check
    auto oracle = [](double x) {
        const int n = 40000;
        long double h = x / n, acc = 0.0L;
        for (int k = 0; k <= n; ++k) {
            long double t = k * h;
            long double w = (k == 0 || k == n) ? 1.0L : (k % 2 ? 4.0L : 2.0L);
            acc += w * std::exp(t * t - (long double)x * x);
        }
        return static_cast<double>(acc * h / 3.0L);
    };
    for (double x : {0.1, 0.5, 1.0, 2.0, 3.7, 5.0, 9.0})
        CHECK(dawson(x) == doctest::Approx(oracle(x)).epsilon(1e-11));
    CHECK(dawson(-1.0) == doctest::Approx(-dawson(1.0)));
    CHECK(dawson(0.0) == 0.0);
}
