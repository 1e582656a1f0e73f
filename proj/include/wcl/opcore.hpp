// opcore.hpp — dense operators, superoperators, vectorization, Bohr decomposition
//
// Vectorization convention, fixed once for the whole library:
//   vec(X)[i + d*j] = X(i, j)            (column stacking)
//   vec(A X B)      = kron(B^T, A) vec(X)
// with kron(P, Q)[i1*d + i2, j1*d + j2] = P(i1, j1) Q(i2, j2).
// Every sandwich formula below derives from this identity.

#pragma once

#include <functional>
#include <vector>

#include "wcl/core.hpp"

namespace wcl {

// Hermitian d x d operator (energy units, hbar = 1). Construction validates
// hermiticity to 1e-12 relative.
struct HermitianOperator {
    Matrix mat;

    static HermitianOperator from(Matrix m, double rel_tol = 1e-12);
    Index dim() const { return mat.rows(); }
};

// Density matrix: hermitian (1e-12), unit trace (1e-10), psd (-1e-10 floor).
struct DensityMatrix {
    Matrix mat;

    static DensityMatrix from(Matrix m, double herm_tol = 1e-12, double trace_tol = 1e-10,
                              double eig_floor = -1e-10);
    Index dim() const { return mat.rows(); }
};

// Linear map on operators, stored as a d^2 x d^2 matrix acting on vec(X).
struct Superoperator {
    Index dim = 0;  // underlying Hilbert dimension d
    Matrix mat;     // d^2 x d^2

    Superoperator() = default;
    Superoperator(Index d, Matrix m);

    static Superoperator identity(Index d);
    static Superoperator zero(Index d);

    Matrix apply(const Matrix& x) const;

    Superoperator operator*(const Superoperator& rhs) const;
    Superoperator operator+(const Superoperator& rhs) const;
    Superoperator operator-(const Superoperator& rhs) const;
    Superoperator& operator+=(const Superoperator& rhs);
    Superoperator& operator-=(const Superoperator& rhs);
    friend Superoperator operator*(Complex a, const Superoperator& s) {
        return {s.dim, a * s.mat};
    }
    friend Superoperator operator*(double a, const Superoperator& s) { return {s.dim, a * s.mat}; }

    // Hilbert-Schmidt adjoint; for hermiticity-preserving maps this is also
    // the trace dual (Heisenberg picture).
    Superoperator adjoint() const { return {dim, mat.adjoint()}; }
};

Vector vectorize(const Matrix& x);
Matrix devectorize(const Vector& v, Index d);

Matrix kron(const Matrix& a, const Matrix& b);

// X -> A X B
Superoperator sandwich_superop(const Matrix& a, const Matrix& b);

// von Neumann generator S(rho) = -i [H, rho]; maps hermitian to hermitian,
// output is traceless.
Superoperator commutator_superop(const HermitianOperator& h);

// U_t rho = exp(-i H0 t) rho exp(+i H0 t); an isometry of the operator space.
Superoperator unitary_propagator(const HermitianOperator& h0, double t);

// Spectral norm (largest singular value) of the d^2 x d^2 matrix, i.e. the
// operator norm induced by the Hilbert-Schmidt norm.
double superop_norm(const Superoperator& s);
double matrix_spec_norm(const Matrix& m);

// exp(S t) by scaling-and-squaring Pade approximation.
Superoperator superop_exp(const Superoperator& s, double t);
Matrix matrix_exp(const Matrix& m);

// Eigen-data of H0 together with the clustered Bohr frequencies w = E_m - E_n
// and the spectral projectors Q_w of the adjoint generator Z = -i[H0, .].
struct BohrDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;                   // unitary, columns are eigenvectors
    std::vector<double> bohr_frequencies;  // sorted, one representative per cluster
    std::vector<Superoperator> projectors; // Q_w, aligned with bohr_frequencies
    double cluster_tol = 0.0;

    Index dim() const { return eigenvalues.size(); }
    Index frequency_count() const { return static_cast<Index>(bohr_frequencies.size()); }

    // Z = sum_w i w Q_w
    Superoperator z_superop() const;
};

// cluster_tol <= 0 picks the default 1e-9 * max(1, spectral spread).
// Two frequency clusters closer than cluster_tol, or a cluster whose internal
// spread exceeds cluster_tol, raise ValidationError: the averaging maps
// downstream depend on an unambiguous clustering.
BohrDecomposition bohr_decompose(const HermitianOperator& h0, double cluster_tol = -1.0);

// Spectral norm of a map M whose range is contained in span{range_ops}. Only
// the adjoint action M^dag is needed; exact, cheap when the range is small.
// Used where the full d^2 x d^2 matrix is too large to materialize.
double norm_from_range(const std::vector<Matrix>& range_ops,
                       const std::function<Matrix(const Matrix&)>& apply_adjoint);

// Hilbert-Schmidt inner product <A,B> = Tr(A^dag B) and norm.
Complex hs_inner(const Matrix& a, const Matrix& b);
double hs_norm(const Matrix& a);

// Square root of a positive semidefinite hermitian matrix (negative
// eigenvalue noise clipped at zero).
Matrix psd_sqrt(const Matrix& a);

// Gram-Schmidt over the HS inner product; drops near-null vectors.
std::vector<Matrix> orthonormalize_ops(const std::vector<Matrix>& ops, double drop_tol = 1e-12);

}  // namespace wcl
