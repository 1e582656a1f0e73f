// projections.hpp — Kraus-form projection superoperators and their hypothesis checks

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcl/opcore.hpp"

namespace wcl::proj {

enum class Kind { PartialTrace, Diagonal, BlockDiagonal, Entangling, Custom };

const char* kind_name(Kind k);

// Trace over the second (bath) tensor factor of a (dA*dB) x (dA*dB) operator.
Matrix trace_out_bath(const Matrix& rho, Index dim_a, Index dim_b);
// Trace over the first (system) factor.
Matrix trace_out_system(const Matrix& rho, Index dim_a, Index dim_b);

// Family {C_n, D_n} of bath operators defining an entangling projection.
// Derived A_n = C_n^dag C_n and B_n = D_n^dag D_n must satisfy
//   D_n^dag D_n' = delta_{nn'} B_n,   sum_n A_n = 1,
//   A_n A_n'     = delta_{nn'} A_n,   Tr(A_n B_n') = delta_{nn'}.
// Construction validates all four and reports which one failed, with the
// residual norm and the offending index pair.
struct EntanglingFamily {
    Index dim_b = 0;
    std::vector<Matrix> c_ops, d_ops;  // C_n, D_n
    std::vector<Matrix> a_ops, b_ops;  // A_n, B_n

    static EntanglingFamily from(std::vector<Matrix> c_ops, std::vector<Matrix> d_ops,
                                 double tol = 1e-10);

    // Valid family from a seeded source: the bath basis is split into
    // `sectors` contiguous groups, A_n projects onto group n and B_n is a
    // random density supported there (diagonal on request); an optional Haar
    // rotation mixes the groups.
    static EntanglingFamily random(Rng& rng, Index dim_b, Index sectors, bool rotated = false,
                                   bool diagonal = false);

    Index size() const { return static_cast<Index>(c_ops.size()); }
};

// Projection P0(rho) = sum_a V_a rho V_a^dag with a completely positive dual
// P0~(X) = sum_a V_a^dag X V_a satisfying P0~(1) = 1. Construction validates
// idempotence, dual unitality and trace preservation.
//
// The Kraus list and the d^2 x d^2 matrix are materialized up to d <=
// dense_cap (the matrix/kraus consistency is asserted there); beyond that the
// PartialTrace kind operates through its tensor structure only.
struct KrausProjection {
    Kind kind = Kind::Custom;
    Index dim = 0;

    std::vector<Matrix> kraus;

    // kind-specific parameters
    Index dim_a = 0, dim_b = 0;                // PartialTrace / Entangling
    Matrix sigma;                              // PartialTrace reference state
    Matrix basis;                              // Diagonal: unitary whose columns define it
    std::vector<std::vector<Index>> blocks;    // BlockDiagonal index sets
    std::optional<EntanglingFamily> family;    // Entangling

    Matrix apply(const Matrix& rho) const;       // P0
    Matrix apply_dual(const Matrix& x) const;    // P0~ (Heisenberg picture)
    Matrix apply_complement(const Matrix& rho) const { return rho - apply(rho); }

    bool has_dense() const { return dense_matrix_.has_value(); }
    const Superoperator& matrix() const;
    Superoperator complement_matrix() const;

    // orthonormal (Hilbert-Schmidt) operator basis of the image of P0
    const std::vector<Matrix>& image_basis() const { return image_basis_; }

    static constexpr Index dense_cap = 32;

    // internal: finalize caches + invariant checks (builders call this)
    void finalize(double tol = 1e-10);

private:
    std::optional<Superoperator> dense_matrix_;
    std::vector<Matrix> image_basis_;
};

// P0(rho) = Tr_B(rho) (x) sigma. Kraus family from the eigendecomposition of
// sigma; zero eigenvalues drop their Kraus operators.
KrausProjection partial_trace_projection(Index dim_a, Index dim_b, const DensityMatrix& sigma);

// P0(rho) = sum_a |a><a| rho |a><a| over the columns of a unitary basis.
KrausProjection diagonal_projection(const Matrix& basis);

// P0(rho) = sum_a V_a rho V_a for orthogonal projectors V_a onto the index
// blocks; blocks must partition {0..dim-1}.
KrausProjection block_diagonal_projection(std::vector<std::vector<Index>> blocks, Index dim);

// Kraus operators V_{aa'} = 1_A (x) sum_n D_n^dag |a><a'| C_n. The resulting
// map is cross-checked against the closed form
//   P0(rho) = sum_n Tr_B(rho (1 (x) A_n)) (x) B_n.
KrausProjection entangling_projection(const EntanglingFamily& family, Index dim_a);

struct CompatibilityReport {
    double residual = 0.0;  // ||Z P0 - P0 Z||
    double tol = 0.0;
    bool pass = false;
    // Entangling / PartialTrace detail: per-n commutator residuals with H_B,
    // and the residual of splitting H0 = H_A (x) 1 + 1 (x) H_B.
    std::vector<double> bath_commutators_a;  // ||[H_B, A_n]||
    std::vector<double> bath_commutators_b;  // ||[H_B, B_n]|| (or ||[H_B, sigma]||)
    double split_residual = 0.0;
    bool has_tensor_detail = false;
};

CompatibilityReport check_dynamical_compatibility(const KrausProjection& p,
                                                  const HermitianOperator& h0,
                                                  double tol = 1e-10);

struct FirstOrderReport {
    double residual = 0.0;  // ||P0 A P0|| for A = -i[H', .]
    double tol = 0.0;
    bool pass = false;
};

FirstOrderReport check_no_first_order(const KrausProjection& p, const HermitianOperator& hp,
                                      double tol = 1e-10);

struct AuditRow {
    std::string check;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    bool pass = true;
    void add(std::string check, double residual, double threshold);
};

// Residuals for idempotence, complete positivity (Choi floor), dual unitality
// and trace preservation; Entangling adds the family hypotheses, the
// two-formula cross-check and the image subalgebra closure.
AuditReport projection_audit(const KrausProjection& p, std::uint64_t seed = 2024);

}  // namespace wcl::proj
