// positivity.hpp — Choi matrices, GKS canonical form, CP/TP verdicts
//
// The image of a projection is identified with a direct sum of full matrix
// algebras A = (+)_k M_{m_k} inside M_m, m = sum m_k (one summand per block;
// a single summand for the partial-trace kind). The identification is a
// *-isomorphism on the dual (Heisenberg) side, so complete positivity of
// restricted maps transports to ordinary complete positivity on A, where it
// is testable: a map on A composed with the block conditional expectation E
// is CP iff its Choi matrix is positive semidefinite, sector by sector.

#pragma once

#include <functional>
#include <vector>

#include "wcl/opcore.hpp"
#include "wcl/projections.hpp"

namespace wcl::cp {

// Choi matrix C = sum_ij E_ij (x) S(E_ij); PSD iff S is completely positive.
struct ChoiMatrix {
    Index dim = 0;
    Matrix mat;

    double min_eigenvalue() const;
};

ChoiMatrix choi(const Superoperator& s);

struct CpVerdict {
    bool pass = false;
    double choi_floor = 0.0;  // smallest Choi eigenvalue
};

CpVerdict is_cp(const Superoperator& s, double tol = 1e-8);

struct TpVerdict {
    bool pass = false;
    double defect = 0.0;  // max_rho |Tr(S rho) - Tr rho| over a spanning set
};

TpVerdict is_trace_preserving(const Superoperator& s, double tol = 1e-9);

// max |Tr(S rho)| over the matrix-unit spanning set; 0 for generators
double trace_output_defect(const Superoperator& s);

// Hermitian, traceless, HS-orthonormal basis of M_n (generalized Gell-Mann
// construction, deterministic order: off-diagonal re/im pairs, then diagonal).
std::vector<Matrix> gell_mann_traceless(Index n);

// Canonical decomposition of a hermiticity-preserving map L acting on the
// block-diagonal algebra A = (+)_k M_{m_k} in M_m (single block: all of M_m):
//
//   L(rho) = sum_k [ -i[H_k, rho_k] + {G_k, rho_k} ]  +  sum_{ab} g_ab F_a rho F_b
//
// over the traceless basis {F_a} = per-block Gell-Manns followed by
// cross-block matrix units. The semigroup e^{Lt} is completely positive on A
// for all t >= 0 iff the coefficient matrix g is PSD.
struct GKSForm {
    std::vector<Index> block_dims;
    Matrix effective_hamiltonian;  // (+)_k H_k
    Matrix drift;                  // (+)_k G_k  (loss part; -1/2 sum F F for TP maps)
    Matrix gks_matrix;             // hermitian coefficient matrix over `basis`
    std::vector<Matrix> basis;     // m x m operators, aligned with gks_matrix
    double min_eigenvalue = 0.0;
    double reconstruction_residual = 0.0;
    double hermiticity_residual = 0.0;

    bool conditionally_cp(double tol = 1e-8) const { return min_eigenvalue >= -tol; }
};

GKSForm gks_canonical(const Superoperator& l, const std::vector<Index>& block_dims);
inline GKSForm gks_canonical(const Superoperator& l) {
    return gks_canonical(l, {l.dim});
}

// Identification of the image of a projection with the block algebra in M_m.
struct ImageRestriction {
    std::vector<Index> block_dims;
    Index m = 0;
    Index dim = 0;  // ambient Hilbert dimension d

    std::function<Matrix(const Matrix&)> embed;    // m-space block matrix -> B(H)
    std::function<Matrix(const Matrix&)> extract;  // B(H) -> m-space block matrix

    // coordinate projector onto block-supported matrix units of M_m
    Matrix block_mask;  // m^2 x m^2 diagonal 0/1

    // m-space matrix of extract . S . embed . E
    Superoperator transport(const Superoperator& s) const;
    Superoperator transport(const std::function<Matrix(const Matrix&)>& apply) const;
};

ImageRestriction image_restriction(const proj::KrausProjection& p);

// Per-t CP/TP verdicts of the degenerate semigroup e^{Lt} E on the block
// algebra, plus the generator-level conditional-CP verdict.
struct SemigroupAuditRow {
    double t = 0.0;
    double choi_floor = 0.0;
    double trace_defect = 0.0;
    bool cp = false;
    bool tp = false;
};

struct SemigroupAudit {
    GKSForm generator_form;
    std::vector<SemigroupAuditRow> rows;
    bool pass = true;
};

SemigroupAudit cp_semigroup_audit(const Superoperator& generator_m,
                                  const std::vector<Index>& block_dims,
                                  const std::vector<double>& t_grid, double cp_tol = 1e-8,
                                  double tp_tol = 1e-9);

}  // namespace wcl::cp
