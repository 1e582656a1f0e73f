// qfgr.hpp — coupled block master equation: scattering operators between
// orthogonal sectors, the population-coupling right-hand side, adaptive
// integration, and steady-state scans.

#pragma once

#include <functional>
#include <vector>

#include "wcl/generators.hpp"
#include "wcl/opcore.hpp"
#include "wcl/projections.hpp"

namespace wcl::qfgr {

// density-matrix blocks rho_a = V_a rho V_a on the index sets of a block
// projection; sum of traces is conserved under the flow
struct QuantumPopulations {
    std::vector<std::vector<Index>> blocks;  // index sets
    std::vector<Matrix> rho;                 // one matrix per block, block-local size
    double time = 0.0;

    double global_trace() const;
    double min_eigenvalue() const;  // over all blocks
};

QuantumPopulations populations_from_state(const std::vector<std::vector<Index>>& blocks,
                                          const Matrix& rho_full);
Matrix assemble_state(const QuantumPopulations& pops, Index dim);

// D_ab = V_a L_T V_b restricted to the (a, b) corner; the diagonal entries
// vanish whenever the projected first-order coupling vanishes
struct ScatteringSet {
    std::vector<std::vector<Index>> blocks;
    std::vector<std::vector<Matrix>> d;  // d[a][b], size m_a x m_b
    double t_window = 0.0;

    double max_diagonal_norm() const;
};

ScatteringSet scattering_operators(const std::vector<std::vector<Index>>& blocks,
                                   const HermitianOperator& coupling_op);

// block-local pieces of H0 and H2
std::vector<Matrix> block_restrict(const std::vector<std::vector<Index>>& blocks,
                                   const Matrix& op);

// d/dt rho_a = -i[H_a, rho_a] + lambda^2 ( -i[H2_a, rho_a]
//              - sum_{b != a} {D_ba^dag D_ba, rho_a}
//              + 2 sum_{b != a} D_ab rho_b D_ab^dag ),
// the block restriction of Z + lambda^2 (-i[H2, .] - [L, [L, .]]); the
// double-commutator normalization puts weight 2 on the gain channel.
std::vector<Matrix> qfgr_rhs(const QuantumPopulations& pops, const ScatteringSet& scat,
                             const std::vector<Matrix>& h_blocks,
                             const std::vector<Matrix>& h2_blocks, double lambda);

// adaptive embedded Runge-Kutta (Dormand-Prince 5(4)), per-step relative
// tolerance `tol`; throws on step-size underflow with the time reached
std::vector<QuantumPopulations> evolve_qfgr(const QuantumPopulations& initial,
                                            const ScatteringSet& scat,
                                            const std::vector<Matrix>& h_blocks,
                                            const std::vector<Matrix>& h2_blocks, double lambda,
                                            const std::vector<double>& t_grid,
                                            double tol = 1e-10);

struct SteadyState {
    double t_window = 0.0;
    int kernel_dim = 0;
    bool unique = false;
    QuantumPopulations populations;
    double residual = 0.0;  // ||rhs|| at the fixed point
};

// fixed points of the flow on the block-diagonal subspace per window value;
// non-unique kernels are flagged, not resolved
using ScatteringBuilder = std::function<ScatteringSet(double t_window)>;
std::vector<SteadyState> steady_state_scan(const ScatteringBuilder& builder,
                                           const std::vector<Matrix>& h_blocks,
                                           const std::function<std::vector<Matrix>(double)>&
                                               h2_builder,
                                           const std::vector<double>& t_grid, double lambda);

}  // namespace wcl::qfgr
