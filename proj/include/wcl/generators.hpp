// generators.hpp — Markovian generators: Gaussian-smoothed coupling, second
// order Hamiltonian, the time-averaged dissipator in Lindblad form, spectral
// averages, and the damped Davies kernel for contrast.
//
// Conventions. With H0 eigenvalues E_m and w_mn = E_m - E_n, the Heisenberg
// rotation is h(t) = exp(i H0 t) H' exp(-i H0 t). The Gaussian window of
// width T gives closed forms in the H0 eigenbasis:
//
//   L_T[m,n]  = pi^{1/4} sqrt(T) exp(-w_mn^2 T^2 / 2) H'[m,n]
//   H2_T[m,n] = 2 T exp(-w_mn^2 T^2 / 4)
//               sum_k H'[m,k] H'[k,n] Dawson((w_mk - w_kn) T / 2)
//
// and the dissipative generator K(rho) = -i[H2_T, rho] - [L_T, [L_T, rho]]
// equals the time-ordered double-commutator integral
//   -(1/sqrt(pi) T) int_{t2<t1} e^{-(t1^2+t2^2)/2T^2} [h(t1), [h(t2), rho]].

#pragma once

#include <optional>
#include <string>

#include "wcl/opcore.hpp"
#include "wcl/positivity.hpp"
#include "wcl/projections.hpp"

namespace wcl::gen {

struct QuadratureSettings {
    double target = 1e-10;       // absolute Frobenius tolerance
    double range_sigmas = 8.0;   // Gaussian truncation in units of the width
    int max_depth = 24;
};

struct QuadratureInfo {
    double achieved = 0.0;
    long evaluations = 0;
};

// Gaussian-windowed coupling operator (hermitian).
HermitianOperator smoothed_coupling(const HermitianOperator& h0, const HermitianOperator& hp,
                                    double t_window);

// Second-order Hamiltonian correction (hermitian).
HermitianOperator second_order_hamiltonian(const HermitianOperator& h0,
                                           const HermitianOperator& hp, double t_window);

// K(rho) = -i[H2, rho] - [L, [L, rho]] assembled from the two pieces above;
// full-space map, hermiticity preserving and traceless-output.
Superoperator unprojected_generator(const HermitianOperator& h0, const HermitianOperator& hp,
                                    double t_window);

// Projected generator P0 K P0. Refuses (GateError) unless [Z,P0] and the
// projected first-order coupling both vanish within gate_tol.
Superoperator projected_generator(const proj::KrausProjection& p, const HermitianOperator& h0,
                                  const HermitianOperator& hp, double t_window,
                                  double gate_tol = 1e-10);

// Same object assembled independently from the Bohr-resolved memory kernel
// A01(t1) A10(t2) (equivalent route when the first-order gate holds).
Superoperator projected_generator_memory_form(const proj::KrausProjection& p,
                                              const HermitianOperator& h0,
                                              const HermitianOperator& hp, double t_window);

// sum_w Q_w K Q_w; removes off-diagonal Bohr components. Idempotent, and
// commutes with the unperturbed propagation.
Superoperator spectral_average(const Superoperator& k, const BohrDecomposition& bohr);

// Gaussian time average: the (w, w') Bohr component of K is damped by
// exp(-(w - w')^2 T^2 / 4); converges to spectral_average as T grows.
Superoperator gaussian_time_average(const Superoperator& k, const BohrDecomposition& bohr,
                                    double t_window);
Superoperator gaussian_time_average(const Superoperator& k, const HermitianOperator& h0,
                                    double t_window);

// Half-line memory-kernel integral with Gaussian damping,
//   int_0^inf dx e^{-(x/2)^2/T^2} A(x/2) A(-x/2),
// evaluated by adaptive quadrature truncated at range_sigmas * 2T; the
// undamped integral does not converge for discrete spectra.
Superoperator symmetrized_kernel(const HermitianOperator& h0, const HermitianOperator& hp,
                                 double t_damp, const QuadratureSettings& quad = {},
                                 QuadratureInfo* info = nullptr);

// Projected version P0 (.) P0 of the above.
Superoperator symmetrized_kernel_projected(const proj::KrausProjection& p,
                                           const HermitianOperator& h0,
                                           const HermitianOperator& hp, double t_damp,
                                           const QuadratureSettings& quad = {},
                                           QuadratureInfo* info = nullptr);

// Davies kernel int_0^inf e^{-eps x} U_{-x} A01 U_x A10 dx in closed form:
// Bohr component (w, w') carries weight 1/(eps + i(w - w')). A demonstration
// object: the eps -> 0 limit diverges on resonant components for discrete
// spectra, and the generated dynamics need not be positive.
Superoperator damped_davies(const proj::KrausProjection& p, const HermitianOperator& h0,
                            const HermitianOperator& hp, double eps);

// ||-i[H', .]|| induced by the Hilbert-Schmidt norm = spectral spread of H'.
double commutator_norm(const HermitianOperator& hp);

// Completed collision time T(lambda) = 1 / (|lambda| ||A||).
double completed_collision_time(double lambda, double a_norm);
double completed_collision_time(double lambda, const Superoperator& a);

struct GateReports {
    proj::CompatibilityReport compatibility;
    proj::FirstOrderReport first_order;
};

// Full generator Z0 + lambda^2 K_T with its ingredients. Dense superoperators
// are materialized up to proj::KrausProjection::dense_cap; the transported
// restriction onto the image block algebra is always available and is what
// propagation and positivity audits consume.
struct GeneratorBundle {
    double observation_time = 0.0;  // T
    double coupling = 0.0;          // lambda

    HermitianOperator coupling_op;       // L_T
    HermitianOperator hamiltonian_shift; // H2_T
    proj::KrausProjection projection;
    GateReports gates;
    std::string construction;  // provenance: assembly route and gate residuals

    std::optional<Superoperator> unprojected;  // K before projection
    std::optional<Superoperator> dissipator;   // P0 K P0
    std::optional<Superoperator> full;         // Z0 + lambda^2 P0 K P0

    cp::ImageRestriction restriction;
    Superoperator restricted_full;  // transported full generator on M_m

    Index dim() const { return projection.dim; }
};

GeneratorBundle build_generator(const proj::KrausProjection& p, const HermitianOperator& h0,
                                const HermitianOperator& hp, double lambda, double t_window,
                                double gate_tol = 1e-10);

// Positivity audit of the bundle: generator conditional CP plus per-t
// semigroup CP/TP on the image.
cp::SemigroupAudit audit_bundle(const GeneratorBundle& bundle, const std::vector<double>& t_grid,
                                double cp_tol = 1e-8, double tp_tol = 1e-9);

}  // namespace wcl::gen
