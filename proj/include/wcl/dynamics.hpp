// dynamics.hpp — exact projected propagation, Markovian semigroup
// propagation, memory-kernel residual diagnostics, and weak-coupling
// convergence sweeps.

#pragma once

#include <optional>
#include <vector>

#include "wcl/generators.hpp"
#include "wcl/opcore.hpp"
#include "wcl/projections.hpp"

namespace wcl::dyn {

// Conjugation by exp(-i(H0 + lambda H')t), valid at any dimension.
struct ExactPropagator {
    Index dim = 0;
    RealVector evals;
    Matrix vecs;

    Matrix apply(const Matrix& x, double t) const;          // e^{-iHt} X e^{+iHt}
    Matrix apply_adjoint(const Matrix& y, double t) const;  // e^{+iHt} Y e^{-iHt}
    Superoperator matrix(double t) const;
};

ExactPropagator exact_propagator(const HermitianOperator& h0, const HermitianOperator& hp,
                                 double lambda);

// P0 exp((Z + lambda A) t) P0, assembled through the superoperator
// exponential; cross-checked in tests against Hamiltonian conjugation.
Superoperator exact_projected(const proj::KrausProjection& p, const HermitianOperator& h0,
                              const HermitianOperator& hp, double lambda, double t);

// exp(L t) for the bundle's full generator (identity on the complement).
Superoperator markov_propagator(const gen::GeneratorBundle& bundle, double t);

// P0 exp(L t) P0: the form comparable with the exact projected propagator.
Superoperator markov_on_image(const gen::GeneratorBundle& bundle, double t);

struct PropagatorGrid {
    enum class Kind { Exact, Semigroup };
    Kind kind = Kind::Exact;
    std::vector<double> times;
    std::vector<Superoperator> propagators;
};

PropagatorGrid exact_grid(const proj::KrausProjection& p, const HermitianOperator& h0,
                          const HermitianOperator& hp, double lambda,
                          std::vector<double> times);
PropagatorGrid semigroup_grid(const gen::GeneratorBundle& bundle, std::vector<double> times);

// Residual of the integrated memory-kernel identity
//   W_t = U_t P0 + lambda^2 int_0^t ds int_0^s du
//         U_{t-s} A01 U^lambda_{s-u} A10 W_u,
// with U^lambda generated by Z + lambda A11, evaluated on a uniform grid by
// second-order (trapezoid) quadrature. Returns the maximum over the grid.
double nz_residual(const proj::KrausProjection& p, const HermitianOperator& h0,
                   const HermitianOperator& hp, double lambda,
                   const std::vector<double>& t_grid);

// sup over a uniform grid on [0, tau_bar / lambda^2] (endpoints included) of
// ||W_t - W^markov_t|| in the Hilbert-Schmidt-induced norm. Dimension
// dispatch: dense norms below the dense cap, exact low-rank factorization
// through the image basis above it.
double sup_error(const proj::KrausProjection& p, const HermitianOperator& h0,
                 const HermitianOperator& hp, double lambda,
                 const gen::GeneratorBundle& bundle, double tau_bar, int n_points = 64,
                 bool force_structured = false);

// || U_{-t} W_t - P0 || at t = sigma_time / lambda^2; the slow-variation
// magnitude of the interaction-picture dynamics.
double interaction_distance(const proj::KrausProjection& p, const HermitianOperator& h0,
                            const HermitianOperator& hp, double lambda, double sigma_time);

struct ConvergenceReport {
    std::vector<double> lambdas;
    double xi = 1.0;
    double t_tilde = 0.0;            // window prefactor actually used
    bool collision_formula = false;  // t_tilde derived from 1/||A||
    double tau_bar = 0.0;
    int n_points = 0;
    std::vector<double> windows;     // T(lambda) per run
    std::vector<double> t_max;       // lambda^{-2} tau_bar per run
    std::vector<double> sup_errors;
    bool monotone_decreasing = false;  // each successive error <= 0.9x previous
};

// Per-lambda bundles built at T(lambda) = |lambda|^{-xi} t_tilde; passing no
// t_tilde selects the completed-collision-time prefactor 1 / ||[H',.]||.
ConvergenceReport convergence_sweep(const proj::KrausProjection& p, const HermitianOperator& h0,
                                    const HermitianOperator& hp, std::vector<double> lambdas,
                                    double xi, std::optional<double> t_tilde, double tau_bar,
                                    int n_points = 64);

}  // namespace wcl::dyn
