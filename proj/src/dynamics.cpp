#include "wcl/dynamics.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace wcl::dyn {

namespace {

Matrix phase_conjugate(const RealVector& evals, const Matrix& vecs, const Matrix& x, double t) {
    const Index d = evals.size();
    Vector ph(d);
    for (Index k = 0; k < d; ++k) ph(k) = std::exp(Complex(0, -evals(k) * t));
    const Matrix inner = vecs.adjoint() * x * vecs;
    Matrix rotated(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) rotated(i, j) = ph(i) * inner(i, j) * std::conj(ph(j));
    return vecs * rotated * vecs.adjoint();
}

}  // namespace

Matrix ExactPropagator::apply(const Matrix& x, double t) const {
    return phase_conjugate(evals, vecs, x, t);
}

Matrix ExactPropagator::apply_adjoint(const Matrix& y, double t) const {
    return phase_conjugate(evals, vecs, y, -t);
}

Superoperator ExactPropagator::matrix(double t) const {
    Vector ph(dim);
    for (Index k = 0; k < dim; ++k) ph(k) = std::exp(Complex(0, -evals(k) * t));
    const Matrix u = vecs * ph.asDiagonal() * vecs.adjoint();
    return sandwich_superop(u, u.adjoint());
}

ExactPropagator exact_propagator(const HermitianOperator& h0, const HermitianOperator& hp,
                                 double lambda) {
    if (h0.dim() != hp.dim()) throw DimensionError("exact_propagator: dimension mismatch");
    ExactPropagator prop;
    prop.dim = h0.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0.mat + lambda * hp.mat);
    prop.evals = es.eigenvalues();
    prop.vecs = es.eigenvectors();
    return prop;
}

Superoperator exact_projected(const proj::KrausProjection& p, const HermitianOperator& h0,
                              const HermitianOperator& hp, double lambda, double t) {
    const Superoperator full = commutator_superop(h0) + lambda * commutator_superop(hp);
    return p.matrix() * superop_exp(full, t) * p.matrix();
}

Superoperator markov_propagator(const gen::GeneratorBundle& bundle, double t) {
    if (!bundle.full)
        throw Error("markov_propagator: dense generator unavailable at this dimension");
    return superop_exp(*bundle.full, t);
}

Superoperator markov_on_image(const gen::GeneratorBundle& bundle, double t) {
    const Superoperator full_exp = markov_propagator(bundle, t);
    const Superoperator& p0 = bundle.projection.matrix();
    return p0 * full_exp * p0;
}

PropagatorGrid exact_grid(const proj::KrausProjection& p, const HermitianOperator& h0,
                          const HermitianOperator& hp, double lambda,
                          std::vector<double> times) {
    const ExactPropagator prop = exact_propagator(h0, hp, lambda);
    PropagatorGrid grid;
    grid.kind = PropagatorGrid::Kind::Exact;
    grid.times = std::move(times);
    for (double t : grid.times) {
        const Superoperator v = prop.matrix(t);
        grid.propagators.push_back(p.matrix() * v * p.matrix());
    }
    return grid;
}

PropagatorGrid semigroup_grid(const gen::GeneratorBundle& bundle, std::vector<double> times) {
    PropagatorGrid grid;
    grid.kind = PropagatorGrid::Kind::Semigroup;
    grid.times = std::move(times);
    for (double t : grid.times) grid.propagators.push_back(markov_propagator(bundle, t));
    return grid;
}

double nz_residual(const proj::KrausProjection& p, const HermitianOperator& h0,
                   const HermitianOperator& hp, double lambda,
                   const std::vector<double>& t_grid) {
    const Index d = h0.dim();
    const std::size_t n = t_grid.size();
    if (n < 2) throw Error("nz_residual: need at least two grid points");
    if (std::abs(t_grid.front()) > 1e-12) throw Error("nz_residual: grid must start at 0");
    const double h = t_grid[1] - t_grid[0];
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(t_grid[k] - static_cast<double>(k) * h) > 1e-9 * std::max(1.0, t_grid.back()))
            throw Error("nz_residual: grid must be uniform");

    const Superoperator z = commutator_superop(h0);
    const Superoperator a = commutator_superop(hp);
    const Superoperator& p0 = p.matrix();
    const Superoperator p1 = p.complement_matrix();
    const Matrix a01 = (p0 * a * p1).mat;
    const Matrix a10 = (p1 * a * p0).mat;

    // propagator tables on the grid
    const ExactPropagator exact = exact_propagator(h0, hp, lambda);
    const ExactPropagator unperturbed = exact_propagator(h0, hp, 0.0);
    std::vector<Matrix> u(n), w(n), ulam(n);
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = unperturbed.matrix(t_grid[k]).mat;
        w[k] = (p0.mat * exact.matrix(t_grid[k]).mat * p0.mat).eval();
    }
    const Matrix gen_lam = z.mat + lambda * (p1 * a * p1).mat;
    const Matrix step = (gen_lam * h).exp();
    ulam[0] = Matrix::Identity(d * d, d * d);
    for (std::size_t k = 1; k < n; ++k) ulam[k] = step * ulam[k - 1];

    // inner convolution G(s) = int_0^s U^lam_{s-u} A10 W_u du (trapezoid)
    std::vector<Matrix> ulam_a10(n), g(n);
    for (std::size_t k = 0; k < n; ++k) ulam_a10[k] = ulam[k] * a10;
    for (std::size_t k = 0; k < n; ++k) {
        Matrix acc = Matrix::Zero(d * d, d * d);
        if (k > 0)
            for (std::size_t j = 0; j <= k; ++j) {
                const double wgt = (j == 0 || j == k) ? 0.5 : 1.0;
                acc += wgt * (ulam_a10[k - j] * w[j]);
            }
        g[k] = h * acc;
    }
    // outer convolution F(t) = int_0^t U_{t-s} A01 G(s) ds
    std::vector<Matrix> u_a01(n);
    for (std::size_t k = 0; k < n; ++k) u_a01[k] = u[k] * a01;
    double worst = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        Matrix acc = Matrix::Zero(d * d, d * d);
        if (m > 0)
            for (std::size_t k = 0; k <= m; ++k) {
                const double wgt = (k == 0 || k == m) ? 0.5 : 1.0;
                acc += wgt * (u_a01[m - k] * g[k]);
            }
        const Matrix rhs = u[m] * p0.mat + (lambda * lambda * h) * acc;
        worst = std::max(worst, matrix_spec_norm(w[m] - rhs));
    }
    return worst;
}

namespace {

// spectral norm of (W_t - M_t) when both kill the complement of the image and
// land inside it: exact through the Gram matrix of the adjoint images of an
// orthonormal image basis
double structured_difference_norm(const proj::KrausProjection& p, const ExactPropagator& exact,
                                  const gen::GeneratorBundle& bundle, const Matrix& exp_rt,
                                  double t) {
    const auto& basis = p.image_basis();
    std::vector<Matrix> w(basis.size());
    const Index da = p.dim_a, db = p.dim_b;
    const Matrix id_b = Matrix::Identity(db, db);
    for (std::size_t j = 0; j < basis.size(); ++j) {
        // exact adjoint: P0~ V_t~ P0~
        const Matrix y1 = p.apply_dual(basis[j]);
        const Matrix y2 = exact.apply_adjoint(y1, t);
        const Matrix exact_adj = p.apply_dual(y2);
        // markov adjoint: (embed . e^{Rt} . extract . P0)^dag
        const Matrix phi_adj =
            proj::trace_out_bath(basis[j] * kron(Matrix::Identity(da, da), bundle.projection.sigma),
                                 da, db);
        const Matrix z = devectorize(exp_rt.adjoint() * vectorize(phi_adj), da);
        const Matrix markov_adj = kron(z, id_b);
        w[j] = exact_adj - markov_adj;
    }
    Matrix gram(basis.size(), basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j) gram(i, j) = hs_inner(w[i], w[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

double sup_error(const proj::KrausProjection& p, const HermitianOperator& h0,
                 const HermitianOperator& hp, double lambda,
                 const gen::GeneratorBundle& bundle, double tau_bar, int n_points,
                 bool force_structured) {
    if (n_points < 16) throw Error("sup_error: need at least 16 grid points");
    const double t_max = (lambda == 0.0) ? tau_bar : tau_bar / (lambda * lambda);
    const ExactPropagator exact = exact_propagator(h0, hp, lambda);

    double worst = 0.0;
    if (p.has_dense() && !force_structured) {
        const Superoperator& p0 = p.matrix();
        for (int k = 0; k < n_points; ++k) {
            const double t = t_max * k / (n_points - 1);
            const Superoperator w = p0 * exact.matrix(t) * p0;
            const Superoperator m = markov_on_image(bundle, t);
            worst = std::max(worst, superop_norm(w - m));
        }
    } else {
        if (p.kind != proj::Kind::PartialTrace)
            throw Error("sup_error: structured path requires the partial-trace kind");
        const Matrix& r = bundle.restricted_full.mat;
        for (int k = 0; k < n_points; ++k) {
            const double t = t_max * k / (n_points - 1);
            const Matrix exp_rt = (r * t).exp();
            worst = std::max(worst, structured_difference_norm(p, exact, bundle, exp_rt, t));
        }
    }
    return worst;
}

double interaction_distance(const proj::KrausProjection& p, const HermitianOperator& h0,
                            const HermitianOperator& hp, double lambda, double sigma_time) {
    const double t = sigma_time / (lambda * lambda);
    const ExactPropagator exact = exact_propagator(h0, hp, lambda);
    const ExactPropagator unperturbed = exact_propagator(h0, hp, 0.0);
    if (p.has_dense()) {
        const Superoperator& p0 = p.matrix();
        const Superoperator w = p0 * exact.matrix(t) * p0;
        return superop_norm(unperturbed.matrix(-t) * w - p0);
    }
    // range of U_{-t} W_t - P0 lies inside the image
    return norm_from_range(p.image_basis(), [&](const Matrix& y) -> Matrix {
        const Matrix w_adj = p.apply_dual(exact.apply_adjoint(unperturbed.apply(y, -t), t));
        return w_adj - p.apply_dual(y);
    });
}

ConvergenceReport convergence_sweep(const proj::KrausProjection& p, const HermitianOperator& h0,
                                    const HermitianOperator& hp, std::vector<double> lambdas,
                                    double xi, std::optional<double> t_tilde, double tau_bar,
                                    int n_points) {
    if (xi <= 0.0 || xi >= 2.0) throw Error("convergence_sweep: xi must lie in (0, 2)");
    if (tau_bar <= 0.0) throw Error("convergence_sweep: tau_bar must be positive");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (lambdas[k] <= 0.0 || lambdas[k] >= 1.0)
            throw Error("convergence_sweep: lambdas must lie in (0, 1)");
        if (k > 0 && std::abs(lambdas[k]) >= std::abs(lambdas[k - 1]))
            throw Error("convergence_sweep: lambdas must be strictly decreasing in magnitude");
    }

    ConvergenceReport rep;
    rep.lambdas = std::move(lambdas);
    rep.xi = xi;
    rep.tau_bar = tau_bar;
    rep.n_points = n_points;
    rep.collision_formula = !t_tilde.has_value();
    rep.t_tilde = t_tilde.value_or(1.0 / gen::commutator_norm(hp));

    for (double lambda : rep.lambdas) {
        const double window = std::pow(std::abs(lambda), -xi) * rep.t_tilde;
        const auto bundle = gen::build_generator(p, h0, hp, lambda, window);
        const double err = sup_error(p, h0, hp, lambda, bundle, tau_bar, n_points);
        rep.windows.push_back(window);
        rep.t_max.push_back(tau_bar / (lambda * lambda));
        rep.sup_errors.push_back(err);
    }
    rep.monotone_decreasing = rep.sup_errors.size() > 1;
    for (std::size_t k = 1; k < rep.sup_errors.size(); ++k)
        if (rep.sup_errors[k] > 0.9 * rep.sup_errors[k - 1] + 1e-12)
            rep.monotone_decreasing = false;
    return rep;
}

}  // namespace wcl::dyn
