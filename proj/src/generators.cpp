#include "wcl/generators.hpp"

#include <cmath>
#include <sstream>

namespace wcl::gen {

namespace {

struct EigenFrame {
    RealVector evals;
    Matrix vecs;
    Matrix hp_eig;  // coupling in the eigenbasis
};

EigenFrame eigenframe(const HermitianOperator& h0, const HermitianOperator& hp) {
    if (h0.dim() != hp.dim()) throw DimensionError("generator: H0 and H' dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0.mat);
    EigenFrame f;
    f.evals = es.eigenvalues();
    f.vecs = es.eigenvectors();
    f.hp_eig = f.vecs.adjoint() * hp.mat * f.vecs;
    return f;
}

// plain commutator superoperator [X, .]
Matrix plain_commutator(const Matrix& x) {
    const Index d = x.rows();
    const Matrix id = Matrix::Identity(d, d);
    return kron(id, x) - kron(x.transpose(), id);
}

// adaptive Simpson for matrix-valued integrands
template <typename F>
Matrix simpson_rec(const F& f, double a, double b, const Matrix& fa, const Matrix& fm,
                   const Matrix& fb, const Matrix& whole, double tol, int depth,
                   QuadratureInfo* info) {
    const double m = 0.5 * (a + b);
    const Matrix flm = f(0.5 * (a + m));
    const Matrix frm = f(0.5 * (m + b));
    if (info) info->evaluations += 2;
    const Matrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Matrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Matrix sum = left + right;
    const double err = (sum - whole).norm() / 15.0;
    if (depth <= 0 || err <= tol) {
        if (info) info->achieved += err;
        return sum + (sum - whole) / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, info) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, info);
}

template <typename F>
Matrix adaptive_simpson(const F& f, double a, double b, double tol, int max_depth,
                        QuadratureInfo* info) {
    const Matrix fa = f(a);
    const Matrix fm = f(0.5 * (a + b));
    const Matrix fb = f(b);
    if (info) info->evaluations += 3;
    const Matrix whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, info);
}

}  // namespace

HermitianOperator smoothed_coupling(const HermitianOperator& h0, const HermitianOperator& hp,
                                    double t_window) {
    if (t_window <= 0) throw Error("smoothed_coupling: window must be positive");
    const EigenFrame f = eigenframe(h0, hp);
    const Index d = h0.dim();
    const double pref = std::pow(M_PI, 0.25) * std::sqrt(t_window);
    Matrix out(d, d);
    for (Index m = 0; m < d; ++m)
        for (Index n = 0; n < d; ++n) {
            const double w = f.evals(m) - f.evals(n);
            out(m, n) = pref * std::exp(-0.5 * w * w * t_window * t_window) * f.hp_eig(m, n);
        }
    return HermitianOperator::from(f.vecs * out * f.vecs.adjoint(), 1e-10);
}

HermitianOperator second_order_hamiltonian(const HermitianOperator& h0,
                                           const HermitianOperator& hp, double t_window) {
    if (t_window <= 0) throw Error("second_order_hamiltonian: window must be positive");
    const EigenFrame f = eigenframe(h0, hp);
    const Index d = h0.dim();
    const double t2 = t_window * t_window;
    Matrix out(d, d);
    for (Index m = 0; m < d; ++m)
        for (Index n = 0; n < d; ++n) {
            const double wmn = f.evals(m) - f.evals(n);
            Complex acc(0, 0);
            for (Index k = 0; k < d; ++k) {
                const double arg = (f.evals(m) + f.evals(n) - 2.0 * f.evals(k)) * t_window * 0.5;
                acc += f.hp_eig(m, k) * f.hp_eig(k, n) * dawson(arg);
            }
            out(m, n) = 2.0 * t_window * std::exp(-0.25 * wmn * wmn * t2) * acc;
        }
    return HermitianOperator::from(f.vecs * out * f.vecs.adjoint(), 1e-10);
}

Superoperator unprojected_generator(const HermitianOperator& h0, const HermitianOperator& hp,
                                    double t_window) {
    const HermitianOperator l = smoothed_coupling(h0, hp, t_window);
    const HermitianOperator h2 = second_order_hamiltonian(h0, hp, t_window);
    const Matrix cl = plain_commutator(l.mat);
    return commutator_superop(h2) - Superoperator(h0.dim(), cl * cl);
}

Superoperator projected_generator(const proj::KrausProjection& p, const HermitianOperator& h0,
                                  const HermitianOperator& hp, double t_window,
                                  double gate_tol) {
    const auto compat = proj::check_dynamical_compatibility(p, h0, gate_tol);
    if (!compat.pass) {
        std::ostringstream os;
        os << "projected_generator: [Z, P0] residual " << compat.residual << " exceeds "
           << gate_tol;
        throw GateError(os.str());
    }
    const auto first = proj::check_no_first_order(p, hp, gate_tol);
    if (!first.pass) {
        std::ostringstream os;
        os << "projected_generator: projected first-order coupling " << first.residual
           << " exceeds " << gate_tol;
        throw GateError(os.str());
    }
    const Superoperator k = unprojected_generator(h0, hp, t_window);
    return p.matrix() * k * p.matrix();
}

Superoperator projected_generator_memory_form(const proj::KrausProjection& p,
                                              const HermitianOperator& h0,
                                              const HermitianOperator& hp, double t_window) {
    const Index d = h0.dim();
    const auto bohr = bohr_decompose(h0);
    const Superoperator a = commutator_superop(hp);
    const Superoperator p0 = p.matrix();
    const Superoperator p1 = p.complement_matrix();
    const Matrix a01 = (p0 * a * p1).mat;
    const Matrix a10 = (p1 * a * p0).mat;

    const Index nw = bohr.frequency_count();
    const double t2 = t_window * t_window;
    const double scale = std::max(1.0, a01.norm() * a10.norm());

    std::vector<Matrix> y(nw);
    for (Index v = 0; v < nw; ++v) y[v] = a10 * bohr.projectors[v].mat;

    Matrix total = Matrix::Zero(d * d, d * d);
    for (Index iw = 0; iw < nw; ++iw) {
        const double w = bohr.bohr_frequencies[iw];
        for (Index im = 0; im < nw; ++im) {
            const double mu = bohr.bohr_frequencies[im];
            const Matrix x = bohr.projectors[iw].mat * a01 * bohr.projectors[im].mat;
            if (x.norm() < 1e-15 * scale) continue;
            Matrix z = Matrix::Zero(d * d, d * d);
            for (Index iv = 0; iv < nw; ++iv) {
                const double nu = bohr.bohr_frequencies[iv];
                const double ga = w - mu, gb = mu - nu;
                const double re =
                    std::sqrt(M_PI) * t_window * std::exp(-0.5 * (ga * ga + gb * gb) * t2);
                const double im2 = -2.0 * t_window *
                                   std::exp(-0.25 * (w - nu) * (w - nu) * t2) *
                                   dawson(0.5 * (ga - gb) * t_window);
                const Complex wt(re, im2);
                if (std::abs(wt) < 1e-18) continue;
                z += wt * y[iv];
            }
            total += x * z;
        }
    }
    return {d, std::move(total)};
}

Superoperator spectral_average(const Superoperator& k, const BohrDecomposition& bohr) {
    Superoperator out = Superoperator::zero(k.dim);
    for (const auto& q : bohr.projectors) out += q * k * q;
    return out;
}

Superoperator gaussian_time_average(const Superoperator& k, const BohrDecomposition& bohr,
                                    double t_window) {
    if (t_window <= 0) throw Error("gaussian_time_average: window must be positive");
    const Index nw = bohr.frequency_count();
    std::vector<Matrix> kq(nw);
    for (Index v = 0; v < nw; ++v) kq[v] = k.mat * bohr.projectors[v].mat;
    Matrix out = Matrix::Zero(k.dim * k.dim, k.dim * k.dim);
    for (Index u = 0; u < nw; ++u) {
        Matrix inner = Matrix::Zero(k.dim * k.dim, k.dim * k.dim);
        for (Index v = 0; v < nw; ++v) {
            const double gap = bohr.bohr_frequencies[u] - bohr.bohr_frequencies[v];
            const double wgt = std::exp(-0.25 * gap * gap * t_window * t_window);
            if (wgt < 1e-18) continue;
            inner += wgt * kq[v];
        }
        out += bohr.projectors[u].mat * inner;
    }
    return {k.dim, std::move(out)};
}

Superoperator gaussian_time_average(const Superoperator& k, const HermitianOperator& h0,
                                    double t_window) {
    return gaussian_time_average(k, bohr_decompose(h0), t_window);
}

Superoperator symmetrized_kernel(const HermitianOperator& h0, const HermitianOperator& hp,
                                 double t_damp, const QuadratureSettings& quad,
                                 QuadratureInfo* info) {
    if (t_damp <= 0) throw Error("symmetrized_kernel: damping time must be positive");
    const EigenFrame f = eigenframe(h0, hp);
    const Index d = h0.dim();

    auto heisenberg = [&](double t) -> Matrix {
        Vector ph(d);
        for (Index k = 0; k < d; ++k) ph(k) = std::exp(Complex(0, f.evals(k) * t));
        const Matrix rotated = ph.asDiagonal() * f.hp_eig * ph.asDiagonal().toDenseMatrix().conjugate();
        return f.vecs * rotated * f.vecs.adjoint();
    };
    auto integrand = [&](double x) -> Matrix {
        const double damp = std::exp(-0.25 * x * x / (t_damp * t_damp));
        const Matrix hplus = heisenberg(0.5 * x);
        const Matrix hminus = heisenberg(-0.5 * x);
        const Matrix cplus = -kI * plain_commutator(hplus);
        const Matrix cminus = -kI * plain_commutator(hminus);
        return damp * (cplus * cminus);
    };

    QuadratureInfo local;
    const double cutoff = quad.range_sigmas * 2.0 * t_damp;
    Matrix out = adaptive_simpson(integrand, 0.0, cutoff, quad.target, quad.max_depth, &local);
    if (info) *info = local;
    if (local.achieved > 10 * quad.target) {
        std::ostringstream os;
        os << "symmetrized_kernel: quadrature achieved " << local.achieved
           << " against target " << quad.target;
        throw QuadratureError(os.str());
    }
    return {d, std::move(out)};
}

Superoperator symmetrized_kernel_projected(const proj::KrausProjection& p,
                                           const HermitianOperator& h0,
                                           const HermitianOperator& hp, double t_damp,
                                           const QuadratureSettings& quad,
                                           QuadratureInfo* info) {
    const Superoperator k = symmetrized_kernel(h0, hp, t_damp, quad, info);
    return p.matrix() * k * p.matrix();
}

Superoperator damped_davies(const proj::KrausProjection& p, const HermitianOperator& h0,
                            const HermitianOperator& hp, double eps) {
    if (eps <= 0) throw Error("damped_davies: damping must be positive");
    const Index d = h0.dim();
    const auto bohr = bohr_decompose(h0);
    const Superoperator a = commutator_superop(hp);
    const Superoperator p0 = p.matrix();
    const Superoperator p1 = p.complement_matrix();
    const Matrix a01 = (p0 * a * p1).mat;
    const Matrix a10 = (p1 * a * p0).mat;

    const Index nw = bohr.frequency_count();
    std::vector<Matrix> aq(nw);
    for (Index v = 0; v < nw; ++v) aq[v] = a01 * bohr.projectors[v].mat;
    Matrix out = Matrix::Zero(d * d, d * d);
    for (Index u = 0; u < nw; ++u) {
        Matrix inner = Matrix::Zero(d * d, d * d);
        for (Index v = 0; v < nw; ++v) {
            const double gap = bohr.bohr_frequencies[u] - bohr.bohr_frequencies[v];
            inner += (1.0 / Complex(eps, gap)) * aq[v];
        }
        out += bohr.projectors[u].mat * (inner * a10);
    }
    return {d, std::move(out)};
}

double commutator_norm(const HermitianOperator& hp) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hp.mat, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

double completed_collision_time(double lambda, double a_norm) {
    if (lambda == 0.0) throw Error("completed_collision_time: lambda must be nonzero");
    if (a_norm <= 0.0) throw Error("completed_collision_time: perturbation norm must be positive");
    return 1.0 / (std::abs(lambda) * a_norm);
}

double completed_collision_time(double lambda, const Superoperator& a) {
    return completed_collision_time(lambda, superop_norm(a));
}

GeneratorBundle build_generator(const proj::KrausProjection& p, const HermitianOperator& h0,
                                const HermitianOperator& hp, double lambda, double t_window,
                                double gate_tol) {
    if (t_window <= 0) throw Error("build_generator: window must be positive");
    GeneratorBundle b;
    b.observation_time = t_window;
    b.coupling = lambda;
    b.projection = p;

    b.gates.compatibility = proj::check_dynamical_compatibility(p, h0, gate_tol);
    if (!b.gates.compatibility.pass) {
        std::ostringstream os;
        os << "build_generator: [Z, P0] residual " << b.gates.compatibility.residual
           << " exceeds " << gate_tol;
        throw GateError(os.str());
    }
    b.gates.first_order = proj::check_no_first_order(p, hp, gate_tol);
    if (!b.gates.first_order.pass) {
        std::ostringstream os;
        os << "build_generator: projected first-order coupling "
           << b.gates.first_order.residual << " exceeds " << gate_tol;
        throw GateError(os.str());
    }

    b.coupling_op = smoothed_coupling(h0, hp, t_window);
    b.hamiltonian_shift = second_order_hamiltonian(h0, hp, t_window);

    const Matrix& l_op = b.coupling_op.mat;
    const Matrix& h2 = b.hamiltonian_shift.mat;
    const double lam2 = lambda * lambda;

    if (p.has_dense()) {
        const Matrix cl = plain_commutator(l_op);
        b.unprojected = commutator_superop(b.hamiltonian_shift) -
                        Superoperator(p.dim, Matrix(cl * cl));
        b.dissipator = p.matrix() * (*b.unprojected) * p.matrix();
        const Superoperator z0 = p.matrix() * commutator_superop(h0) * p.matrix();
        b.full = z0 + lam2 * (*b.dissipator);
    }

    {
        std::ostringstream os;
        os << "closed-form eigenbasis assembly; gate residuals [Z,P0] "
           << b.gates.compatibility.residual << ", first-order "
           << b.gates.first_order.residual;
        b.construction = os.str();
    }

    b.restriction = cp::image_restriction(p);
    auto apply_full = [&](const Matrix& rho) -> Matrix {
        const Matrix zr = -kI * (h0.mat * rho - rho * h0.mat);
        const Matrix hr = -kI * (h2 * rho - rho * h2);
        const Matrix inner = l_op * rho - rho * l_op;
        const Matrix ll = l_op * inner - inner * l_op;
        return zr + lam2 * (hr - ll);
    };
    b.restricted_full = b.restriction.transport(apply_full);
    return b;
}

cp::SemigroupAudit audit_bundle(const GeneratorBundle& bundle, const std::vector<double>& t_grid,
                                double cp_tol, double tp_tol) {
    return cp::cp_semigroup_audit(bundle.restricted_full, bundle.restriction.block_dims, t_grid,
                                  cp_tol, tp_tol);
}

}  // namespace wcl::gen
