#include "wcl/positivity.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace wcl::cp {

double ChoiMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mat + mat.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

ChoiMatrix choi(const Superoperator& s) {
    const Index d = s.dim;
    ChoiMatrix c;
    c.dim = d;
    c.mat = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            c.mat.block(i * d, j * d, d, d) = s.apply(e);
        }
    return c;
}

CpVerdict is_cp(const Superoperator& s, double tol) {
    const double floor = choi(s).min_eigenvalue();
    return {floor >= -tol, floor};
}

TpVerdict is_trace_preserving(const Superoperator& s, double tol) {
    const Vector id = vectorize(Matrix::Identity(s.dim, s.dim));
    const double defect = (s.mat.adjoint() * id - id).cwiseAbs().maxCoeff();
    return {defect <= tol, defect};
}

double trace_output_defect(const Superoperator& s) {
    const Vector id = vectorize(Matrix::Identity(s.dim, s.dim));
    return (s.mat.adjoint() * id).cwiseAbs().maxCoeff();
}

std::vector<Matrix> gell_mann_traceless(Index n) {
    std::vector<Matrix> basis;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k) {
            Matrix re = Matrix::Zero(n, n);
            re(j, k) = inv_sqrt2;
            re(k, j) = inv_sqrt2;
            basis.push_back(re);
            Matrix im = Matrix::Zero(n, n);
            im(j, k) = Complex(0, -inv_sqrt2);
            im(k, j) = Complex(0, inv_sqrt2);
            basis.push_back(im);
        }
    for (Index l = 1; l < n; ++l) {
        Matrix diag = Matrix::Zero(n, n);
        const double f = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        for (Index j = 0; j < l; ++j) diag(j, j) = f;
        diag(l, l) = -static_cast<double>(l) * f;
        basis.push_back(diag);
    }
    return basis;
}

namespace {

// coefficient matrix c with L = sum_ab c_ab kron(conj G_b, G_a), i.e.
// L(rho) = sum_ab c_ab G_a rho G_b^dag, for an HS-orthonormal operator set G
Matrix coefficient_matrix(const Matrix& l_mat, const std::vector<Matrix>& ops, Index m) {
    // reshuffle: ctil[(i2 + m j2), (i1 + m j1)] = L[(i1 m + i2), (j1 m + j2)]
    Matrix ctil(m * m, m * m);
    for (Index i1 = 0; i1 < m; ++i1)
        for (Index i2 = 0; i2 < m; ++i2)
            for (Index j1 = 0; j1 < m; ++j1)
                for (Index j2 = 0; j2 < m; ++j2)
                    ctil(i2 + m * j2, i1 + m * j1) = l_mat(i1 * m + i2, j1 * m + j2);
    Matrix g(m * m, ops.size());
    for (std::size_t a = 0; a < ops.size(); ++a) g.col(a) = vectorize(ops[a]);
    return g.adjoint() * ctil * g;
}

std::vector<Index> block_offsets(const std::vector<Index>& dims) {
    std::vector<Index> off(dims.size() + 1, 0);
    for (std::size_t k = 0; k < dims.size(); ++k) off[k + 1] = off[k] + dims[k];
    return off;
}

Matrix block_mask_matrix(const std::vector<Index>& dims) {
    const auto off = block_offsets(dims);
    const Index m = off.back();
    std::vector<Index> block_of(m);
    for (std::size_t k = 0; k < dims.size(); ++k)
        for (Index i = off[k]; i < off[k + 1]; ++i) block_of[i] = static_cast<Index>(k);
    Matrix e = Matrix::Zero(m * m, m * m);
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < m; ++c)
            if (block_of[r] == block_of[c]) e(r + m * c, r + m * c) = 1.0;
    return e;
}

}  // namespace

GKSForm gks_canonical(const Superoperator& l, const std::vector<Index>& block_dims) {
    const auto off = block_offsets(block_dims);
    const Index m = off.back();
    if (m != l.dim) throw DimensionError("gks_canonical: block dims do not sum to the dimension");
    const std::size_t nblocks = block_dims.size();

    GKSForm form;
    form.block_dims = block_dims;
    const Matrix mask = block_mask_matrix(block_dims);
    const Matrix l_mat = l.mat * mask;

    // ordered basis: per-block normalized identities, per-block Gell-Manns,
    // cross-block matrix units
    std::vector<Matrix> ops;
    for (std::size_t k = 0; k < nblocks; ++k) {
        Matrix idk = Matrix::Zero(m, m);
        for (Index i = off[k]; i < off[k + 1]; ++i) idk(i, i) = 1.0;
        ops.push_back(idk / std::sqrt(static_cast<double>(block_dims[k])));
    }
    std::vector<std::pair<std::size_t, std::size_t>> gm_range(nblocks);
    for (std::size_t k = 0; k < nblocks; ++k) {
        const std::size_t begin = ops.size();
        for (const Matrix& f : gell_mann_traceless(block_dims[k])) {
            Matrix embedded = Matrix::Zero(m, m);
            embedded.block(off[k], off[k], block_dims[k], block_dims[k]) = f;
            ops.push_back(embedded);
        }
        gm_range[k] = {begin, ops.size()};
    }
    for (std::size_t k = 0; k < nblocks; ++k)
        for (std::size_t kp = 0; kp < nblocks; ++kp) {
            if (k == kp) continue;
            for (Index a = off[k]; a < off[k + 1]; ++a)
                for (Index b = off[kp]; b < off[kp + 1]; ++b) {
                    Matrix unit = Matrix::Zero(m, m);
                    unit(a, b) = 1.0;
                    ops.push_back(unit);
                }
        }

    Matrix c = coefficient_matrix(l_mat, ops, m);
    form.hermiticity_residual = (c - c.adjoint()).norm();
    if (form.hermiticity_residual > 1e-8 * std::max(1.0, c.norm())) {
        std::ostringstream os;
        os << "gks_canonical: map is not hermiticity-preserving (residual "
           << form.hermiticity_residual << ")";
        throw ValidationError(os.str());
    }
    c = 0.5 * (c + c.adjoint());

    // per-block drift B_k from the identity row/column of the coefficients
    form.effective_hamiltonian = Matrix::Zero(m, m);
    form.drift = Matrix::Zero(m, m);
    for (std::size_t k = 0; k < nblocks; ++k) {
        const Index mk = block_dims[k];
        Matrix b = Matrix::Zero(m, m);
        for (std::size_t a = gm_range[k].first; a < gm_range[k].second; ++a)
            b += c(static_cast<Index>(a), static_cast<Index>(k)) * ops[a];
        b /= std::sqrt(static_cast<double>(mk));
        b += (c(static_cast<Index>(k), static_cast<Index>(k)) / (2.0 * mk)) * ops[k] *
             std::sqrt(static_cast<double>(mk));
        form.effective_hamiltonian += 0.5 * kI * (b - b.adjoint());
        form.drift += 0.5 * (b + b.adjoint());
    }

    // dissipator coefficients over the traceless part of the basis
    const Index ng = static_cast<Index>(ops.size()) - static_cast<Index>(nblocks);
    form.basis.assign(ops.begin() + nblocks, ops.end());
    form.gks_matrix = c.block(nblocks, nblocks, ng, ng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(form.gks_matrix, Eigen::EigenvaluesOnly);
    form.min_eigenvalue = ng > 0 ? es.eigenvalues().minCoeff() : 0.0;

    // rebuild and compare on block-supported inputs
    Matrix rebuilt = Matrix::Zero(m * m, m * m);
    const Matrix h = form.effective_hamiltonian;
    const Matrix g = form.drift;
    const Matrix id = Matrix::Identity(m, m);
    rebuilt += -kI * (kron(id, h) - kron(h.transpose(), id));
    rebuilt += kron(id, g) + kron(g.transpose(), id);
    for (Index a = 0; a < ng; ++a)
        for (Index b = 0; b < ng; ++b) {
            const Complex w = form.gks_matrix(a, b);
            if (w != Complex(0, 0))
                rebuilt += w * kron(form.basis[b].conjugate(), form.basis[a]);
        }
    form.reconstruction_residual = ((rebuilt * mask) - l_mat).norm();
    return form;
}

Superoperator ImageRestriction::transport(const Superoperator& s) const {
    return transport([&s](const Matrix& x) { return s.apply(x); });
}

Superoperator ImageRestriction::transport(
    const std::function<Matrix(const Matrix&)>& apply) const {
    Matrix t = Matrix::Zero(m * m, m * m);
    for (Index p = 0; p < m; ++p)
        for (Index q = 0; q < m; ++q) {
            const Index col = p + m * q;
            if (block_mask(col, col) == Complex(0, 0)) continue;  // E kills cross units
            Matrix unit = Matrix::Zero(m, m);
            unit(p, q) = 1.0;
            t.col(col) = vectorize(extract(apply(embed(unit))));
        }
    return {m, std::move(t)};
}

ImageRestriction image_restriction(const proj::KrausProjection& p) {
    using proj::Kind;
    ImageRestriction r;
    r.dim = p.dim;
    switch (p.kind) {
        case Kind::PartialTrace: {
            r.block_dims = {p.dim_a};
            r.m = p.dim_a;
            const Matrix sigma = p.sigma;
            const Index da = p.dim_a, db = p.dim_b;
            r.embed = [sigma, da, db](const Matrix& x) { return kron(x, sigma); };
            r.extract = [da, db](const Matrix& rho) {
                return proj::trace_out_bath(rho, da, db);
            };
            break;
        }
        case Kind::Entangling: {
            const auto& f = *p.family;
            const Index n = f.size(), da = p.dim_a, db = p.dim_b;
            r.block_dims.assign(n, da);
            r.m = n * da;
            const auto a_ops = f.a_ops;
            const auto b_ops = f.b_ops;
            r.embed = [=](const Matrix& x) {
                Matrix out = Matrix::Zero(da * db, da * db);
                for (Index k = 0; k < n; ++k)
                    out += kron(x.block(k * da, k * da, da, da), b_ops[k]);
                return out;
            };
            r.extract = [=](const Matrix& rho) {
                Matrix out = Matrix::Zero(n * da, n * da);
                const Matrix id_a = Matrix::Identity(da, da);
                for (Index k = 0; k < n; ++k)
                    out.block(k * da, k * da, da, da) =
                        proj::trace_out_bath(rho * kron(id_a, a_ops[k]), da, db);
                return out;
            };
            break;
        }
        case Kind::Diagonal: {
            const Index d = p.dim;
            r.block_dims.assign(d, 1);
            r.m = d;
            const Matrix u = p.basis;
            r.embed = [u, d](const Matrix& x) {
                Matrix out = Matrix::Zero(d, d);
                for (Index i = 0; i < d; ++i) out += x(i, i) * (u.col(i) * u.col(i).adjoint());
                return out;
            };
            r.extract = [u, d](const Matrix& rho) {
                Matrix out = Matrix::Zero(d, d);
                for (Index i = 0; i < d; ++i)
                    out(i, i) = (u.col(i).adjoint() * rho * u.col(i))(0, 0);
                return out;
            };
            break;
        }
        case Kind::BlockDiagonal: {
            const Index d = p.dim;
            std::vector<Index> perm;
            for (const auto& blk : p.blocks) {
                r.block_dims.push_back(static_cast<Index>(blk.size()));
                for (Index i : blk) perm.push_back(i);
            }
            r.m = d;
            r.embed = [perm, d](const Matrix& x) {
                Matrix out = Matrix::Zero(d, d);
                for (Index a = 0; a < d; ++a)
                    for (Index b = 0; b < d; ++b) out(perm[a], perm[b]) = x(a, b);
                return out;
            };
            r.extract = [perm, d](const Matrix& rho) {
                Matrix out = Matrix::Zero(d, d);
                for (Index a = 0; a < d; ++a)
                    for (Index b = 0; b < d; ++b) out(a, b) = rho(perm[a], perm[b]);
                return out;
            };
            break;
        }
        case Kind::Custom:
            throw Error("image_restriction: no canonical block structure for custom kind");
    }
    r.block_mask = block_mask_matrix(r.block_dims);
    return r;
}

SemigroupAudit cp_semigroup_audit(const Superoperator& generator_m,
                                  const std::vector<Index>& block_dims,
                                  const std::vector<double>& t_grid, double cp_tol,
                                  double tp_tol) {
    SemigroupAudit audit;
    audit.generator_form = gks_canonical(generator_m, block_dims);
    audit.pass = audit.generator_form.conditionally_cp(cp_tol);

    const Index m = generator_m.dim;
    const Matrix mask = block_mask_matrix(block_dims);
    const Vector id = vectorize(Matrix::Identity(m, m));
    const Matrix gen = generator_m.mat * mask;  // cross columns are dead by construction
    for (double t : t_grid) {
        Matrix st = (gen * t).exp() * mask;
        SemigroupAuditRow row;
        row.t = t;
        row.choi_floor = choi(Superoperator(m, st)).min_eigenvalue();
        row.cp = row.choi_floor >= -cp_tol;
        const Vector defect = st.adjoint() * id - mask * id;
        row.trace_defect = defect.cwiseAbs().maxCoeff();
        row.tp = row.trace_defect <= tp_tol;
        audit.rows.push_back(row);
        audit.pass = audit.pass && row.cp && row.tp;
    }
    return audit;
}

}  // namespace wcl::cp
