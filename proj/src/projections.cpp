#include "wcl/projections.hpp"

#include <cmath>
#include <sstream>

#include "wcl/positivity.hpp"

namespace wcl::proj {

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::PartialTrace: return "partial_trace";
        case Kind::Diagonal: return "diagonal";
        case Kind::BlockDiagonal: return "block_diagonal";
        case Kind::Entangling: return "entangling";
        case Kind::Custom: return "custom";
    }
    return "unknown";
}

Matrix trace_out_bath(const Matrix& rho, Index dim_a, Index dim_b) {
    if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b)
        throw DimensionError("trace_out_bath: operand is not (dA*dB)^2");
    Matrix out = Matrix::Zero(dim_a, dim_a);
    for (Index i = 0; i < dim_a; ++i)
        for (Index j = 0; j < dim_a; ++j)
            for (Index b = 0; b < dim_b; ++b) out(i, j) += rho(i * dim_b + b, j * dim_b + b);
    return out;
}

Matrix trace_out_system(const Matrix& rho, Index dim_a, Index dim_b) {
    if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b)
        throw DimensionError("trace_out_system: operand is not (dA*dB)^2");
    Matrix out = Matrix::Zero(dim_b, dim_b);
    for (Index a = 0; a < dim_b; ++a)
        for (Index b = 0; b < dim_b; ++b)
            for (Index i = 0; i < dim_a; ++i) out(a, b) += rho(i * dim_b + a, i * dim_b + b);
    return out;
}

EntanglingFamily EntanglingFamily::from(std::vector<Matrix> c_ops, std::vector<Matrix> d_ops,
                                        double tol) {
    if (c_ops.empty() || c_ops.size() != d_ops.size())
        throw DimensionError("EntanglingFamily: need equally many C_n and D_n, at least one");
    EntanglingFamily f;
    f.dim_b = c_ops.front().rows();
    for (const Matrix& m : c_ops)
        if (m.rows() != f.dim_b || m.cols() != f.dim_b)
            throw DimensionError("EntanglingFamily: C_n must be square bath operators");
    for (const Matrix& m : d_ops)
        if (m.rows() != f.dim_b || m.cols() != f.dim_b)
            throw DimensionError("EntanglingFamily: D_n must be square bath operators");
    f.c_ops = std::move(c_ops);
    f.d_ops = std::move(d_ops);
    const Index n = f.size();
    f.a_ops.resize(n);
    f.b_ops.resize(n);
    for (Index k = 0; k < n; ++k) {
        f.a_ops[k] = f.c_ops[k].adjoint() * f.c_ops[k];
        f.b_ops[k] = f.d_ops[k].adjoint() * f.d_ops[k];
    }

    auto fail = [&](const char* what, Index i, Index j, double res) {
        std::ostringstream os;
        os << "EntanglingFamily: hypothesis '" << what << "' fails at (n,n')=(" << i << "," << j
           << ") with residual " << res;
        throw ValidationError(os.str());
    };

    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = (f.d_ops[i].adjoint() * f.d_ops[j]).norm();
            if (r > tol) fail("D_n^dag D_n' = delta B_n", i, j, r);
        }
    Matrix sum_a = Matrix::Zero(f.dim_b, f.dim_b);
    for (const Matrix& a : f.a_ops) sum_a += a;
    const double rc = (sum_a - Matrix::Identity(f.dim_b, f.dim_b)).norm();
    if (rc > tol) fail("sum_n A_n = 1", 0, 0, rc);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const Matrix prod = f.a_ops[i] * f.a_ops[j];
            const double r = (i == j) ? (prod - f.a_ops[i]).norm() : prod.norm();
            if (r > tol) fail("A_n A_n' = delta A_n", i, j, r);
        }
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            const double r = std::abs((f.a_ops[i] * f.b_ops[j]).trace() - want);
            if (r > tol) fail("Tr(A_n B_n') = delta", i, j, r);
        }
    return f;
}

EntanglingFamily EntanglingFamily::random(Rng& rng, Index dim_b, Index sectors, bool rotated,
                                          bool diagonal) {
    if (sectors < 1 || sectors > dim_b)
        throw DimensionError("EntanglingFamily::random: need 1 <= sectors <= dim_b");
    std::vector<Index> sizes(sectors, dim_b / sectors);
    for (Index k = 0; k < dim_b % sectors; ++k) ++sizes[k];
    const Matrix u = rotated ? rng.unitary(dim_b) : Matrix::Identity(dim_b, dim_b);

    std::vector<Matrix> c_ops, d_ops;
    Index offset = 0;
    for (Index k = 0; k < sectors; ++k) {
        Matrix proj = Matrix::Zero(dim_b, dim_b);
        for (Index i = offset; i < offset + sizes[k]; ++i) proj(i, i) = 1.0;

        Matrix bath = Matrix::Zero(dim_b, dim_b);
        if (diagonal || sizes[k] == 1) {
            double total = 0.0;
            for (Index i = offset; i < offset + sizes[k]; ++i) {
                const double w = 0.1 + rng.uniform();
                bath(i, i) = w;
                total += w;
            }
            bath /= total;
        } else {
            const Matrix g = rng.density(sizes[k]);
            bath.block(offset, offset, sizes[k], sizes[k]) = g;
        }
        c_ops.push_back(u * proj * u.adjoint());
        d_ops.push_back(u * psd_sqrt(bath) * u.adjoint());
        offset += sizes[k];
    }
    return EntanglingFamily::from(std::move(c_ops), std::move(d_ops));
}

Matrix KrausProjection::apply(const Matrix& rho) const {
    if (rho.rows() != dim || rho.cols() != dim)
        throw DimensionError("KrausProjection::apply: dimension mismatch");
    if (kind == Kind::PartialTrace)
        return kron(trace_out_bath(rho, dim_a, dim_b), sigma);
    if (kind == Kind::Entangling) {
        Matrix out = Matrix::Zero(dim, dim);
        const auto& f = *family;
        const Matrix id_a = Matrix::Identity(dim_a, dim_a);
        for (Index n = 0; n < f.size(); ++n) {
            const Matrix x = trace_out_bath(rho * kron(id_a, f.a_ops[n]), dim_a, dim_b);
            out += kron(x, f.b_ops[n]);
        }
        return out;
    }
    Matrix out = Matrix::Zero(dim, dim);
    for (const Matrix& v : kraus) out += v * rho * v.adjoint();
    return out;
}

Matrix KrausProjection::apply_dual(const Matrix& x) const {
    if (x.rows() != dim || x.cols() != dim)
        throw DimensionError("KrausProjection::apply_dual: dimension mismatch");
    if (kind == Kind::PartialTrace) {
        const Matrix w = trace_out_bath(x * kron(Matrix::Identity(dim_a, dim_a), sigma), dim_a,
                                        dim_b);
        return kron(w, Matrix::Identity(dim_b, dim_b));
    }
    if (kind == Kind::Entangling) {
        Matrix out = Matrix::Zero(dim, dim);
        const auto& f = *family;
        for (Index n = 0; n < f.size(); ++n) {
            const Matrix w = trace_out_bath(x * kron(Matrix::Identity(dim_a, dim_a), f.b_ops[n]),
                                            dim_a, dim_b);
            out += kron(w, f.a_ops[n]);
        }
        return out;
    }
    Matrix out = Matrix::Zero(dim, dim);
    for (const Matrix& v : kraus) out += v.adjoint() * x * v;
    return out;
}

const Superoperator& KrausProjection::matrix() const {
    if (!dense_matrix_)
        throw Error("KrausProjection::matrix: dense form not materialized at this dimension");
    return *dense_matrix_;
}

Superoperator KrausProjection::complement_matrix() const {
    return Superoperator::identity(dim) - matrix();
}

void KrausProjection::finalize(double tol) {
    if (dim <= dense_cap) {
        Matrix m = Matrix::Zero(dim * dim, dim * dim);
        if (!kraus.empty()) {
            for (const Matrix& v : kraus) m += kron(v.conjugate(), v);
        } else {
            for (Index j = 0; j < dim * dim; ++j) {
                Vector e = Vector::Zero(dim * dim);
                e(j) = 1.0;
                m.col(j) = vectorize(apply(devectorize(e, dim)));
            }
        }
        // Kraus sum and structured action must agree
        if (!kraus.empty()) {
            Rng rng(404);
            const Matrix probe = rng.hermitian(dim);
            const Matrix via_kraus = devectorize(m * vectorize(probe), dim);
            const double r = (via_kraus - apply(probe)).norm();
            if (r > 1e-9 * std::max(1.0, probe.norm())) {
                std::ostringstream os;
                os << "KrausProjection: Kraus sum and structured action disagree, residual " << r;
                throw ValidationError(os.str());
            }
        }
        dense_matrix_ = Superoperator(dim, std::move(m));

        const Matrix& pm = dense_matrix_->mat;
        const double idem = (pm * pm - pm).norm();
        if (idem > tol * pm.rows()) {
            std::ostringstream os;
            os << "KrausProjection: idempotence residual " << idem;
            throw ValidationError(os.str());
        }
    }
    // dual unitality: P0~(1) = 1
    const Matrix unital =
        apply_dual(Matrix::Identity(dim, dim)) - Matrix::Identity(dim, dim);
    if (unital.norm() > tol * dim) {
        std::ostringstream os;
        os << "KrausProjection: dual unitality residual " << unital.norm();
        throw ValidationError(os.str());
    }

    // orthonormal image basis
    std::vector<Matrix> span;
    const Matrix id_a = dim_a > 0 ? Matrix::Identity(dim_a, dim_a) : Matrix();
    switch (kind) {
        case Kind::PartialTrace: {
            for (Index p = 0; p < dim_a; ++p)
                for (Index q = 0; q < dim_a; ++q) {
                    Matrix e = Matrix::Zero(dim_a, dim_a);
                    e(p, q) = 1.0;
                    span.push_back(kron(e, sigma));
                }
            break;
        }
        case Kind::Entangling: {
            for (Index n = 0; n < family->size(); ++n)
                for (Index p = 0; p < dim_a; ++p)
                    for (Index q = 0; q < dim_a; ++q) {
                        Matrix e = Matrix::Zero(dim_a, dim_a);
                        e(p, q) = 1.0;
                        span.push_back(kron(e, family->b_ops[n]));
                    }
            break;
        }
        case Kind::Diagonal: {
            for (Index i = 0; i < dim; ++i) {
                const Vector u = basis.col(i);
                span.push_back(u * u.adjoint());
            }
            break;
        }
        case Kind::BlockDiagonal: {
            for (const auto& blk : blocks)
                for (Index i : blk)
                    for (Index j : blk) {
                        Matrix e = Matrix::Zero(dim, dim);
                        e(i, j) = 1.0;
                        span.push_back(e);
                    }
            break;
        }
        case Kind::Custom: {
            // probe the range through a spanning set of inputs
            for (Index j = 0; j < dim * dim; ++j) {
                Vector e = Vector::Zero(dim * dim);
                e(j) = 1.0;
                span.push_back(apply(devectorize(e, dim)));
            }
            break;
        }
    }
    image_basis_ = orthonormalize_ops(span);
}

KrausProjection partial_trace_projection(Index dim_a, Index dim_b, const DensityMatrix& sigma) {
    if (sigma.dim() != dim_b)
        throw DimensionError("partial_trace_projection: sigma must live on the bath factor");
    KrausProjection p;
    p.kind = Kind::PartialTrace;
    p.dim = dim_a * dim_b;
    p.dim_a = dim_a;
    p.dim_b = dim_b;
    p.sigma = sigma.mat;
    if (p.dim <= KrausProjection::dense_cap) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.mat);
        const double cap = es.eigenvalues().maxCoeff();
        const Matrix id_a = Matrix::Identity(dim_a, dim_a);
        for (Index alpha = 0; alpha < dim_b; ++alpha)
            for (Index k = 0; k < dim_b; ++k) {
                const double s = es.eigenvalues()(k);
                if (s <= 1e-14 * cap) continue;  // null directions carry no Kraus operator
                Matrix bath = std::sqrt(s) * es.eigenvectors().col(k) *
                              Matrix::Identity(dim_b, dim_b).row(alpha);
                p.kraus.push_back(kron(id_a, bath));
            }
    }
    p.finalize();
    return p;
}

KrausProjection diagonal_projection(const Matrix& basis) {
    const Index d = basis.rows();
    if (basis.cols() != d) throw DimensionError("diagonal_projection: basis must be square");
    if ((basis.adjoint() * basis - Matrix::Identity(d, d)).norm() > 1e-10 * d)
        throw ValidationError("diagonal_projection: basis is not unitary");
    KrausProjection p;
    p.kind = Kind::Diagonal;
    p.dim = d;
    p.basis = basis;
    for (Index i = 0; i < d; ++i) {
        const Vector u = basis.col(i);
        p.kraus.push_back(u * u.adjoint());
    }
    p.finalize();
    return p;
}

KrausProjection block_diagonal_projection(std::vector<std::vector<Index>> blocks, Index dim) {
    std::vector<int> seen(dim, 0);
    for (const auto& blk : blocks)
        for (Index i : blk) {
            if (i < 0 || i >= dim)
                throw ValidationError("block_diagonal_projection: index out of range");
            ++seen[i];
        }
    for (Index i = 0; i < dim; ++i)
        if (seen[i] != 1)
            throw ValidationError(
                "block_diagonal_projection: blocks must partition the index range "
                "(overlapping or incomplete partition)");
    KrausProjection p;
    p.kind = Kind::BlockDiagonal;
    p.dim = dim;
    p.blocks = std::move(blocks);
    for (const auto& blk : p.blocks) {
        Matrix v = Matrix::Zero(dim, dim);
        for (Index i : blk) v(i, i) = 1.0;
        p.kraus.push_back(v);
    }
    p.finalize();
    return p;
}

KrausProjection entangling_projection(const EntanglingFamily& family, Index dim_a) {
    KrausProjection p;
    p.kind = Kind::Entangling;
    p.dim_a = dim_a;
    p.dim_b = family.dim_b;
    p.dim = dim_a * family.dim_b;
    p.family = family;
    const Matrix id_a = Matrix::Identity(dim_a, dim_a);
    if (p.dim <= KrausProjection::dense_cap) {
        for (Index a = 0; a < family.dim_b; ++a)
            for (Index ap = 0; ap < family.dim_b; ++ap) {
                Matrix bath = Matrix::Zero(family.dim_b, family.dim_b);
                for (Index n = 0; n < family.size(); ++n) {
                    Matrix unit = Matrix::Zero(family.dim_b, family.dim_b);
                    unit(a, ap) = 1.0;
                    bath += family.d_ops[n].adjoint() * unit * family.c_ops[n];
                }
                p.kraus.push_back(kron(id_a, bath));
            }
        // cross-check: kraus sum against the closed form used by apply()
        Rng rng(505);
        const Matrix probe = rng.hermitian(p.dim);
        Matrix via_kraus = Matrix::Zero(p.dim, p.dim);
        for (const Matrix& v : p.kraus) via_kraus += v * probe * v.adjoint();
        const double r = (via_kraus - p.apply(probe)).norm();
        if (r > 1e-10 * std::max(1.0, probe.norm())) {
            std::ostringstream os;
            os << "entangling_projection: Kraus form and closed form disagree, residual " << r;
            throw ValidationError(os.str());
        }
    }
    p.finalize();
    return p;
}

namespace {

// H0 = hA (x) 1 + 1 (x) hB - c 1 decomposition (exact when H0 is tensor-sum)
struct TensorSplit {
    Matrix ha, hb;
    double residual;
};

TensorSplit tensor_split(const Matrix& h0, Index dim_a, Index dim_b) {
    TensorSplit s;
    s.hb = trace_out_system(h0, dim_a, dim_b) / static_cast<double>(dim_a);
    s.ha = trace_out_bath(h0, dim_a, dim_b) / static_cast<double>(dim_b);
    const Complex c = h0.trace() / static_cast<double>(dim_a * dim_b);
    const Matrix rebuilt = kron(s.ha, Matrix::Identity(dim_b, dim_b)) +
                           kron(Matrix::Identity(dim_a, dim_a), s.hb) -
                           c * Matrix::Identity(dim_a * dim_b, dim_a * dim_b);
    s.residual = (h0 - rebuilt).norm();
    return s;
}

}  // namespace

CompatibilityReport check_dynamical_compatibility(const KrausProjection& p,
                                                  const HermitianOperator& h0, double tol) {
    CompatibilityReport rep;
    rep.tol = tol;
    const Index d = p.dim;
    if (h0.dim() != d) throw DimensionError("check_dynamical_compatibility: dimension mismatch");

    if (p.has_dense()) {
        const Superoperator z = commutator_superop(h0);
        rep.residual = superop_norm(z * p.matrix() - p.matrix() * z);
    } else {
        // [Z, P0] has range inside span{image_basis, Z(image_basis)}
        std::vector<Matrix> range = p.image_basis();
        for (const Matrix& e : p.image_basis())
            range.push_back(-kI * (h0.mat * e - e * h0.mat));
        rep.residual = norm_from_range(range, [&](const Matrix& y) -> Matrix {
            // M = Z P0 - P0 Z, M^dag = P0~ Z^dag - Z^dag P0~, Z^dag = -Z
            const Matrix zy = kI * (h0.mat * y - y * h0.mat);  // Z^dag y
            const Matrix py = p.apply_dual(y);
            const Matrix zpy = kI * (h0.mat * py - py * h0.mat);
            return p.apply_dual(zy) - zpy;
        });
    }
    rep.pass = rep.residual <= tol;

    if ((p.kind == Kind::PartialTrace || p.kind == Kind::Entangling) && p.dim_a > 0) {
        rep.has_tensor_detail = true;
        const TensorSplit s = tensor_split(h0.mat, p.dim_a, p.dim_b);
        rep.split_residual = s.residual;
        if (p.kind == Kind::PartialTrace) {
            rep.bath_commutators_b.push_back((s.hb * p.sigma - p.sigma * s.hb).norm());
        } else {
            for (Index n = 0; n < p.family->size(); ++n) {
                const Matrix& a = p.family->a_ops[n];
                const Matrix& b = p.family->b_ops[n];
                rep.bath_commutators_a.push_back((s.hb * a - a * s.hb).norm());
                rep.bath_commutators_b.push_back((s.hb * b - b * s.hb).norm());
            }
        }
    }
    return rep;
}

FirstOrderReport check_no_first_order(const KrausProjection& p, const HermitianOperator& hp,
                                      double tol) {
    FirstOrderReport rep;
    rep.tol = tol;
    if (hp.dim() != p.dim) throw DimensionError("check_no_first_order: dimension mismatch");

    if (p.has_dense()) {
        const Superoperator a = commutator_superop(hp);
        rep.residual = superop_norm(p.matrix() * a * p.matrix());
    } else {
        // range of P0 A P0 lies in the image of P0; A^dag = -A
        rep.residual = norm_from_range(p.image_basis(), [&](const Matrix& y) {
            const Matrix w = p.apply_dual(y);
            const Matrix aw = kI * (hp.mat * w - w * hp.mat);  // A^dag w = +i[H', w]
            return p.apply_dual(aw);
        });
    }
    rep.pass = rep.residual <= tol;
    return rep;
}

void AuditReport::add(std::string check, double residual, double threshold) {
    const bool ok = residual <= threshold;
    rows.push_back({std::move(check), residual, threshold, ok});
    pass = pass && ok;
}

AuditReport projection_audit(const KrausProjection& p, std::uint64_t seed) {
    AuditReport rep;
    const Index d = p.dim;

    if (p.has_dense()) {
        const Matrix& pm = p.matrix().mat;
        rep.add("idempotence", (pm * pm - pm).norm(), 1e-10 * d);
    } else {
        Rng rng(seed);
        double worst = 0.0;
        for (int t = 0; t < 8; ++t) {
            const Matrix rho = rng.density(d);
            worst = std::max(worst, (p.apply(p.apply(rho)) - p.apply(rho)).norm());
        }
        rep.add("idempotence", worst, 1e-10 * d);
    }

    rep.add("dual_unitality",
            (p.apply_dual(Matrix::Identity(d, d)) - Matrix::Identity(d, d)).norm(), 1e-10 * d);

    Rng rng(seed + 1);
    double trace_drift = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Matrix rho = rng.density(d);
        trace_drift = std::max(trace_drift, std::abs(p.apply(rho).trace() - rho.trace()));
    }
    rep.add("trace_preservation", trace_drift, 1e-10);

    if (p.has_dense()) {
        const double floor = cp::choi(p.matrix()).min_eigenvalue();
        rep.add("complete_positivity", std::max(0.0, -floor), 1e-12 * d * d);
    }

    if (p.kind == Kind::Entangling) {
        const auto& f = *p.family;
        double r_orth = 0.0, r_sum = 0.0, r_proj = 0.0, r_pair = 0.0;
        Matrix sum_a = Matrix::Zero(f.dim_b, f.dim_b);
        for (Index i = 0; i < f.size(); ++i) {
            sum_a += f.a_ops[i];
            for (Index j = 0; j < f.size(); ++j) {
                if (i != j)
                    r_orth = std::max(r_orth, (f.d_ops[i].adjoint() * f.d_ops[j]).norm());
                const Matrix prod = f.a_ops[i] * f.a_ops[j];
                r_proj = std::max(r_proj,
                                  (i == j) ? (prod - f.a_ops[i]).norm() : prod.norm());
                const double want = (i == j) ? 1.0 : 0.0;
                r_pair = std::max(r_pair, std::abs((f.a_ops[i] * f.b_ops[j]).trace() - want));
            }
        }
        r_sum = (sum_a - Matrix::Identity(f.dim_b, f.dim_b)).norm();
        rep.add("family_d_orthogonality", r_orth, 1e-10);
        rep.add("family_completeness", r_sum, 1e-10);
        rep.add("family_a_orthogonality", r_proj, 1e-10);
        rep.add("family_pairing", r_pair, 1e-10);

        if (p.has_dense() && !p.kraus.empty()) {
            Matrix km = Matrix::Zero(d * d, d * d);
            for (const Matrix& v : p.kraus) km += kron(v.conjugate(), v);
            rep.add("kraus_vs_closed_form", (km - p.matrix().mat).norm(), 1e-10 * d * d);
        }

        // image of the dual is closed under products
        Rng rng2(seed + 2);
        double closure = 0.0;
        for (int t = 0; t < 6; ++t) {
            const Matrix x = p.apply_dual(rng2.hermitian(d));
            const Matrix y = p.apply_dual(rng2.hermitian(d));
            const Matrix prod = x * y;
            closure = std::max(closure,
                               (p.apply_dual(prod) - prod).norm() / std::max(1.0, prod.norm()));
        }
        rep.add("dual_image_subalgebra", closure, 1e-9);
    }
    return rep;
}

}  // namespace wcl::proj
