#include "wcl/opcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace wcl {

HermitianOperator HermitianOperator::from(Matrix m, double rel_tol) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw DimensionError("HermitianOperator: matrix must be square and non-empty");
    const double scale = std::max(1.0, m.norm());
    const double res = (m - m.adjoint()).norm();
    if (res > rel_tol * scale) {
        std::ostringstream os;
        os << "HermitianOperator: hermiticity residual " << res << " exceeds " << rel_tol * scale;
        throw ValidationError(os.str());
    }
    HermitianOperator h;
    h.mat = 0.5 * (m + m.adjoint());
    return h;
}

DensityMatrix DensityMatrix::from(Matrix m, double herm_tol, double trace_tol, double eig_floor) {
    HermitianOperator h = HermitianOperator::from(std::move(m), herm_tol);
    const double tr_err = std::abs(h.mat.trace() - Complex(1.0, 0.0));
    if (tr_err > trace_tol) {
        std::ostringstream os;
        os << "DensityMatrix: trace deviates from 1 by " << tr_err;
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
    if (es.eigenvalues().minCoeff() < eig_floor) {
        std::ostringstream os;
        os << "DensityMatrix: minimum eigenvalue " << es.eigenvalues().minCoeff() << " below "
           << eig_floor;
        throw ValidationError(os.str());
    }
    DensityMatrix rho;
    rho.mat = std::move(h.mat);
    return rho;
}

Superoperator::Superoperator(Index d, Matrix m) : dim(d), mat(std::move(m)) {
    if (mat.rows() != d * d || mat.cols() != d * d)
        throw DimensionError("Superoperator: matrix must be d^2 x d^2");
}

Superoperator Superoperator::identity(Index d) {
    return {d, Matrix::Identity(d * d, d * d)};
}

Superoperator Superoperator::zero(Index d) {
    return {d, Matrix::Zero(d * d, d * d)};
}

Matrix Superoperator::apply(const Matrix& x) const {
    if (x.rows() != dim || x.cols() != dim)
        throw DimensionError("Superoperator::apply: operand dimension mismatch");
    return devectorize(mat * vectorize(x), dim);
}

Superoperator Superoperator::operator*(const Superoperator& rhs) const {
    if (dim != rhs.dim) throw DimensionError("Superoperator product: dimension mismatch");
    return {dim, mat * rhs.mat};
}

Superoperator Superoperator::operator+(const Superoperator& rhs) const {
    if (dim != rhs.dim) throw DimensionError("Superoperator sum: dimension mismatch");
    return {dim, mat + rhs.mat};
}

Superoperator Superoperator::operator-(const Superoperator& rhs) const {
    if (dim != rhs.dim) throw DimensionError("Superoperator difference: dimension mismatch");
    return {dim, mat - rhs.mat};
}

Superoperator& Superoperator::operator+=(const Superoperator& rhs) {
    if (dim != rhs.dim) throw DimensionError("Superoperator sum: dimension mismatch");
    mat += rhs.mat;
    return *this;
}

Superoperator& Superoperator::operator-=(const Superoperator& rhs) {
    if (dim != rhs.dim) throw DimensionError("Superoperator difference: dimension mismatch");
    mat -= rhs.mat;
    return *this;
}

Vector vectorize(const Matrix& x) {
    return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix devectorize(const Vector& v, Index d) {
    if (v.size() != d * d) throw DimensionError("devectorize: length must be d^2");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Superoperator sandwich_superop(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw DimensionError("sandwich_superop: operands must be square and equal-sized");
    return {a.rows(), kron(b.transpose(), a)};
}

Superoperator commutator_superop(const HermitianOperator& h) {
    const Index d = h.dim();
    const Matrix id = Matrix::Identity(d, d);
    return {d, -kI * (kron(id, h.mat) - kron(h.mat.transpose(), id))};
}

Superoperator unitary_propagator(const HermitianOperator& h0, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0.mat);
    const Matrix& v = es.eigenvectors();
    Vector phases(h0.dim());
    for (Index k = 0; k < h0.dim(); ++k)
        phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
    const Matrix u = v * phases.asDiagonal() * v.adjoint();
    return sandwich_superop(u, u.adjoint());
}

double matrix_spec_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double superop_norm(const Superoperator& s) {
    return matrix_spec_norm(s.mat);
}

Matrix matrix_exp(const Matrix& m) {
    return m.exp();
}

Superoperator superop_exp(const Superoperator& s, double t) {
    Matrix m = s.mat * t;
    return {s.dim, m.exp()};
}

Superoperator BohrDecomposition::z_superop() const {
    Superoperator z = Superoperator::zero(dim());
    for (std::size_t k = 0; k < bohr_frequencies.size(); ++k)
        z += Complex(0.0, bohr_frequencies[k]) * projectors[k];
    return z;
}

BohrDecomposition bohr_decompose(const HermitianOperator& h0, double cluster_tol) {
    const Index d = h0.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h0.mat);
    const RealVector& evals = es.eigenvalues();

    if (cluster_tol <= 0.0) {
        const double spread = evals.maxCoeff() - evals.minCoeff();
        cluster_tol = 1e-9 * std::max(1.0, spread);
    }

    struct Diff {
        double value;
        Index m, n;
    };
    std::vector<Diff> diffs;
    diffs.reserve(d * d);
    for (Index m = 0; m < d; ++m)
        for (Index n = 0; n < d; ++n) diffs.push_back({evals(m) - evals(n), m, n});
    std::sort(diffs.begin(), diffs.end(),
              [](const Diff& a, const Diff& b) { return a.value < b.value; });

    // greedy clustering by gaps; a chain that drifts beyond cluster_tol is
    // ambiguous and must fail loudly rather than be split arbitrarily
    std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [first, last] in diffs
    std::size_t start = 0;
    for (std::size_t k = 1; k <= diffs.size(); ++k) {
        if (k == diffs.size() || diffs[k].value - diffs[k - 1].value > cluster_tol) {
            if (diffs[k - 1].value - diffs[start].value > cluster_tol) {
                std::ostringstream os;
                os << "bohr_decompose: ambiguous frequency cluster near " << diffs[start].value
                   << " (spread " << diffs[k - 1].value - diffs[start].value << " > tol "
                   << cluster_tol << ")";
                throw ValidationError(os.str());
            }
            clusters.emplace_back(start, k - 1);
            start = k;
        }
    }

    BohrDecomposition bd;
    bd.eigenvalues = evals;
    bd.eigenvectors = es.eigenvectors();
    bd.cluster_tol = cluster_tol;

    // rank-1 eigenprojectors R_m in the vectorized picture. The channel
    // rho -> R_n rho R_m (matrix kron(conj(R_m), R_n)) carries Z eigenvalue
    // -i(E_n - E_m) = +i w for w = E_m - E_n, so assigning the pair (m,n)
    // with difference w to that channel realizes Z = sum_w i w Q_w and
    // U_t Q_w = e^{iwt} Q_w.
    std::vector<Matrix> rank1(d);
    for (Index m = 0; m < d; ++m) {
        const Vector col = bd.eigenvectors.col(m);
        rank1[m] = col * col.adjoint();
    }

    for (const auto& [lo, hi] : clusters) {
        double mean = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) mean += diffs[k].value;
        mean /= static_cast<double>(hi - lo + 1);
        if (std::abs(mean) < cluster_tol) mean = 0.0;

        Matrix q = Matrix::Zero(d * d, d * d);
        for (std::size_t k = lo; k <= hi; ++k)
            q += kron(rank1[diffs[k].m].conjugate(), rank1[diffs[k].n]);
        bd.bohr_frequencies.push_back(mean);
        bd.projectors.emplace_back(d, std::move(q));
    }
    return bd;
}

double norm_from_range(const std::vector<Matrix>& range_ops,
                       const std::function<Matrix(const Matrix&)>& apply_adjoint) {
    const std::vector<Matrix> basis = orthonormalize_ops(range_ops);
    if (basis.empty()) return 0.0;
    const std::size_t r = basis.size();
    std::vector<Matrix> w(r);
    for (std::size_t i = 0; i < r; ++i) w[i] = apply_adjoint(basis[i]);
    Matrix gram(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) gram(i, j) = hs_inner(w[i], w[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace();
}

double hs_norm(const Matrix& a) {
    return a.norm();
}

Matrix psd_sqrt(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    RealVector w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * w.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<Matrix> orthonormalize_ops(const std::vector<Matrix>& ops, double drop_tol) {
    std::vector<Matrix> basis;
    for (const Matrix& op : ops) {
        Matrix v = op;
        for (int pass = 0; pass < 2; ++pass)
            for (const Matrix& b : basis) v -= hs_inner(b, v) * b;
        const double n = hs_norm(v);
        if (n > drop_tol) basis.push_back(v / n);
    }
    return basis;
}

}  // namespace wcl
