#include "wcl/qfgr.hpp"

#include <cmath>
#include <sstream>

namespace wcl::qfgr {

double QuantumPopulations::global_trace() const {
    Complex acc(0, 0);
    for (const Matrix& r : rho) acc += r.trace();
    return acc.real();
}

double QuantumPopulations::min_eigenvalue() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const Matrix& r : rho) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.adjoint()),
                                                 Eigen::EigenvaluesOnly);
        worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    return worst;
}

QuantumPopulations populations_from_state(const std::vector<std::vector<Index>>& blocks,
                                          const Matrix& rho_full) {
    QuantumPopulations pops;
    pops.blocks = blocks;
    for (const auto& blk : blocks) {
        Matrix r(blk.size(), blk.size());
        for (std::size_t i = 0; i < blk.size(); ++i)
            for (std::size_t j = 0; j < blk.size(); ++j) r(i, j) = rho_full(blk[i], blk[j]);
        pops.rho.push_back(std::move(r));
    }
    return pops;
}

Matrix assemble_state(const QuantumPopulations& pops, Index dim) {
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t a = 0; a < pops.blocks.size(); ++a) {
        const auto& blk = pops.blocks[a];
        for (std::size_t i = 0; i < blk.size(); ++i)
            for (std::size_t j = 0; j < blk.size(); ++j) out(blk[i], blk[j]) = pops.rho[a](i, j);
    }
    return out;
}

double ScatteringSet::max_diagonal_norm() const {
    double worst = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a) worst = std::max(worst, d[a][a].norm());
    return worst;
}

ScatteringSet scattering_operators(const std::vector<std::vector<Index>>& blocks,
                                   const HermitianOperator& coupling_op) {
    std::vector<int> seen(coupling_op.dim(), 0);
    for (const auto& blk : blocks)
        for (Index i : blk) {
            if (i < 0 || i >= coupling_op.dim())
                throw DimensionError("scattering_operators: block index out of range");
            ++seen[i];
        }
    for (Index i = 0; i < coupling_op.dim(); ++i)
        if (seen[i] != 1)
            throw ValidationError("scattering_operators: blocks must partition the index range");

    ScatteringSet scat;
    scat.blocks = blocks;
    const std::size_t nb = blocks.size();
    scat.d.resize(nb);
    for (std::size_t a = 0; a < nb; ++a) {
        scat.d[a].resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            Matrix m(blocks[a].size(), blocks[b].size());
            for (std::size_t i = 0; i < blocks[a].size(); ++i)
                for (std::size_t j = 0; j < blocks[b].size(); ++j)
                    m(i, j) = coupling_op.mat(blocks[a][i], blocks[b][j]);
            scat.d[a][b] = std::move(m);
        }
    }
    return scat;
}

std::vector<Matrix> block_restrict(const std::vector<std::vector<Index>>& blocks,
                                   const Matrix& op) {
    std::vector<Matrix> out;
    for (const auto& blk : blocks) {
        Matrix m(blk.size(), blk.size());
        for (std::size_t i = 0; i < blk.size(); ++i)
            for (std::size_t j = 0; j < blk.size(); ++j) m(i, j) = op(blk[i], blk[j]);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Matrix> qfgr_rhs(const QuantumPopulations& pops, const ScatteringSet& scat,
                             const std::vector<Matrix>& h_blocks,
                             const std::vector<Matrix>& h2_blocks, double lambda) {
    const std::size_t nb = pops.blocks.size();
    if (scat.blocks.size() != nb || h_blocks.size() != nb || h2_blocks.size() != nb)
        throw DimensionError("qfgr_rhs: inconsistent block counts");
    const double lam2 = lambda * lambda;
    std::vector<Matrix> out(nb);
    for (std::size_t a = 0; a < nb; ++a) {
        const Matrix& ra = pops.rho[a];
        if (ra.rows() != static_cast<Index>(pops.blocks[a].size()))
            throw DimensionError("qfgr_rhs: population block shape mismatch");
        Matrix acc = -kI * (h_blocks[a] * ra - ra * h_blocks[a]);
        acc += lam2 * (-kI) * (h2_blocks[a] * ra - ra * h2_blocks[a]);
        // dissipative part of -[L,[L,rho]] in block coordinates: the double
        // commutator carries twice the single-jump normalization, so the
        // gain channel enters with weight 2 against a full anticommutator
        for (std::size_t b = 0; b < nb; ++b) {
            if (b == a) continue;  // diagonal scattering vanishes under the gate
            const Matrix& dba = scat.d[b][a];
            const Matrix loss = dba.adjoint() * dba;
            acc += lam2 * (-1.0) * (loss * ra + ra * loss);
            const Matrix& dab = scat.d[a][b];
            acc += lam2 * 2.0 * (dab * pops.rho[b] * dab.adjoint());
        }
        out[a] = std::move(acc);
    }
    return out;
}

namespace {

std::vector<Matrix> axpy(const std::vector<Matrix>& base, double factor,
                         const std::vector<Matrix>& delta) {
    std::vector<Matrix> out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) out[k] = base[k] + factor * delta[k];
    return out;
}

double block_norm(const std::vector<Matrix>& v) {
    double acc = 0.0;
    for (const Matrix& m : v) acc += m.squaredNorm();
    return std::sqrt(acc);
}

}  // namespace

std::vector<QuantumPopulations> evolve_qfgr(const QuantumPopulations& initial,
                                            const ScatteringSet& scat,
                                            const std::vector<Matrix>& h_blocks,
                                            const std::vector<Matrix>& h2_blocks, double lambda,
                                            const std::vector<double>& t_grid, double tol) {
    if (t_grid.empty() || std::abs(t_grid.front()) > 1e-14)
        throw Error("evolve_qfgr: grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (t_grid[k] <= t_grid[k - 1]) throw Error("evolve_qfgr: grid must be increasing");

    // Dormand-Prince 5(4) coefficients
    static const double c[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1, 1};
    static const double a[7][6] = {
        {},
        {1. / 5},
        {3. / 40, 9. / 40},
        {44. / 45, -56. / 15, 32. / 9},
        {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
        {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
        {35. / 384, 0, 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
    static const double b5[7] = {35. / 384, 0, 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84, 0};
    static const double b4[7] = {5179. / 57600, 0,           7571. / 16695, 393. / 640,
                                 -92097. / 339200, 187. / 2100, 1. / 40};

    auto rhs = [&](const std::vector<Matrix>& state) {
        QuantumPopulations tmp;
        tmp.blocks = initial.blocks;
        tmp.rho = state;
        return qfgr_rhs(tmp, scat, h_blocks, h2_blocks, lambda);
    };

    std::vector<QuantumPopulations> trajectory;
    QuantumPopulations current = initial;
    current.time = t_grid.front();
    trajectory.push_back(current);

    const double scale = std::max(1.0, block_norm(initial.rho));
    double h = 1e-3;
    for (std::size_t seg = 1; seg < t_grid.size(); ++seg) {
        const double t_end = t_grid[seg];
        double t = current.time;
        while (t < t_end - 1e-14) {
            h = std::min(h, t_end - t);
            std::vector<std::vector<Matrix>> k(7);
            k[0] = rhs(current.rho);
            for (int stage = 1; stage < 7; ++stage) {
                std::vector<Matrix> arg = current.rho;
                for (int prev = 0; prev < stage; ++prev)
                    if (a[stage][prev] != 0.0) arg = axpy(arg, h * a[stage][prev], k[prev]);
                k[stage] = rhs(arg);
            }
            std::vector<Matrix> next = current.rho, low = current.rho;
            for (int stage = 0; stage < 7; ++stage) {
                if (b5[stage] != 0.0) next = axpy(next, h * b5[stage], k[stage]);
                if (b4[stage] != 0.0) low = axpy(low, h * b4[stage], k[stage]);
            }
            double err = 0.0;
            for (std::size_t blk = 0; blk < next.size(); ++blk)
                err += (next[blk] - low[blk]).squaredNorm();
            err = std::sqrt(err) / scale;

            if (err <= tol) {
                current.rho = std::move(next);
                t += h;
                current.time = t;
            }
            const double grow = (err > 0) ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
            h *= std::min(4.0, std::max(0.1, grow));
            if (h < 1e-14 * std::max(1.0, t_end)) {
                std::ostringstream os;
                os << "evolve_qfgr: step underflow at t = " << t;
                throw Error(os.str());
            }
            (void)c;
        }
        current.time = t_end;
        trajectory.push_back(current);
    }
    return trajectory;
}

std::vector<SteadyState> steady_state_scan(const ScatteringBuilder& builder,
                                           const std::vector<Matrix>& h_blocks,
                                           const std::function<std::vector<Matrix>(double)>&
                                               h2_builder,
                                           const std::vector<double>& t_grid, double lambda) {
    std::vector<SteadyState> out;
    for (double t_window : t_grid) {
        const ScatteringSet scat = builder(t_window);
        const std::vector<Matrix> h2 = h2_builder(t_window);
        const auto& blocks = scat.blocks;

        // generator matrix on block-diagonal coordinates
        Index total = 0;
        for (const auto& blk : blocks) total += static_cast<Index>(blk.size() * blk.size());
        Matrix gen(total, total);
        Index col = 0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const Index mb = static_cast<Index>(blocks[b].size());
            for (Index j = 0; j < mb * mb; ++j, ++col) {
                QuantumPopulations probe;
                probe.blocks = blocks;
                for (const auto& blk : blocks)
                    probe.rho.push_back(
                        Matrix::Zero(static_cast<Index>(blk.size()),
                                     static_cast<Index>(blk.size())));
                probe.rho[b] = devectorize(Vector::Unit(mb * mb, j), mb);
                const auto der = qfgr_rhs(probe, scat, h_blocks, h2, lambda);
                Index row = 0;
                for (const Matrix& m : der) {
                    gen.block(row, col, m.size(), 1) = vectorize(m);
                    row += m.size();
                }
            }
        }

        Eigen::JacobiSVD<Matrix> svd(gen, Eigen::ComputeFullV);
        const double cap = svd.singularValues()(0);
        SteadyState st;
        st.t_window = t_window;
        for (Index k = 0; k < svd.singularValues().size(); ++k)
            if (svd.singularValues()(k) <= std::max(1e-12, 1e-10 * cap)) ++st.kernel_dim;
        st.unique = (st.kernel_dim == 1);

        // null vector -> populations, normalized to unit global trace
        const Vector null_vec = svd.matrixV().col(svd.matrixV().cols() - 1);
        QuantumPopulations pops;
        pops.blocks = blocks;
        Index off = 0;
        for (const auto& blk : blocks) {
            const Index mb = static_cast<Index>(blk.size());
            pops.rho.push_back(devectorize(null_vec.segment(off, mb * mb), mb));
            off += mb * mb;
        }
        Complex tr(0, 0);
        for (const Matrix& m : pops.rho) tr += m.trace();
        if (std::abs(tr) > 1e-10) {
            for (Matrix& m : pops.rho) m /= tr;
            for (Matrix& m : pops.rho) m = 0.5 * (m + m.adjoint());
        }
        st.populations = pops;
        st.residual = block_norm(qfgr_rhs(pops, scat, h_blocks, h2, lambda));
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace wcl::qfgr
