#include "wcl/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wcl::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + " " + what);
}

Matrix parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) fail(field, "must be a non-empty nested array");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (static_cast<Index>(row.size()) != cols) fail(field, "rows have unequal lengths");
        for (Index c = 0; c < cols; ++c) {
            const auto& cell = row.at(c);
            if (cell.is_number()) {
                m(r, c) = Complex(cell.get<double>(), 0.0);
            } else if (cell.is_array() && cell.size() == 2) {
                m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
            } else {
                fail(field, "entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

std::vector<double> parse_reals(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "explicit") return ModelKind::Explicit;
    if (s == "random") return ModelKind::Random;
    if (s == "quasi_continuum") return ModelKind::QuasiContinuum;
    fail("model.kind", "unknown: " + s);
}

proj::Kind parse_projection_kind(const std::string& s) {
    if (s == "partial_trace") return proj::Kind::PartialTrace;
    if (s == "diagonal") return proj::Kind::Diagonal;
    if (s == "block_diagonal") return proj::Kind::BlockDiagonal;
    if (s == "entangling") return proj::Kind::Entangling;
    fail("projection.kind", "unknown: " + s);
}

ExperimentKind parse_experiment_kind(const std::string& s) {
    if (s == "audit") return ExperimentKind::Audit;
    if (s == "generator") return ExperimentKind::Generator;
    if (s == "nz_residual") return ExperimentKind::NzResidual;
    if (s == "sweep") return ExperimentKind::Sweep;
    if (s == "qfgr") return ExperimentKind::Qfgr;
    if (s == "steady_scan") return ExperimentKind::SteadyScan;
    fail("experiment.kind", "unknown: " + s);
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ScenarioConfig cfg;

    if (!j.contains("model")) fail("model", "missing");
    const json& jm = j.at("model");
    cfg.model.kind = parse_model_kind(jm.value("kind", std::string("explicit")));
    cfg.model.seed = jm.value("seed", std::uint64_t{1});
    switch (cfg.model.kind) {
        case ModelKind::Explicit:
            if (!jm.contains("H0")) fail("model.H0", "missing for explicit model");
            if (!jm.contains("Hp")) fail("model.Hp", "missing for explicit model");
            cfg.model.h0 = parse_matrix(jm.at("H0"), "model.H0");
            cfg.model.hp = parse_matrix(jm.at("Hp"), "model.Hp");
            break;
        case ModelKind::Random:
            cfg.model.dim = jm.value("dim", 4);
            if (cfg.model.dim < 2) fail("model.dim", "must be at least 2");
            break;
        case ModelKind::QuasiContinuum:
            cfg.model.bath_levels = jm.value("bath_levels", 60);
            cfg.model.bath_width = jm.value("bath_width", 6.0);
            cfg.model.beta = jm.value("beta", 1.0);
            cfg.model.gap = jm.value("gap", 1.0);
            if (cfg.model.bath_levels < 2) fail("model.bath_levels", "must be at least 2");
            if (cfg.model.bath_width <= 0) fail("model.bath_width", "must be positive");
            break;
    }

    if (!j.contains("projection")) fail("projection", "missing");
    const json& jp = j.at("projection");
    cfg.projection.kind = parse_projection_kind(jp.value("kind", std::string("diagonal")));
    cfg.projection.dim_a = jp.value("dim_a", 0);
    cfg.projection.dim_b = jp.value("dim_b", 0);
    if (jp.contains("sigma")) cfg.projection.sigma = parse_matrix(jp.at("sigma"), "projection.sigma");
    if (jp.contains("basis")) cfg.projection.basis = parse_matrix(jp.at("basis"), "projection.basis");
    if (jp.contains("blocks")) {
        for (const auto& blk : jp.at("blocks")) {
            std::vector<Index> ids;
            for (const auto& v : blk) ids.push_back(v.get<Index>());
            cfg.projection.blocks.push_back(std::move(ids));
        }
    }
    if (jp.contains("family")) {
        const json& jf = jp.at("family");
        if (!jf.contains("C") || !jf.contains("D"))
            fail("projection.family", "needs arrays C and D");
        std::vector<Matrix> cs, ds;
        for (std::size_t k = 0; k < jf.at("C").size(); ++k)
            cs.push_back(parse_matrix(jf.at("C").at(k), "projection.family.C"));
        for (std::size_t k = 0; k < jf.at("D").size(); ++k)
            ds.push_back(parse_matrix(jf.at("D").at(k), "projection.family.D"));
        cfg.projection.family_c = std::move(cs);
        cfg.projection.family_d = std::move(ds);
    }
    if (cfg.projection.kind == proj::Kind::PartialTrace && cfg.model.kind != ModelKind::QuasiContinuum) {
        if (!cfg.projection.sigma) fail("projection.sigma", "missing for partial_trace projection");
    }

    if (!j.contains("experiment")) fail("experiment", "missing");
    const json& je = j.at("experiment");
    cfg.experiment.kind = parse_experiment_kind(je.value("kind", std::string("audit")));
    cfg.experiment.lambda = je.value("lambda", 0.3);
    if (je.contains("lambdas")) cfg.experiment.lambdas = parse_reals(je.at("lambdas"), "experiment.lambdas");
    cfg.experiment.xi = je.value("xi", 1.0);
    cfg.experiment.t_window = je.value("T", 1.0);
    if (je.contains("T_tilde")) {
        const auto& tt = je.at("T_tilde");
        if (tt.is_string()) {
            if (tt.get<std::string>() != "eq_collision")
                fail("experiment.T_tilde", "must be a number or \"eq_collision\"");
        } else {
            cfg.experiment.t_tilde = tt.get<double>();
        }
    }
    cfg.experiment.tau_bar = je.value("tau_bar", 1.0);
    cfg.experiment.n_points = je.value("n_points", 64);
    cfg.experiment.t_max = je.value("t_max", 4.0);
    cfg.experiment.t_step = je.value("t_step", 0.01);
    if (je.contains("t_grid")) cfg.experiment.t_grid = parse_reals(je.at("t_grid"), "experiment.t_grid");
    if (je.contains("T_grid"))
        cfg.experiment.window_grid = parse_reals(je.at("T_grid"), "experiment.T_grid");
    cfg.experiment.gate_tol = je.value("gate_tol", 1e-10);
    cfg.experiment.cp_tol = je.value("cp_tol", 1e-8);
    cfg.experiment.tp_tol = je.value("tp_tol", 1e-9);

    if (cfg.experiment.xi <= 0.0 || cfg.experiment.xi >= 2.0) fail("experiment.xi", "out of (0,2)");
    if (cfg.experiment.lambda <= 0.0 || cfg.experiment.lambda >= 1.0)
        fail("experiment.lambda", "out of (0,1)");
    if (cfg.experiment.kind == ExperimentKind::Sweep) {
        if (cfg.experiment.lambdas.empty()) fail("experiment.lambdas", "missing for sweep");
        for (double l : cfg.experiment.lambdas)
            if (l <= 0.0 || l >= 1.0) fail("experiment.lambdas", "values must lie in (0,1)");
    }
    if (cfg.experiment.t_window <= 0) fail("experiment.T", "must be positive");
    if (cfg.experiment.tau_bar <= 0) fail("experiment.tau_bar", "must be positive");
    if (cfg.experiment.gate_tol <= 0) fail("experiment.gate_tol", "must be positive");
    if (cfg.experiment.cp_tol <= 0) fail("experiment.cp_tol", "must be positive");
    if (cfg.experiment.tp_tol <= 0) fail("experiment.tp_tol", "must be positive");
    if (cfg.experiment.t_step <= 0) fail("experiment.t_step", "must be positive");

    if (j.contains("output")) {
        cfg.output.dir = j.at("output").value("dir", std::string("out"));
        cfg.output.prefix = j.at("output").value("prefix", std::string("run"));
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void scale_tolerances(ScenarioConfig& cfg, double factor) {
    if (factor <= 0) throw ConfigError("tol-scale must be positive");
    cfg.experiment.gate_tol *= factor;
    cfg.experiment.cp_tol *= factor;
    cfg.experiment.tp_tol *= factor;
}

namespace {

// remove the projected first-order part of the coupling:
// subtract sum_n (Hbar_n - tr(Hbar_n)/dA) (x) A_n with
// Hbar_n = Tr_B(H' (1 (x) B_n)); the pairing Tr(A_n B_m) = delta makes the
// correction exact
Matrix remove_first_order_tensor(const Matrix& hp, Index da, Index db,
                                 const std::vector<Matrix>& a_ops,
                                 const std::vector<Matrix>& b_ops) {
    Matrix out = hp;
    const Matrix id_a = Matrix::Identity(da, da);
    for (std::size_t n = 0; n < a_ops.size(); ++n) {
        const Matrix hbar =
            proj::trace_out_bath(Matrix(hp * kron(id_a, b_ops[n])), da, db);
        const Matrix delta = hbar - (hbar.trace() / static_cast<double>(da)) * id_a;
        out -= kron(delta, a_ops[n]);
    }
    return out;
}

}  // namespace

GatedModel random_gated_model(proj::Kind kind, std::uint64_t seed, Index dim_a, Index dim_b,
                              Index dim, Index sectors) {
    Rng rng(seed);
    GatedModel m;
    switch (kind) {
        case proj::Kind::Diagonal: {
            const Matrix basis = rng.unitary(dim);
            m.projection = proj::diagonal_projection(basis);
            RealVector levels(dim);
            for (Index i = 0; i < dim; ++i) levels(i) = rng.uniform(-2.0, 2.0);
            m.h0 = HermitianOperator::from(
                basis * levels.cast<Complex>().asDiagonal() * basis.adjoint());
            Matrix hp = rng.hermitian(dim);
            Matrix hp_basis = basis.adjoint() * hp * basis;
            hp_basis.diagonal().setZero();
            m.hp = HermitianOperator::from(basis * hp_basis * basis.adjoint());
            break;
        }
        case proj::Kind::BlockDiagonal: {
            std::vector<std::vector<Index>> blocks;
            Index half = dim / 2;
            std::vector<Index> b1, b2;
            for (Index i = 0; i < half; ++i) b1.push_back(i);
            for (Index i = half; i < dim; ++i) b2.push_back(i);
            blocks = {b1, b2};
            m.projection = proj::block_diagonal_projection(blocks, dim);
            Matrix h0 = Matrix::Zero(dim, dim);
            h0.block(0, 0, half, half) = rng.hermitian(half);
            h0.block(half, half, dim - half, dim - half) = rng.hermitian(dim - half);
            m.h0 = HermitianOperator::from(h0);
            Matrix hp = rng.hermitian(dim);
            hp.block(0, 0, half, half).setZero();
            hp.block(half, half, dim - half, dim - half).setZero();
            m.hp = HermitianOperator::from(hp);
            break;
        }
        case proj::Kind::PartialTrace: {
            Matrix hb = Matrix::Zero(dim_b, dim_b);
            for (Index i = 0; i < dim_b; ++i) hb(i, i) = rng.uniform(-1.5, 1.5);
            Eigen::VectorXd w(dim_b);
            for (Index i = 0; i < dim_b; ++i) w(i) = std::exp(-hb(i, i).real());
            w /= w.sum();
            Matrix sigma = w.cast<Complex>().asDiagonal();
            m.projection =
                proj::partial_trace_projection(dim_a, dim_b, DensityMatrix::from(sigma));
            const Matrix h0 = kron(rng.hermitian(dim_a), Matrix::Identity(dim_b, dim_b)) +
                              kron(Matrix::Identity(dim_a, dim_a), hb);
            m.h0 = HermitianOperator::from(h0);
            Matrix hp = rng.hermitian(dim_a * dim_b);
            hp = remove_first_order_tensor(hp, dim_a, dim_b, {Matrix::Identity(dim_b, dim_b)},
                                           {sigma});
            m.hp = HermitianOperator::from(hp);
            break;
        }
        case proj::Kind::Entangling: {
            const auto fam = proj::EntanglingFamily::random(rng, dim_b, sectors, false, true);
            m.projection = proj::entangling_projection(fam, dim_a);
            Matrix hb = Matrix::Zero(dim_b, dim_b);
            for (Index i = 0; i < dim_b; ++i) hb(i, i) = rng.uniform(-1.5, 1.5);
            const Matrix h0 = kron(rng.hermitian(dim_a), Matrix::Identity(dim_b, dim_b)) +
                              kron(Matrix::Identity(dim_a, dim_a), hb);
            m.h0 = HermitianOperator::from(h0);
            Matrix hp = rng.hermitian(dim_a * dim_b);
            hp = remove_first_order_tensor(hp, dim_a, dim_b, fam.a_ops, fam.b_ops);
            m.hp = HermitianOperator::from(hp);
            break;
        }
        case proj::Kind::Custom:
            throw Error("random_gated_model: no custom-kind generator");
    }
    return m;
}

Model build_model(const ScenarioConfig& cfg) {
    Model m;
    switch (cfg.model.kind) {
        case ModelKind::Explicit: {
            m.h0 = HermitianOperator::from(*cfg.model.h0);
            m.hp = HermitianOperator::from(*cfg.model.hp);
            const Index d = m.h0.dim();
            switch (cfg.projection.kind) {
                case proj::Kind::PartialTrace:
                    m.projection = proj::partial_trace_projection(
                        cfg.projection.dim_a, cfg.projection.dim_b,
                        DensityMatrix::from(*cfg.projection.sigma));
                    break;
                case proj::Kind::Diagonal:
                    m.projection = proj::diagonal_projection(
                        cfg.projection.basis ? *cfg.projection.basis : Matrix::Identity(d, d));
                    break;
                case proj::Kind::BlockDiagonal:
                    m.projection = proj::block_diagonal_projection(cfg.projection.blocks, d);
                    break;
                case proj::Kind::Entangling: {
                    if (!cfg.projection.family_c)
                        throw ConfigError("projection.family missing for entangling projection");
                    auto fam = proj::EntanglingFamily::from(*cfg.projection.family_c,
                                                            *cfg.projection.family_d);
                    m.projection = proj::entangling_projection(fam, cfg.projection.dim_a);
                    break;
                }
                case proj::Kind::Custom:
                    throw ConfigError("projection.kind custom not constructible from config");
            }
            break;
        }
        case ModelKind::Random: {
            auto gm = random_gated_model(cfg.projection.kind, cfg.model.seed,
                                         cfg.projection.dim_a ? cfg.projection.dim_a : 2,
                                         cfg.projection.dim_b ? cfg.projection.dim_b : 3,
                                         cfg.model.dim, 2);
            m.h0 = gm.h0;
            m.hp = gm.hp;
            m.projection = gm.projection;
            break;
        }
        case ModelKind::QuasiContinuum: {
            const Index nb = cfg.model.bath_levels;
            const double w = cfg.model.bath_width;
            Rng rng(cfg.model.seed);
            Matrix hb = Matrix::Zero(nb, nb);
            for (Index i = 0; i < nb; ++i)
                hb(i, i) = -0.5 * w + w * static_cast<double>(i) / (nb - 1);
            Eigen::VectorXd weights(nb);
            for (Index i = 0; i < nb; ++i)
                weights(i) = std::exp(-cfg.model.beta * hb(i, i).real());
            weights /= weights.sum();
            const Matrix sigma = weights.cast<Complex>().asDiagonal();

            Matrix b = rng.hermitian(nb);
            b -= ((b * sigma).trace()) * Matrix::Identity(nb, nb);
            Matrix sx(2, 2);
            sx << 0, 1, 1, 0;
            Matrix hp = kron(sx, b);
            Eigen::SelfAdjointEigenSolver<Matrix> es(hp, Eigen::EigenvaluesOnly);
            hp /= std::max(std::abs(es.eigenvalues().maxCoeff()),
                           std::abs(es.eigenvalues().minCoeff()));

            Matrix sz(2, 2);
            sz << 1, 0, 0, -1;
            const Matrix h0 = kron(0.5 * cfg.model.gap * sz, Matrix::Identity(nb, nb)) +
                              kron(Matrix::Identity(2, 2), hb);
            m.h0 = HermitianOperator::from(h0);
            m.hp = HermitianOperator::from(hp);
            m.projection = proj::partial_trace_projection(2, nb, DensityMatrix::from(sigma));
            break;
        }
    }

    m.compatibility =
        proj::check_dynamical_compatibility(m.projection, m.h0, cfg.experiment.gate_tol);
    if (!m.compatibility.pass) {
        std::ostringstream os;
        os << "model: dynamical compatibility [Z, P0] residual " << m.compatibility.residual
           << " exceeds " << cfg.experiment.gate_tol;
        throw GateError(os.str());
    }
    m.first_order = proj::check_no_first_order(m.projection, m.hp, cfg.experiment.gate_tol);
    if (!m.first_order.pass) {
        std::ostringstream os;
        os << "model: projected first-order coupling " << m.first_order.residual << " exceeds "
           << cfg.experiment.gate_tol;
        throw GateError(os.str());
    }
    return m;
}

}  // namespace wcl::cli
