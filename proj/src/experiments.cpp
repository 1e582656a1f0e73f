#include "wcl/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wcl/dynamics.hpp"
#include "wcl/generators.hpp"
#include "wcl/positivity.hpp"
#include "wcl/qfgr.hpp"

namespace wcl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    if (!std::isfinite(x)) throw Error("experiment produced a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw Error("cannot open output file: " + path.string());
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k)
            out_ << cells[k] << (k + 1 < cells.size() ? "," : "");
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

const char* verdict(bool pass) { return pass ? "pass" : "fail"; }

struct AuditTable {
    std::vector<std::array<std::string, 3>> rows;
    bool all_pass = true;

    void add(const std::string& check, double residual, bool pass) {
        rows.push_back({check, fmt(residual), verdict(pass)});
        all_pass = all_pass && pass;
    }
    void write(const fs::path& path) const {
        CsvWriter csv(path, "check,residual,verdict");
        for (const auto& r : rows) csv.row({r[0], r[1], r[2]});
    }
};

json config_echo(const ScenarioConfig& cfg) {
    json j;
    j["model"]["kind"] = static_cast<int>(cfg.model.kind);
    j["model"]["seed"] = cfg.model.seed;
    j["model"]["bath_levels"] = cfg.model.bath_levels;
    j["model"]["bath_width"] = cfg.model.bath_width;
    j["model"]["beta"] = cfg.model.beta;
    j["model"]["gap"] = cfg.model.gap;
    j["model"]["dim"] = cfg.model.dim;
    j["projection"]["kind"] = proj::kind_name(cfg.projection.kind);
    j["experiment"]["kind"] = static_cast<int>(cfg.experiment.kind);
    j["experiment"]["lambda"] = cfg.experiment.lambda;
    j["experiment"]["lambdas"] = cfg.experiment.lambdas;
    j["experiment"]["xi"] = cfg.experiment.xi;
    j["experiment"]["T"] = cfg.experiment.t_window;
    j["experiment"]["tau_bar"] = cfg.experiment.tau_bar;
    j["experiment"]["n_points"] = cfg.experiment.n_points;
    j["experiment"]["t_max"] = cfg.experiment.t_max;
    j["experiment"]["t_step"] = cfg.experiment.t_step;
    j["experiment"]["gate_tol"] = cfg.experiment.gate_tol;
    j["experiment"]["cp_tol"] = cfg.experiment.cp_tol;
    j["experiment"]["tp_tol"] = cfg.experiment.tp_tol;
    j["output"]["dir"] = cfg.output.dir;
    j["output"]["prefix"] = cfg.output.prefix;
    return j;
}

std::vector<double> default_t_grid(const ExperimentSpec& e) {
    if (!e.t_grid.empty()) return e.t_grid;
    return {0.1, 1.0, 10.0};
}

}  // namespace

RunResult run_experiment(const ScenarioConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(cfg.output.dir);
    const fs::path dir(cfg.output.dir);
    const std::string prefix = cfg.output.prefix;

    RunResult result;
    json manifest;
    manifest["config"] = config_echo(cfg);
    manifest["versions"]["wcl"] = "0.1.0";
    manifest["versions"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION);
    manifest["partial"] = true;

    auto flush_manifest = [&]() {
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        std::ofstream mf(dir / (prefix + "_manifest.json"));
        mf << manifest.dump(2) << "\n";
    };

    try {
        const Model model = build_model(cfg);
        manifest["gates"]["compatibility_residual"] = model.compatibility.residual;
        manifest["gates"]["first_order_residual"] = model.first_order.residual;
        const auto& e = cfg.experiment;

        switch (e.kind) {
            case ExperimentKind::Audit: {
                AuditTable table;
                const auto audit = proj::projection_audit(model.projection, cfg.model.seed);
                for (const auto& row : audit.rows) table.add(row.check, row.residual, row.pass);
                table.add("dynamical_compatibility", model.compatibility.residual,
                          model.compatibility.pass);
                table.add("first_order_gate", model.first_order.residual,
                          model.first_order.pass);
                // generator-level positivity audit at the configured window
                const auto bundle = gen::build_generator(model.projection, model.h0, model.hp,
                                                         e.lambda, e.t_window, e.gate_tol);
                const auto semi = gen::audit_bundle(bundle, default_t_grid(e), e.cp_tol,
                                                    e.tp_tol);
                table.add("generator_conditional_cp",
                          std::max(0.0, -semi.generator_form.min_eigenvalue),
                          semi.generator_form.conditionally_cp(e.cp_tol));
                for (const auto& row : semi.rows) {
                    table.add("semigroup_cp_t=" + fmt(row.t), std::max(0.0, -row.choi_floor),
                              row.cp);
                    table.add("semigroup_tp_t=" + fmt(row.t), row.trace_defect, row.tp);
                }
                const fs::path path = dir / (prefix + "_audit.csv");
                table.write(path);
                result.artifacts.push_back(path.string());
                result.all_pass = table.all_pass;
                break;
            }
            case ExperimentKind::Generator: {
                const auto bundle = gen::build_generator(model.projection, model.h0, model.hp,
                                                         e.lambda, e.t_window, e.gate_tol);
                AuditTable table;
                table.add("gate_compatibility", bundle.gates.compatibility.residual,
                          bundle.gates.compatibility.pass);
                table.add("gate_first_order", bundle.gates.first_order.residual,
                          bundle.gates.first_order.pass);
                if (bundle.full) {
                    table.add("trace_annihilation", cp::trace_output_defect(*bundle.full),
                              cp::trace_output_defect(*bundle.full) <= 1e-9);
                }
                const auto semi =
                    gen::audit_bundle(bundle, default_t_grid(e), e.cp_tol, e.tp_tol);
                table.add("generator_conditional_cp",
                          std::max(0.0, -semi.generator_form.min_eigenvalue),
                          semi.generator_form.conditionally_cp(e.cp_tol));
                table.add("gks_reconstruction", semi.generator_form.reconstruction_residual,
                          semi.generator_form.reconstruction_residual <= 1e-9);
                for (const auto& row : semi.rows) {
                    table.add("semigroup_cp_t=" + fmt(row.t), std::max(0.0, -row.choi_floor),
                              row.cp);
                    table.add("semigroup_tp_t=" + fmt(row.t), row.trace_defect, row.tp);
                }
                manifest["generator"]["coupling_op_norm"] =
                    matrix_spec_norm(bundle.coupling_op.mat);
                manifest["generator"]["hamiltonian_shift_norm"] =
                    matrix_spec_norm(bundle.hamiltonian_shift.mat);
                const fs::path path = dir / (prefix + "_generator.csv");
                table.write(path);
                result.artifacts.push_back(path.string());
                result.all_pass = table.all_pass;
                break;
            }
            case ExperimentKind::NzResidual: {
                std::vector<double> coarse, fine;
                for (double t = 0.0; t <= e.t_max + 1e-12; t += e.t_step) coarse.push_back(t);
                for (double t = 0.0; t <= e.t_max + 1e-12; t += 0.5 * e.t_step)
                    fine.push_back(t);
                const double r1 =
                    dyn::nz_residual(model.projection, model.h0, model.hp, e.lambda, coarse);
                const double r2 =
                    dyn::nz_residual(model.projection, model.h0, model.hp, e.lambda, fine);
                CsvWriter csv(dir / (prefix + "_nz.csv"), "step,max_residual");
                csv.row({fmt(e.t_step), fmt(r1)});
                csv.row({fmt(0.5 * e.t_step), fmt(r2)});
                manifest["nz"]["reduction_factor"] = r1 / std::max(r2, 1e-300);
                result.artifacts.push_back((dir / (prefix + "_nz.csv")).string());
                break;
            }
            case ExperimentKind::Sweep: {
                const auto rep = dyn::convergence_sweep(model.projection, model.h0, model.hp,
                                                        e.lambdas, e.xi, e.t_tilde, e.tau_bar,
                                                        e.n_points);
                CsvWriter csv(dir / (prefix + "_sweep.csv"), "lambda,T,tau_bar,sup_error");
                for (std::size_t k = 0; k < rep.lambdas.size(); ++k)
                    csv.row({fmt(rep.lambdas[k]), fmt(rep.windows[k]), fmt(rep.tau_bar),
                             fmt(rep.sup_errors[k])});
                manifest["sweep"]["t_tilde"] = rep.t_tilde;
                manifest["sweep"]["collision_formula"] = rep.collision_formula;
                manifest["sweep"]["monotone_decreasing"] = rep.monotone_decreasing;
                result.artifacts.push_back((dir / (prefix + "_sweep.csv")).string());
                result.all_pass = rep.monotone_decreasing;
                break;
            }
            case ExperimentKind::Qfgr: {
                if (model.projection.kind != proj::Kind::BlockDiagonal &&
                    model.projection.kind != proj::Kind::Diagonal)
                    throw ConfigError(
                        "experiment.kind qfgr requires a block_diagonal or diagonal projection");
                std::vector<std::vector<Index>> blocks = model.projection.blocks;
                if (blocks.empty())
                    for (Index i = 0; i < model.h0.dim(); ++i) blocks.push_back({i});

                const auto bundle = gen::build_generator(model.projection, model.h0, model.hp,
                                                         e.lambda, e.t_window, e.gate_tol);
                const auto scat = qfgr::scattering_operators(blocks, bundle.coupling_op);
                const auto h_blocks = qfgr::block_restrict(blocks, model.h0.mat);
                const auto h2_blocks =
                    qfgr::block_restrict(blocks, bundle.hamiltonian_shift.mat);

                // default start: maximally mixed inside the first block
                qfgr::QuantumPopulations initial;
                initial.blocks = blocks;
                for (const auto& blk : blocks)
                    initial.rho.push_back(Matrix::Zero(static_cast<Index>(blk.size()),
                                                       static_cast<Index>(blk.size())));
                initial.rho[0] = Matrix::Identity(static_cast<Index>(blocks[0].size()),
                                                  static_cast<Index>(blocks[0].size())) /
                                 static_cast<double>(blocks[0].size());

                std::vector<double> grid;
                for (double t = 0.0; t <= e.t_max + 1e-12; t += e.t_step) grid.push_back(t);
                const auto traj = qfgr::evolve_qfgr(initial, scat, h_blocks, h2_blocks,
                                                    e.lambda, grid);

                CsvWriter csv(dir / (prefix + "_qfgr.csv"), "time,block,trace,min_eig");
                double worst_drift = 0.0, worst_eig = 0.0;
                for (const auto& pops : traj) {
                    worst_drift = std::max(worst_drift, std::abs(pops.global_trace() - 1.0));
                    worst_eig = std::min(worst_eig, pops.min_eigenvalue());
                    for (std::size_t a = 0; a < pops.rho.size(); ++a) {
                        Eigen::SelfAdjointEigenSolver<Matrix> es(pops.rho[a],
                                                                 Eigen::EigenvaluesOnly);
                        csv.row({fmt(pops.time), std::to_string(a),
                                 fmt(pops.rho[a].trace().real()),
                                 fmt(es.eigenvalues().minCoeff())});
                    }
                }
                manifest["qfgr"]["max_trace_drift"] = worst_drift;
                manifest["qfgr"]["min_block_eigenvalue"] = worst_eig;
                result.all_pass = worst_drift <= 1e-8 && worst_eig >= -1e-8;

                // cross-validate against the matrix-exponential route
                if (bundle.full) {
                    const Matrix rho0 = qfgr::assemble_state(initial, model.h0.dim());
                    double worst = 0.0;
                    for (std::size_t k = 0; k < traj.size(); ++k) {
                        const Matrix via_exp =
                            dyn::markov_propagator(bundle, grid[k]).apply(rho0);
                        worst = std::max(
                            worst,
                            (via_exp - qfgr::assemble_state(traj[k], model.h0.dim())).norm());
                    }
                    manifest["qfgr"]["ode_vs_exponential"] = worst;
                    result.all_pass = result.all_pass && worst <= 1e-7;
                }
                result.artifacts.push_back((dir / (prefix + "_qfgr.csv")).string());
                break;
            }
            case ExperimentKind::SteadyScan: {
                if (model.projection.kind != proj::Kind::BlockDiagonal &&
                    model.projection.kind != proj::Kind::Diagonal)
                    throw ConfigError(
                        "experiment.kind steady_scan requires a block_diagonal or diagonal "
                        "projection");
                std::vector<std::vector<Index>> blocks = model.projection.blocks;
                if (blocks.empty())
                    for (Index i = 0; i < model.h0.dim(); ++i) blocks.push_back({i});
                std::vector<double> windows = e.window_grid;
                if (windows.empty()) windows = {0.5, 1.0, 2.0, 5.0};

                const auto h_blocks = qfgr::block_restrict(blocks, model.h0.mat);
                auto builder = [&](double t_window) {
                    return qfgr::scattering_operators(
                        blocks, gen::smoothed_coupling(model.h0, model.hp, t_window));
                };
                auto h2_builder = [&](double t_window) {
                    return qfgr::block_restrict(
                        blocks,
                        gen::second_order_hamiltonian(model.h0, model.hp, t_window).mat);
                };
                const auto states =
                    qfgr::steady_state_scan(builder, h_blocks, h2_builder, windows, e.lambda);

                CsvWriter csv(dir / (prefix + "_steady.csv"),
                              "T,block,trace,min_eig,residual,kernel_dim");
                for (const auto& st : states) {
                    for (std::size_t a = 0; a < st.populations.rho.size(); ++a) {
                        Eigen::SelfAdjointEigenSolver<Matrix> es(st.populations.rho[a],
                                                                 Eigen::EigenvaluesOnly);
                        csv.row({fmt(st.t_window), std::to_string(a),
                                 fmt(st.populations.rho[a].trace().real()),
                                 fmt(es.eigenvalues().minCoeff()), fmt(st.residual),
                                 std::to_string(st.kernel_dim)});
                    }
                    if (st.unique && st.residual > 1e-9) result.all_pass = false;
                }
                result.artifacts.push_back((dir / (prefix + "_steady.csv")).string());
                break;
            }
        }

        manifest["partial"] = false;
        manifest["all_pass"] = result.all_pass;
        manifest["artifacts"] = result.artifacts;
        result.exit_code = result.all_pass ? 0 : 2;
        manifest["exit_code"] = result.exit_code;
        flush_manifest();
        return result;
    } catch (...) {
        manifest["partial"] = true;
        flush_manifest();
        throw;
    }
}

}  // namespace wcl::cli
