// model.hpp — configuration schema, validation, and deterministic model
// generation for the experiment driver.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wcl/opcore.hpp"
#include "wcl/projections.hpp"

namespace wcl::cli {

enum class ModelKind { Explicit, Random, QuasiContinuum };
enum class ExperimentKind { Audit, Generator, NzResidual, Sweep, Qfgr, SteadyScan };

struct ModelSpec {
    ModelKind kind = ModelKind::Explicit;
    std::uint64_t seed = 1;
    // explicit
    std::optional<Matrix> h0, hp;
    // random
    Index dim = 0;
    // quasi-continuum
    Index bath_levels = 60;
    double bath_width = 6.0;
    double beta = 1.0;
    double gap = 1.0;
};

struct ProjectionSpec {
    proj::Kind kind = proj::Kind::Diagonal;
    Index dim_a = 0, dim_b = 0;
    std::optional<Matrix> sigma;
    std::optional<Matrix> basis;
    std::vector<std::vector<Index>> blocks;
    std::optional<std::vector<Matrix>> family_c, family_d;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Audit;
    double lambda = 0.3;
    std::vector<double> lambdas;
    double xi = 1.0;
    double t_window = 1.0;                 // T for generator/audit/qfgr
    std::optional<double> t_tilde;         // absent => completed collision time
    double tau_bar = 1.0;
    int n_points = 64;
    double t_max = 4.0;
    double t_step = 0.01;
    std::vector<double> t_grid;            // audit/semigroup sampling times
    std::vector<double> window_grid;       // steady-scan T values
    double gate_tol = 1e-10;
    double cp_tol = 1e-8;
    double tp_tol = 1e-9;
};

struct OutputSpec {
    std::string dir = "out";
    std::string prefix = "run";
};

struct ScenarioConfig {
    ModelSpec model;
    ProjectionSpec projection;
    ExperimentSpec experiment;
    OutputSpec output;
};

// Parses and validates; violations are reported as ConfigError carrying the
// offending field path (e.g. "experiment.xi out of (0,2)").
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

// Scales every tolerance field by the given factor (exploratory runs).
void scale_tolerances(ScenarioConfig& cfg, double factor);

struct Model {
    HermitianOperator h0, hp;
    proj::KrausProjection projection;
    proj::CompatibilityReport compatibility;
    proj::FirstOrderReport first_order;
};

// Deterministic from the seed; runs both generator gates and throws GateError
// with diagnostics when they fail.
Model build_model(const ScenarioConfig& cfg);

// Seeded gated model for a given projection: H0 commuting with P0 and a
// coupling with the projected first-order part removed. Used by the random
// model kind and by the acceptance suites.
struct GatedModel {
    HermitianOperator h0, hp;
    proj::KrausProjection projection;
};

GatedModel random_gated_model(proj::Kind kind, std::uint64_t seed, Index dim_a = 2,
                              Index dim_b = 3, Index dim = 6, Index sectors = 2);

}  // namespace wcl::cli
