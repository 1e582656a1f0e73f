// wcl — completely positive Markovian generator toolkit, experiment driver

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "wcl/experiments.hpp"
#include "wcl/model.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tol_scale = 1.0;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config, "scenario config (JSON)")->required();
    sub->add_option("--out", opts.out, "output directory (overrides config)");
    sub->add_option("--seed", opts.seed, "override the model seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--tol-scale", opts.tol_scale,
                    "multiply all tolerances (exploratory runs)");
}

int run(const CommonOpts& opts, wcl::cli::ExperimentKind kind) {
    auto cfg = wcl::cli::load_config(opts.config);
    cfg.experiment.kind = kind;
    if (!opts.out.empty()) cfg.output.dir = opts.out;
    if (opts.seed_set) cfg.model.seed = opts.seed;
    if (opts.tol_scale != 1.0) wcl::cli::scale_tolerances(cfg, opts.tol_scale);
    const auto result = wcl::cli::run_experiment(cfg);
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"projected Markovian generators: audits, sweeps, population dynamics"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        wcl::cli::ExperimentKind kind;
    };
    const Entry entries[] = {
        {"audit", "projection and generator positivity audits", wcl::cli::ExperimentKind::Audit},
        {"generator", "build the full generator and audit it",
         wcl::cli::ExperimentKind::Generator},
        {"nz-residual", "memory-kernel identity residual at two grid steps",
         wcl::cli::ExperimentKind::NzResidual},
        {"sweep", "weak-coupling convergence sweep over lambda",
         wcl::cli::ExperimentKind::Sweep},
        {"qfgr", "coupled block population dynamics", wcl::cli::ExperimentKind::Qfgr},
        {"steady-scan", "steady states as a function of the window",
         wcl::cli::ExperimentKind::SteadyScan},
    };

    CommonOpts opts[6];
    for (int k = 0; k < 6; ++k) {
        CLI::App* sub = app.add_subcommand(entries[k].name, entries[k].help);
        add_common(sub, opts[k]);
        sub->callback([k, &opts, &entries]() {
            const int code = run(opts[k], entries[k].kind);
            if (code != 0) throw CLI::RuntimeError(code);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const wcl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
