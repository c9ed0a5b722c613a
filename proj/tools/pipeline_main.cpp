// pipeline — stage-wise driver for the retrieval-dataset synthesis pipeline.
//
//   pipeline <stage> --config <file> [--workdir <dir>] [--seed N]
//
// Stages: ingest, chunk, clean, gen-bottomup, cluster, gen-topdown, mine,
// emit, audit, eval, estimate-cost. Outputs land under <workdir>/artifacts;
// a stage re-runs only when its inputs or config changed.
//
// Exit codes: 0 ok, 2 config error, 3 upstream missing, 4 backend failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "retsyn/errors.hpp"
#include "retsyn/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Corpus-to-dataset synthesis pipeline"};
    app.get_formatter()->column_width(28);

    std::string stage;
    std::string config_path;
    std::string workdir = "work";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double cost_n = 0, cost_t = 0, cost_m = 0, cost_l2 = 0;

    app.add_option("stage", stage, "Pipeline stage to run")->required();
    app.add_option("--config", config_path, "Pipeline config JSON (defaults apply when omitted)");
    app.add_option("--workdir", workdir, "Checkpoint/artifact directory")->capture_default_str();
    app.add_option("--seed", seed, "Override the configured seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--n", cost_n, "estimate-cost: document count");
    app.add_option("--t", cost_t, "estimate-cost: average tokens per document");
    app.add_option("--m", cost_m, "estimate-cost: cluster count (default sqrt(n))");
    app.add_option("--l2", cost_l2, "estimate-cost: average title tokens");

    CLI11_PARSE(app, argc, argv);

    try {
        retsyn::PipelineConfig config = retsyn::validate_config(config_path);
        retsyn::apply_env_overrides(config);
        if (cost_n > 0) {
            config.cost.n = cost_n;
            config.effective["cost"]["n"] = cost_n;
        }
        if (cost_t > 0) {
            config.cost.t = cost_t;
            config.effective["cost"]["t"] = cost_t;
        }
        if (cost_m > 0) {
            config.cost.m = cost_m;
            config.effective["cost"]["m"] = cost_m;
        }
        if (cost_l2 > 0) {
            config.cost.l2 = cost_l2;
            config.effective["cost"]["l2"] = cost_l2;
        }

        retsyn::PipelineRunner runner(std::move(config), workdir);
        if (seed_set) runner.override_seed(seed);
        runner.run_stage(stage);
        return 0;
    } catch (const retsyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const retsyn::UpstreamError& e) {
        std::cerr << "upstream error: " << e.what() << "\n";
        return 3;
    } catch (const retsyn::BackendFailureError& e) {
        std::cerr << "backend failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
