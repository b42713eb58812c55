// testgen: batch pipeline for coverage-guided test-generation datasets,
// candidate post-processing and evaluation reports.
//
// Subcommands mirror the pipeline stages (extract, coverage, dataset, split,
// generate, postprocess, metrics, report); `run` executes a comma-separated
// subset in the fixed stage order. Exit codes: 0 success, 1 config error,
// 2 stage failure, 3 adapter failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "testgen/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string output_dir;
    std::string stages = "extract,coverage,dataset,split,generate,postprocess,metrics,report";
    std::string seed;
};

int execute(const CliOptions& opts, const std::string& stage_csv) {
    using namespace testgen;
    RunConfig cfg;
    std::vector<Stage> stages;
    try {
        Config parsed = Config::parse_file(opts.config_path);
        cfg = RunConfig::from(parsed,
                              std::filesystem::absolute(opts.config_path).parent_path());
        if (!opts.output_dir.empty()) {
            cfg.output_dir = std::filesystem::absolute(opts.output_dir);
        }
        if (!opts.seed.empty()) {
            cfg.seed = std::stoull(opts.seed);
        }
        cfg.validate();
        stages = parse_stages(stage_csv);
        if (stages.empty()) {
            throw ConfigError("no stages selected");
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    try {
        PipelineResult result = run_pipeline(cfg, stages);
        for (const StageOutcome& outcome : result.outcomes) {
            if (outcome.cache_hit) {
                std::printf("%-12s cached\n", std::string(to_string(outcome.stage)).c_str());
            } else {
                std::printf("%-12s %.2fs\n", std::string(to_string(outcome.stage)).c_str(),
                            outcome.seconds);
            }
        }
        if (result.report.has_value()) {
            std::printf("\n%s\n",
                        render_report_table(std::vector<ProjectReport>{*result.report}).c_str());
        }
        return 0;
    } catch (const PrecheckFailed& e) {
        std::fprintf(stderr, "adapter error: %s\n", e.what());
        return 3;
    } catch (const AdapterTimeout& e) {
        std::fprintf(stderr, "adapter error: %s\n", e.what());
        return 3;
    } catch (const StageInputMissing& e) {
        std::fprintf(stderr, "stage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stage error: %s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverage-guided unit-test generation pipeline"};
    app.require_subcommand(1);

    CliOptions opts;
    auto add_common = [&opts](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "run configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--output", opts.output_dir, "override the output directory");
        cmd->add_option("--seed", opts.seed, "override the split seed");
    };

    std::vector<std::pair<CLI::App*, std::string>> stage_cmds;
    for (testgen::Stage stage : testgen::all_stages()) {
        std::string name(testgen::to_string(stage));
        CLI::App* cmd = app.add_subcommand(name, "run the " + name + " stage");
        add_common(cmd);
        stage_cmds.emplace_back(cmd, name);
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run several stages in order");
    add_common(run_cmd);
    run_cmd->add_option("--stages", opts.stages, "comma-separated stage subset");

    CLI11_PARSE(app, argc, argv);

    for (const auto& [cmd, name] : stage_cmds) {
        if (cmd->parsed()) {
            return execute(opts, name);
        }
    }
    if (run_cmd->parsed()) {
        return execute(opts, opts.stages);
    }
    return 1;
}
