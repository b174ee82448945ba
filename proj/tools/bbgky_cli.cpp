// Command-line driver: run, validate and report.

#include "bbgky/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Overrides {
    std::string config;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::string out;
    std::vector<std::string> checks;
};

void add_config_options(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "experiment configuration file")->required();
    cmd->add_option("--seed", o.seed, "override the configured seed");
    cmd->add_option("--workers", o.workers, "override the worker count")->check(CLI::PositiveNumber);
    cmd->add_option("--check", o.checks, "run only this check (repeatable)");
}

bbgky::ExperimentConfig load(const Overrides& o, CLI::App* cmd)
{
    bbgky::ExperimentConfig cfg = bbgky::load_experiment(o.config);
    if (cmd->count("--seed"))
        cfg.seed = o.seed;
    if (cmd->count("--workers"))
        cfg.workers = o.workers;
    if (!o.checks.empty()) {
        for (const auto& c : o.checks)
            if (!bbgky::is_known_check(c))
                throw bbgky::ConfigError("unknown check '" + c + "'");
        cfg.checks = o.checks;
    }
    if (!o.out.empty())
        cfg.output = o.out;
    return cfg;
}

int all_passed(const std::vector<bbgky::CheckReport>& reports)
{
    for (const auto& r : reports)
        if (!r.pass)
            return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hard-sphere dynamics and hierarchy verification"};
    app.require_subcommand(1);

    Overrides run_opts;
    CLI::App* run = app.add_subcommand("run", "execute the checks of a configuration");
    add_config_options(run, run_opts);
    run->add_option("--out", run_opts.out, "JSON-lines report path");

    Overrides validate_opts;
    CLI::App* validate = app.add_subcommand("validate", "parse and check a configuration");
    add_config_options(validate, validate_opts);

    std::string report_path;
    CLI::App* report = app.add_subcommand("report", "summarize a JSON-lines report as a table");
    report->add_option("report", report_path, "JSON-lines report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) {
            const bbgky::ExperimentConfig cfg = load(validate_opts, validate);
            std::cout << "configuration ok: " << cfg.checks.size() << " checks, hash " << cfg.hash() << '\n';
            return 0;
        }
        if (*report) {
            std::ifstream in(report_path);
            if (!in)
                throw bbgky::ConfigError("cannot open report '" + report_path + "'");
            const auto reports = bbgky::read_reports(in);
            bbgky::print_table(std::cout, reports, false);
            return all_passed(reports);
        }
        const bbgky::ExperimentConfig cfg = load(run_opts, run);
        std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
        if (!out)
            throw bbgky::ConfigError("cannot write report '" + cfg.output + "'");
        const auto reports = bbgky::run_all(cfg, &out);
        bbgky::print_table(std::cout, reports, true);
        return all_passed(reports);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
