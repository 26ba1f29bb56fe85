#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obscert/runner.hpp"

namespace {

void print_diagnostics(const std::vector<obscert::Diagnostic>& diags) {
    for (const auto& d : diags) {
        std::cerr << d.kind << ": " << d.message;
        if (d.kind != "ParseError" && !d.path.empty()) std::cerr << " [" << d.path << "]";
        if (d.kind != "ParseError" && d.line > 0) std::cerr << " (line " << d.line << ", column " << d.column << ")";
        std::cerr << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"obscert: observability-constant certification and verification"};
    app.require_subcommand(1);

    std::string scenario;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string format;
    bool no_timestamp = false;
    int jobs = 0;

    auto* run = app.add_subcommand("run", "execute the tasks of a scenario and write reports");
    run->add_option("--scenario", scenario, "scenario file (YAML or JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--set", overrides, "override a value, KEY=VALUE with a dotted key (repeatable)");
    auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides OBSCERT_OUT_DIR)");
    auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides the scenario)");
    run->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    run->add_flag("--no-timestamp", no_timestamp, "omit the generation time so reruns are byte-identical");
    run->add_option("--jobs", jobs, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

    auto* validate = app.add_subcommand("validate", "check schema and references without computing");
    validate->add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
    validate->add_option("--set", overrides, "override a value, KEY=VALUE (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : obscert::kExitError;
    }

    if (*validate) {
        const auto diags = obscert::validate_scenario(scenario, overrides);
        print_diagnostics(diags);
        if (diags.empty()) std::cout << scenario << ": ok\n";
        return diags.empty() ? obscert::kExitOk : obscert::kExitError;
    }

    obscert::RunOptions opts;
    opts.overrides = overrides;
    if (*out_opt) opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = seed;
    opts.format = format;
    opts.timestamp = !no_timestamp;
    opts.jobs = jobs;
    try {
        const auto res = obscert::run_scenario(scenario, opts);
        print_diagnostics(res.diagnostics);
        for (const auto& t : res.tasks) {
            std::cout << t.name << " (" << t.type << "): " << t.status;
            if (!t.message.empty()) std::cout << " - " << t.message;
            std::cout << "\n";
        }
        if (!res.tasks.empty()) std::cout << "reports written to " << res.output_directory << "\n";
        return res.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return obscert::kExitError;
    }
}
