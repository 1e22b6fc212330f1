#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dispatch.hpp"

int main(int argc, char** argv) {
    CLI::App app{"agepde: age-structured diffusion solver and Carleman-estimate checks"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 pass, 1 check failed, 2 usage or config error, 3 numerical failure.\n"
               "AGEPDE_THREADS caps the worker count.");

    std::string config;
    std::vector<std::string> overrides;
    const std::vector<std::pair<std::string, std::string>> docs{
        {"solve", "march the forward problem and write solution.csv"},
        {"mms", "manufactured-solution convergence study"},
        {"carleman", "weighted-inequality suite over the seeded corpus"},
        {"uniqueness", "corner decay of the difference of two solutions"},
        {"backward", "growth of high modes under naive backward marching"},
        {"epidemic", "two-field host epidemic demo"},
        {"trace", "trace constant by power iteration"},
        {"constants", "derived Carleman constants and their conditions"},
    };
    for (const auto& [name, doc] : docs) {
        auto* sub = app.add_subcommand(name, doc);
        sub->add_option("config", config, "TOML run configuration")->required();
        sub->add_option("--set", overrides, "override section.key=value (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return agepde::cli::kUsage;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    return agepde::cli::dispatch(sub, config, overrides, std::cout, std::cerr);
}
