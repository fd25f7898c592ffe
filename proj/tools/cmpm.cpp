// cmpm.cpp
// Command-line front end: validate configs, run scenarios, list what is
// built in. Exit codes: 0 success, 1 runtime failure, 2 usage/validation.

#include <exception>
#include <iostream>
#include <string>

#include "cmpm/scenario.hpp"

namespace {

int usage(std::ostream& out) {
    out << "usage:\n"
           "  cmpm run <config-path>       run a scenario, write CSVs and summary\n"
           "  cmpm validate <config-path>  report config violations, write nothing\n"
           "  cmpm list-scenarios          list built-in scenarios\n";
    return 2;
}

int load(const std::string& path, cmpm::ScenarioConfig& config) {
    std::vector<std::string> problems;
    config = cmpm::load_config_file(path, problems);
    for (const auto& v : cmpm::validate_config(config)) problems.push_back(v);
    if (!problems.empty()) {
        for (const auto& p : problems) std::cerr << "config: " << p << '\n';
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage(std::cerr);
    const std::string command = argv[1];

    if (command == "list-scenarios") {
        if (argc != 2) return usage(std::cerr);
        for (const auto& [name, blurb] : cmpm::scenario_catalog()) {
            std::cout << name << "  -  " << blurb << '\n';
        }
        return 0;
    }
    if (command == "validate") {
        if (argc != 3) return usage(std::cerr);
        cmpm::ScenarioConfig config;
        const int rc = load(argv[2], config);
        if (rc == 0) std::cout << "ok\n";
        return rc;
    }
    if (command == "run") {
        if (argc != 3) return usage(std::cerr);
        cmpm::ScenarioConfig config;
        if (const int rc = load(argv[2], config); rc != 0) return rc;
        try {
            const auto summary = cmpm::run_scenario(config);
            std::cout << "scenario " << config.scenario << " wrote " << summary.files.size()
                      << " files to " << config.outdir << " in " << summary.wall_seconds
                      << " s\n";
            for (const auto& [key, value] : summary.metrics) {
                std::cout << "  " << key << " = " << value << '\n';
            }
            return 0;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return usage(std::cerr);
}
