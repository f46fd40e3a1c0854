#include "dynbc/errors.hpp"
#include "dynbc/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run_command(const std::function<dynbc::CommandResult(const dynbc::Config&, std::ostream&)>& cmd,
                const std::string& path) {
    const dynbc::Config cfg = dynbc::Config::load(path);
    const auto result = cmd(cfg, std::cout);
    for (const auto& f : result.files) std::cout << "wrote " << f << '\n';
    return result.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element solver for parabolic problems with dynamic boundary conditions"};
    app.require_subcommand(1);
    std::string config;
    auto* solve = app.add_subcommand("solve", "run one problem and write VTK snapshots and report.csv");
    solve->add_option("config", config, "configuration file")->required();
    auto* conv = app.add_subcommand("convergence", "run a convergence study and check EOC thresholds");
    conv->add_option("config", config, "configuration file")->required();
    auto* stab = app.add_subcommand("stability", "run the splitting stability sweep");
    stab->add_option("config", config, "configuration file")->required();
    auto* list = app.add_subcommand("list-problems", "list the builtin problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*list) {
            dynbc::cmd_list_problems(std::cout);
            return 0;
        }
        if (*solve) return run_command(dynbc::cmd_solve, config);
        if (*conv) return run_command(dynbc::cmd_convergence, config);
        if (*stab) return run_command(dynbc::cmd_stability, config);
    } catch (const dynbc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
