#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "porodg/driver.hpp"

// Exit codes: 0 success, 1 usage, 2 config error, 3 I/O error, 4 solver failure.
int main(int argc, char** argv) {
    CLI::App app{"porodg - space-time dG Biot poroelasticity solver"};
    app.require_subcommand(1);

    std::string run_cfg, conv_cfg;
    CLI::App* cmd_run = app.add_subcommand("run", "execute one march from a config file");
    cmd_run->add_option("config", run_cfg, "path to key = value config")->required();
    CLI::App* cmd_conv = app.add_subcommand("converge", "refinement study from a config file");
    cmd_conv->add_option("config", conv_cfg, "path to key = value config")->required();
    CLI::App* cmd_def = app.add_subcommand("print-defaults", "print the documented config defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (cmd_def->parsed()) {
            porodg::print_defaults(std::cout);
            return 0;
        }
        if (cmd_run->parsed()) return porodg::run(porodg::load_config(run_cfg));
        return porodg::converge(porodg::load_config(conv_cfg));
    } catch (const porodg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const porodg::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const porodg::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
