#include "pdmdirac/pdmdirac.h"

#include <CLI11.hpp>

#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Bound states of 1+1 Dirac particles with position-dependent mass and Fermi velocity"};
    app.require_subcommand(1, 1);
    app.footer(std::string("Config keys (flat 'key = value' text, # starts a comment):\n") + pdd_config_help() +
               "\nExit status: 0 ok, 2 config error, 3 numerical failure, 4 --strict comparison failure.");

    std::string config;
    std::string out_dir;
    bool strict = false;
    std::string mode;
    int states = 0;

    for (const char* name : {"solve", "scan", "bic", "report"}) {
        const char* help = nullptr;
        const std::string n = name;
        if (n == "solve") help = "solve the configured model and compare with closed forms";
        else if (n == "scan") help = "sweep one model parameter (scan.param/min/max/steps), resumable";
        else if (n == "bic") help = "build unquantized constant-u states at bic.energies";
        else help = "closed forms with provenance, grid convergence and potential discrepancy";
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_flag("--strict", strict, "exit 4 when the analytic comparison exceeds compare.tol");
        sub->add_option("--mode", mode, "auto | exact | approximate | constant-u")
            ->check(CLI::IsMember({"auto", "exact", "approximate", "constant-u"}));
        sub->add_option("--states", states, "number of states")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    return pdd_runner_execute(command.c_str(), config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                              strict ? 1 : 0, mode.empty() ? nullptr : mode.c_str(), states);
}
