#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "odlab/commands.hpp"

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw odlab::InputError("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-phase optimal design laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;

    auto add = [&](const char* name, const char* desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_override, "output directory (overrides config)");
        return sub;
    };
    CLI::App* solve = add("solve", "run the alternating minimization");
    CLI::App* diagnose = add("diagnose", "run geometric probes on a saved set");
    add("spectral", "run the eigenvalue sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : odlab::kExitInput;
    }

    try {
        odlab::ExperimentConfig cfg = odlab::parse_config(read_text_file(config_path));
        std::string out = out_override.empty() ? cfg.out : out_override;
        if (solve->parsed()) return odlab::cmd_solve(cfg, out);
        if (diagnose->parsed()) return odlab::cmd_diagnose(cfg, out);
        return odlab::cmd_spectral(cfg, out);
    } catch (const odlab::ClaimViolation& e) {
        std::fprintf(stderr, "claim violation: %s\n", e.what());
        return odlab::kExitClaim;
    } catch (const odlab::SolverFailure& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return odlab::kExitSolver;
    } catch (const odlab::InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return odlab::kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return odlab::kExitInput;
    }
}
