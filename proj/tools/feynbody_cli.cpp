// feynbody: run scenarios, validate the field formulas, inspect t = 0.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "feynbody/errors.hpp"
#include "feynbody/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Retarded-field N-body electrodynamics simulator"};
    app.require_subcommand(1);

    std::string run_config;
    unsigned workers = 0;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Extend the initial trajectory and write outputs");
    run->add_option("config", run_config, "Scenario file")->required();
    run->add_option("--workers", workers, "Worker threads for pair evaluation")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (overrides output.dir)");

    std::string suite = "all";
    std::string report_dir = "validation";
    std::string coupling = "derived";
    auto* validate = app.add_subcommand("validate", "Run the oracle suites");
    validate->add_option("suite", suite, "all | derivative | uniform | gamma");
    validate->add_option("--out", report_dir, "Directory for the JSON reports");
    validate->add_option("--coupling", coupling, "Coupling form under test")
        ->check(CLI::IsMember({"derived", "paper_literal"}));

    std::string inspect_config;
    auto* inspect = app.add_subcommand("inspect", "Check that t = 0 is nonsingular");
    inspect->add_option("config", inspect_config, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            return feynbody::cmd_run(run_config, workers > 0 ? std::optional<unsigned>(workers) : std::nullopt,
                                     out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir),
                                     std::cout);
        }
        if (*validate) {
            const auto form = coupling == "paper_literal" ? feynbody::CouplingForm::PaperLiteral
                                                          : feynbody::CouplingForm::Derived;
            return feynbody::cmd_validate(suite, report_dir, form, std::cout);
        }
        if (*inspect) return feynbody::cmd_inspect(inspect_config, std::cout);
    } catch (const feynbody::Error& e) {
        std::cerr << "error: " << feynbody::to_string(e.kind()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
