#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "hdicho/errors.hpp"
#include "hdicho/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hdicho: dichotomy analysis for linear systems on growth-rate time scales"};
    app.set_version_flag("--version", hdicho::kToolVersion);

    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "json";
    std::optional<std::uint64_t> seed;

    app.add_option("command", command, "Analysis to run")
        ->required()
        ->check(CLI::IsMember(hdicho::command_names()));
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--seed", seed, "Override the configured RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : hdicho::kConfigError;
    }

    hdicho::LoadedConfig loaded;
    try {
        loaded = hdicho::load_config(config_path);
    } catch (const hdicho::Error& e) {
        std::cerr << "hdicho: " << e.what() << '\n';
        return hdicho::kConfigError;
    }
    for (const auto& w : loaded.warnings) std::cerr << "hdicho: warning: " << w << '\n';
    if (seed) loaded.config.seed = *seed;

    const auto cmd = hdicho::parse_command(command);
    const auto start = std::chrono::steady_clock::now();
    const auto result = hdicho::run(loaded.config, cmd);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    try {
        const std::filesystem::path dir(out_dir);
        if (format == "json" || format == "both")
            hdicho::write_atomic((dir / (command + ".json")).string(),
                                 hdicho::make_report(loaded.config, result, wall).dump(2) + "\n");
        if (format == "csv" || format == "both") {
            for (const auto& table : result.tables) {
                const std::string stem = result.tables.size() == 1 ? command : command + "_" + table.name;
                hdicho::write_atomic((dir / (stem + ".csv")).string(), table.render());
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "hdicho: cannot write output: " << e.what() << '\n';
        return hdicho::kNumericalFailure;
    }

    if (!result.error.empty()) std::cerr << "hdicho: " << result.error << '\n';
    std::cout << command << ": " << result.verdict << '\n';
    for (const auto& w : result.witnesses) std::cout << "  witness: " << w << '\n';
    return result.exit_code;
}
