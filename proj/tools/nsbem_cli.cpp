#include "nsbem/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-singular boundary integral solver for the Laplace equation"};
    std::string config_path, preset, out_dir = "nsbem-out";
    int threads = 0;
    bool list = false, check = false, quiet = false;
    app.add_option("--config", config_path, "configuration file (INI)");
    app.add_option("--preset", preset, "shipped preset name (see --list-presets)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "assembly threads (0: OpenMP default); never changes results")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--list-presets", list, "print the shipped presets and exit");
    app.add_flag("--check", check, "validate the configuration and exit");
    app.add_flag("--quiet", quiet, "no progress lines");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (list) {
        for (const auto& name : nsbem::preset_names()) std::cout << name << '\n';
        return 0;
    }
    if (config_path.empty() == preset.empty()) {
        std::cerr << "error: give exactly one of --config or --preset\n";
        return kConfigError;
    }

    nsbem::RunConfig config;
    std::string command;
    try {
        config = preset.empty() ? nsbem::RunConfig::load(config_path) : nsbem::load_preset(preset);
        command = nsbem::validate(config);
    } catch (const nsbem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    if (check) {
        std::cout << fmt::format("{}: valid {} configuration, hash {}\n", config.source(), command, config.hash());
        return 0;
    }

    nsbem::CommandContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.log = quiet ? nullptr : &std::cout;
    try {
        nsbem::run_command(config, ctx);
    } catch (const nsbem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return 0;
}
