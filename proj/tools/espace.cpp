// espace: batch driver for the two-field e-space model.
//
//   espace steady|dispersion|mode|simulate|aggregate --config <path> [--out <dir>] [--seed <u64>]
//
// Exit status: 0 ok, 2 config error, 3 numeric failure, 4 I/O.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "espace/config.hpp"
#include "espace/io.hpp"
#include "espace/scenario.hpp"

namespace {

enum Exit { ok = 0, usage = 2, config_error = 2, numeric_error = 3, io_error = 4 };

int exit_for(espace::Errc code) {
    switch (espace::classify(code)) {
        case espace::ErrorClass::config: return config_error;
        case espace::ErrorClass::io: return io_error;
        default: return numeric_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-field e-space model: steady fields, surface waves, field solver, aggregation"};
    app.set_version_flag("--version", ESPACE_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    bool record_timing = false;

    const std::pair<espace::Command, const char*> commands[] = {
        {espace::Command::steady, "steady-state fields A, B on a node grid"},
        {espace::Command::dispersion, "dispersion relation over a k grid"},
        {espace::Command::mode, "one surface mode and its depth profile f(y)"},
        {espace::Command::simulate, "time-march the potential system from a seed"},
        {espace::Command::aggregate, "bin transaction events onto a field grid"},
    };
    for (const auto& [cmd, help] : commands) {
        auto* sub = app.add_subcommand(std::string(espace::to_string(cmd)), help);
        sub->add_option("--config", config_path, "scenario JSON")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides rng_seed)");
        sub->add_flag("--record-timing", record_timing, "add wall time to the manifest");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    espace::Command command = espace::Command::steady;
    for (const auto& [cmd, _] : commands)
        if (app.got_subcommand(std::string(espace::to_string(cmd)))) command = cmd;

    try {
        const std::filesystem::path path(config_path);
        espace::ScenarioConfig cfg = espace::parse_config(espace::read_file(path), command);
        if (out_dir) cfg.output_dir = *out_dir;
        if (seed) cfg.rng_seed = *seed;
        espace::RunOptions ro;
        ro.base_dir = path.parent_path();
        ro.record_timing = record_timing;
        const espace::RunManifest m = espace::run_scenario(cfg, ro);
        for (const auto& f : m.files) std::printf("wrote %s/%s\n", cfg.output_dir.c_str(), f.c_str());
        std::printf("wrote %s/manifest.json\n", cfg.output_dir.c_str());
        return ok;
    } catch (const espace::Error& e) {
        std::fprintf(stderr, "espace: %s\n", e.what());
        return exit_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "espace: %s\n", e.what());
        return io_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "espace: %s\n", e.what());
        return numeric_error;
    }
}
