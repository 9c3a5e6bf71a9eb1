// dcesim: runs presets, config files and sweeps.
//
//   dcesim run <preset> [--out DIR] [--seed N] [--threads N]
//   dcesim run --config FILE ...
//   dcesim sweep --config FILE ...
//   dcesim list | dcesim show <preset>
//
// Exit codes: 0 ok, 2 invalid input, 3 physics regime error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "dce/errors.hpp"
#include "dce/harness.hpp"

namespace h = dce::harness;

namespace {

void report(const h::json& manifest) {
    if (manifest.contains("points")) {
        int ok = 0;
        for (const auto& p : manifest["points"]) ok += p["ok"].get<bool>();
        std::cout << "sweep: " << ok << "/" << manifest["points"].size() << " points ok\n";
        if (manifest.contains("report")) std::cout << manifest["report"].dump(2) << '\n';
        for (const auto& p : manifest["points"])
            if (!p["ok"].get<bool>()) std::cerr << "point " << p["point"] << ": " << p["error"].get<std::string>() << '\n';
        return;
    }
    std::cout << manifest["summary"].dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-modulated cavity simulator"};
    app.require_subcommand(1);

    h::RunOptions opt;
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 0;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "rng seed (overrides the config)");
        sub->add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    };

    std::string preset, config;
    auto* run = app.add_subcommand("run", "run a preset or a config file");
    auto* preset_opt = run->add_option("preset", preset, "preset name");
    run->add_option("--config", config, "config or manifest JSON")->excludes(preset_opt);
    common(run);

    std::string sweep_config;
    auto* sweep = app.add_subcommand("sweep", "run a sweep spec");
    sweep->add_option("--config", sweep_config, "sweep spec JSON")->required();
    common(sweep);

    auto* list = app.add_subcommand("list", "list presets");
    std::string show_name;
    auto* show = app.add_subcommand("show", "print a preset's config");
    show->add_option("preset", show_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        opt.out_dir = out;
        opt.threads = threads;
        if (run->count("--seed") || sweep->count("--seed")) opt.seed = seed;

        if (*list) {
            for (const auto& n : h::preset_names()) std::cout << n << '\n';
        } else if (*show) {
            std::cout << h::preset_config(show_name).dump(2) << '\n';
        } else if (*run) {
            if (preset.empty() == config.empty()) {
                std::cerr << "run: give a preset name or --config\n";
                return 2;
            }
            h::json manifest;
            if (!preset.empty()) {
                manifest = h::run_preset(preset, opt);
            } else {
                const h::json c = h::load_json(config);
                manifest = h::is_sweep(c) ? h::run_sweep(c, opt) : h::run_config(c, opt);
            }
            report(manifest);
        } else if (*sweep) {
            report(h::run_sweep(h::load_json(sweep_config), opt));
        }
    } catch (const dce::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const dce::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
