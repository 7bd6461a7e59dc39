#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "akin/errors.hpp"
#include "akin/experiments.hpp"

namespace {

std::string experiment_list() {
    std::string out;
    for (const auto kind : akin::all_experiments()) {
        out += out.empty() ? "" : ", ";
        out += akin::experiment_name(kind);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for a diffusion driven by a squared-Bessel process"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate-config", "parse and validate a config file, then exit");
    std::string validate_path;
    validate->add_option("file", validate_path, "config file")->required();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::optional<std::string> out_dir;
    std::string chosen;
    for (const auto kind : akin::all_experiments()) {
        const std::string name(akin::experiment_name(kind));
        auto* sub = app.add_subcommand(name, "run the " + name + " recipe");
        sub->add_option("--config", config_path, "config file (JSON)")->required();
        sub->add_option("--seed", seed, "master seed; overrides the config");
        sub->add_option("--threads", threads, "worker threads (default: AKIN_THREADS, else all cores)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out_dir, "output directory; overrides the config");
        sub->callback([&chosen, name] { chosen = name; });
    }
    app.footer("experiments: " + experiment_list() + "\nexit status: 0 pass, 1 check failure, 2 usage or config error, "
               "3 numerical blowup");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : akin::kExitUsage;
    }

    try {
        if (validate->parsed()) {
            const auto cfg = akin::load_config(validate_path);
            std::cout << akin::config_to_json(cfg).dump(2) << "\nconfig hash " << akin::config_hash(cfg) << '\n';
            return akin::kExitPass;
        }
        auto doc = akin::read_json_file(config_path);
        if (doc.is_object()) {
            // a config that names its experiment must agree with the command line
            if (doc.contains("experiment") && doc["experiment"] != chosen) {
                throw akin::ConfigError("config is for " + doc["experiment"].dump() + " but \"" + chosen +
                                        "\" was requested");
            }
            doc["experiment"] = chosen;
            if (seed) doc["master_seed"] = *seed;
            if (out_dir) doc["output_dir"] = *out_dir;
        }
        const auto cfg = akin::parse_config(doc);
        return akin::run_experiment(cfg, threads, std::cerr);
    } catch (const akin::ConfigError& e) {
        std::cerr << "akin: config error: " << e.what() << '\n';
        return akin::kExitUsage;
    }
}
