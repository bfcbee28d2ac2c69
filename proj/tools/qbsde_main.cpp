#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qbsde/runner.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"qbsde - quadratic BSDE system laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "JSON experiment config")->required();
    CLI::Option* out_opt = run->add_option("--out", out_dir, "output directory");
    CLI::Option* seed_opt =
        run->add_option("--seed-override", seed_override, "replace the config seed");
    run->add_flag("--quiet", quiet, "suppress the completion line");

    CLI::App* gal = app.add_subcommand("gallery", "list the built-in generators");

    CLI11_PARSE(app, argc, argv);

    if (gal->parsed()) {
        for (const auto& row : qbsde::gallery_table())
            std::cout << row.at("label").get<std::string>() << "  "
                      << row.at("description").get<std::string>() << "\n";
        return 0;
    }

    std::optional<std::string> out;
    if (*out_opt) out = out_dir;
    std::optional<std::uint64_t> seed;
    if (*seed_opt) seed = seed_override;
    return qbsde::run_cli(config_path, out, seed, quiet);
}
