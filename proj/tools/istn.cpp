#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "istn/errors.hpp"
#include "istn/experiments.hpp"
#include "recipes.hpp"

namespace {

using namespace istn;

std::optional<std::string> find_recipe(std::string name)
{
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".cfg") == 0) {
        name.resize(name.size() - 4);
    }
    for (auto const& r : cli::recipes()) {
        if (r.name == name) return r.text;
    }
    return std::nullopt;
}

ExperimentConfig load(std::string const& target)
{
    if (std::filesystem::is_regular_file(target)) {
        return load_config(target);
    }
    if (auto text = find_recipe(target)) {
        return parse_config(*text, "recipe:" + target);
    }
    throw IoError("'" + target + "' is neither a readable file nor a built-in recipe "
                  "(see `istn recipes`)");
}

std::vector<CoverageMethod> parse_methods(std::string const& list)
{
    std::vector<CoverageMethod> out;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(parse_coverage_method(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coverage analysis of integrated satellite-terrestrial networks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment from a config file or built-in recipe");
    std::string target;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> snapshots;
    std::optional<unsigned> workers;
    std::string out_dir;
    std::string methods;
    run->add_option("config", target, "Config path or recipe name")->required();
    run->add_option("--seed", seed, "Override the Monte Carlo seed");
    run->add_option("--snapshots", snapshots, "Override the Monte Carlo snapshot count")
        ->check(CLI::PositiveNumber);
    run->add_option("--workers", workers, "Worker threads (0 = all cores)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--methods", methods, "Comma-separated methods to run");

    auto* list = app.add_subcommand("recipes", "List built-in recipes");
    std::string show;
    list->add_option("--show", show, "Print the config text of one recipe");

    CLI11_PARSE(app, argc, argv);

    if (*list) {
        if (!show.empty()) {
            auto text = find_recipe(show);
            if (!text) {
                std::cerr << "unknown recipe '" << show << "'\n";
                return 2;
            }
            std::cout << *text;
            return 0;
        }
        for (auto const& r : cli::recipes()) {
            std::cout << r.name << "\n";
        }
        return 0;
    }

    try {
        auto cfg = load(target);
        if (seed) cfg.mc.seed = *seed;
        if (snapshots) cfg.mc.n_snapshots = *snapshots;
        if (workers) cfg.mc.workers = *workers;
        if (!methods.empty()) cfg.methods = parse_methods(methods);
        cfg.validate();

        std::string dir = out_dir;
        if (dir.empty()) dir = cfg.output_dir;
        if (dir.empty()) dir = "results";

        auto const result = run_experiment(cfg);
        for (auto const& path : emit(result, dir)) {
            std::cout << "wrote " << path << "\n";
        }
        for (auto const& f : result.failures) {
            std::cerr << "failed: " << f << "\n";
        }
        return result.ok() ? 0 : 1;
    } catch (istn::Error const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
