// bethe_lab: command-line front end to the bethe library.
//
//   bethe_lab <group> <command> [--<param> value ...] [--json file] [--out dir] [--seed n] [--emit-json]
//
// Parameter values are parsed as JSON when possible (numbers, lists, [re, im]
// pairs, objects) and taken as strings otherwise.

#include <bethe/runner.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace {

using bethe::cli::Json;

Json parse_value(const std::string& s)
{
    try {
        return Json::parse(s);
    } catch (const Json::parse_error&) {
        return s;
    }
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw bethe::cli::ConfigError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw bethe::cli::ConfigError(path + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& p, const std::string& s)
{
    std::ofstream out(p);
    if (!out) throw bethe::cli::ConfigError("cannot write " + p.string());
    out << s;
}

struct Leaf {
    std::string command;
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values; // param -> raw text
};

} // namespace

int main(int argc, char** argv)
{
    namespace cli = bethe::cli;
    CLI::App app{"bethe_lab: exact diagonalization, Bethe equations, vertex models and verification runs"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 2 configuration error, 3 non-convergence, 4 invariant violation.\n"
               "BETHE_LAB_THREADS caps the number of worker threads.");

    std::string json_file, out_dir;
    std::uint64_t seed = 1;
    bool emit_json = false;

    std::map<std::string, CLI::App*> groups;
    std::vector<std::unique_ptr<Leaf>> leaves;
    for (const auto& spec : cli::commands()) {
        const auto space = spec.name.find(' ');
        CLI::App* parent = &app;
        std::string leaf_name = spec.name;
        if (space != std::string::npos) {
            const std::string group = spec.name.substr(0, space);
            leaf_name = spec.name.substr(space + 1);
            if (!groups.count(group)) {
                groups[group] = app.add_subcommand(group, group + " commands");
                groups[group]->require_subcommand(1);
            }
            parent = groups[group];
        }
        auto leaf = std::make_unique<Leaf>();
        leaf->command = spec.name;
        leaf->app = parent->add_subcommand(leaf_name, spec.help);
        for (const auto& p : spec.params) {
            std::string help = p.help;
            if (!p.fallback.is_null()) help += " [default: " + p.fallback.dump() + "]";
            leaf->app->add_option("--" + p.name, leaf->values[p.name], help);
        }
        leaf->app->add_option("--json", json_file, "JSON config, parameter object, or report of another command");
        leaf->app->add_option("--out", out_dir, "directory for report.json, config.json, summary.txt and tables");
        leaf->app->add_option("--seed", seed, "random seed [default: 1]");
        leaf->app->add_flag("--emit-json", emit_json, "print the JSON report instead of the summary");
        leaves.push_back(std::move(leaf));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::exit_config;
    }

    const Leaf* chosen = nullptr;
    for (const auto& l : leaves)
        if (l->app->parsed()) chosen = l.get();
    if (!chosen) {
        std::cerr << "no command given\n";
        return cli::exit_config;
    }

    cli::ExperimentConfig cfg;
    cfg.command = chosen->command;
    cfg.seed = seed;
    cfg.out = out_dir;
    try {
        if (!json_file.empty()) {
            const Json file = read_json_file(json_file);
            cfg.params = cli::params_from_file(file);
            if (file.contains("command") && file.contains("params") && chosen->app->count("--seed") == 0)
                cfg.seed = file.value("seed", std::uint64_t{1});
        }
        for (const auto& [name, text] : chosen->values)
            if (chosen->app->count("--" + name) > 0) cfg.params[name] = parse_value(text);
    } catch (const std::exception& e) {
        std::cerr << cfg.command << ": config-error: " << e.what() << "\n";
        return cli::exit_config;
    }

    const cli::RunResult rr = cli::run(cfg);
    if (emit_json) {
        std::cout << rr.report.dump(2) << "\n";
        std::cerr << rr.summary;
    } else {
        std::cout << rr.summary;
    }
    if (!cfg.out.empty()) {
        try {
            std::filesystem::create_directories(cfg.out);
            const std::filesystem::path dir(cfg.out);
            write_file(dir / "report.json", rr.report.dump(2) + "\n");
            write_file(dir / "config.json", cli::config_json(cfg).dump(2) + "\n");
            write_file(dir / "summary.txt", rr.summary);
            for (const auto& [name, contents] : rr.artifacts) write_file(dir / name, contents);
        } catch (const std::exception& e) {
            std::cerr << "cannot write artifacts: " << e.what() << "\n";
            return cli::exit_config;
        }
    }
    return rr.exit_code;
}
