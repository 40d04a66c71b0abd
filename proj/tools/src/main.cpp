#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "topocover/errors.hpp"
#include "topocover/experiments.hpp"
#include "topocover/parallel.hpp"

namespace ex = topocover::experiments;
using topocover::io::json;

namespace {

json read_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw topocover::InputError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw topocover::InputError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-scale cover topology and classification experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(topocover::io::library_version()));

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_flag("-q,--quiet", quiet, "No progress on stderr");

    std::map<CLI::App*, ex::Kind> kinds;
    auto* mathdice = app.add_subcommand("mathdice", "Enumerate and label all rolls of a dice preset");
    std::optional<std::string> dice;
    std::optional<std::string> output;
    mathdice->add_option("-n,--dice", dice, "Preset: 3, 4, 5, 6 or 5-mixed");
    mathdice->add_option("-o,--output", output, "CSV file (relative to --out-dir)");
    kinds[mathdice] = ex::Kind::MathDice;

    kinds[app.add_subcommand("betti", "Betti numbers of class covers")] = ex::Kind::BettiTable;
    kinds[app.add_subcommand("classify", "Cover classifier evaluation")] = ex::Kind::CoverClassifier;
    kinds[app.add_subcommand("nn", "Feed-forward network accuracy table")] = ex::Kind::DnnTable;
    kinds[app.add_subcommand("layer-topology", "Betti profiles of hidden-layer outputs")] = ex::Kind::LayerTopology;
    kinds[app.add_subcommand("custom-net", "Custom Math Dice network protocols")] = ex::Kind::CustomNet;

    auto* skeleton = app.add_subcommand("export-skeleton", "Write a cover and its 1-skeleton graph");
    std::optional<std::string> format;
    skeleton->add_option("--format", format, "graphml or dot")->check(CLI::IsMember({"graphml", "dot"}));
    kinds[skeleton] = ex::Kind::ExportSkeleton;

    for (auto& [sub, kind] : kinds) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        topocover::set_thread_count(threads);
        CLI::App* chosen = app.get_subcommands().front();
        const ex::Kind kind = kinds.at(chosen);
        json config = read_config(config_path);
        if (dice) config["dice"] = *dice;
        if (output) config["output"] = *output;
        if (format) config["format"] = *format;
        if (kind != ex::Kind::MathDice && config_path.empty()) {
            throw topocover::InputError(std::string(chosen->get_name()) + " needs --config");
        }
        ex::RunOptions options;
        options.out_dir = out_dir;
        options.seed_override = seed;
        options.quiet = quiet;
        const json report = ex::run(kind, config, options);
        std::cout << report.at("results").dump(2) << '\n';
    } catch (const topocover::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const topocover::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
