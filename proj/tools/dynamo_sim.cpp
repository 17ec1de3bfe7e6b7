// dynamo-sim: command-line front end. First argument is a solver name
// (ed, sse, niba, gkls, analytic) or a preset name; options layer on top of
// the config file / preset text. Exit codes: 0 success, 1 invalid config,
// 2 one or more sweep points failed.

#include <CLI11.hpp>

#include <dynamo/presets.hpp>
#include <dynamo/runner.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long workers = -1;
    long long seed = -1;
    std::vector<std::string> sets; // raw key=value overrides
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "config file (key = value with [section] headers)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--workers", o.workers, "sweep worker threads");
    cmd->add_option("--seed", o.seed, "stochastic seed override");
    cmd->add_option("--set", o.sets, "extra section.key=value overrides")->take_all();
}

int execute(dynamo::KeyValues kv, const CommonOpts& o) {
    using namespace dynamo;
    if (!o.out_dir.empty()) kv.set("run.out_dir", o.out_dir);
    if (o.workers >= 1) kv.set("run.workers", std::to_string(o.workers));
    if (o.seed >= 0) kv.set("sse.seed", std::to_string(o.seed));
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "invalid --set (expected section.key=value): " << s << "\n";
            return 1;
        }
        kv.set(KeyValues::trim(s.substr(0, eq)), KeyValues::trim(s.substr(eq + 1)));
    }
    try {
        const ExperimentConfig cfg = ExperimentConfig::from_keyvalues(kv);
        const RunManifest man = run(cfg);
        std::size_t failed = 0;
        for (const auto& r : man.runs) {
            std::cout << r.label << ": " << (r.ok ? "ok" : "FAILED " + r.message) << "\n";
            if (!r.ok) ++failed;
        }
        std::cout << "manifest: " << cfg.out_dir << "/manifest.json (config hash " << man.config_hash << ")\n";
        return failed == 0 ? 0 : 2;
    } catch (const ConfigError& ex) {
        std::cerr << ex.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven spin-boson dynamo simulation toolkit"};
    app.require_subcommand(1);

    struct SolverCmd {
        CLI::App* cmd;
        std::string solver;
        CommonOpts opts;
    };
    std::vector<std::unique_ptr<SolverCmd>> cmds;

    for (const char* s : {"ed", "sse", "niba", "gkls", "analytic"}) {
        auto sc = std::make_unique<SolverCmd>();
        sc->solver = s;
        sc->cmd = app.add_subcommand(s, std::string("run the ") + s + " solver");
        add_common(sc->cmd, sc->opts);
        cmds.push_back(std::move(sc));
    }
    for (const auto& name : dynamo::preset_names()) {
        auto sc = std::make_unique<SolverCmd>();
        sc->solver = "preset:" + name;
        sc->cmd = app.add_subcommand(name, "run the built-in " + name + " preset");
        add_common(sc->cmd, sc->opts);
        cmds.push_back(std::move(sc));
    }
    auto* list = app.add_subcommand("presets", "list available presets");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& n : dynamo::preset_names()) std::cout << n << "\n";
        return 0;
    }
    for (const auto& sc : cmds) {
        if (!sc->cmd->parsed()) continue;
        try {
            dynamo::KeyValues kv;
            if (sc->solver.rfind("preset:", 0) == 0) {
                kv = dynamo::preset_config(sc->solver.substr(7));
                if (!sc->opts.config_path.empty()) {
                    // user config layers on top of the preset text
                    for (const auto& [k, v] : dynamo::KeyValues::parse_file(sc->opts.config_path).kv)
                        kv.set(k, v);
                }
            } else {
                if (!sc->opts.config_path.empty()) kv = dynamo::KeyValues::parse_file(sc->opts.config_path);
                kv.set("run.solver", sc->solver);
            }
            return execute(std::move(kv), sc->opts);
        } catch (const dynamo::ConfigError& ex) {
            std::cerr << ex.what() << "\n";
            return 1;
        }
    }
    return 1;
}
