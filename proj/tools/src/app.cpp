#include "homlab_cli/app.hpp"
#include "homlab_cli/commands.hpp"

#include <CLI11.hpp>

#include <functional>

namespace homlab::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"homoclinic orbit laboratory"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    long seed = -1;
    std::string stages;
    bool refine = false;
    app.add_option("--config", config_path, "config file (key = value)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed for randomized search");
    app.add_option("--stages", stages, "stage list (report) or suite list (verify)");
    app.add_flag("--refine", refine, "force one refinement round");

    const std::vector<std::pair<std::string, std::function<json(Context&)>>> commands{
        {"spectrum", cmd_spectrum}, {"index", cmd_index}, {"flow", cmd_flow},     {"reduce", cmd_reduce},
        {"solve", cmd_solve},       {"linear", cmd_linear}, {"verify", cmd_verify}, {"report", cmd_report}};
    // Subcommands inherit fallthrough, so the global flags may follow the command name.
    app.fallthrough();
    for (const auto& [name, fn] : commands) app.add_subcommand(name, name + " command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    Context ctx;
    ctx.log = &out;
    try {
        Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
        if (seed >= 0) cfg.set("search.seed", std::to_string(seed));
        if (!stages.empty()) cfg.set(name == "verify" ? "verify.only" : "stages", stages);
        if (!out_dir.empty()) cfg.set("output.dir", out_dir);
        ctx.rc = run_config(cfg);
        ctx.rc.refine = refine;
        for (const auto& [k, v] : cfg.values()) ctx.config[k] = v;
        ctx.config["refine"] = refine;
        ctx.out = ctx.rc.out_dir;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    }

    int code = 0;
    try {
        for (const auto& [n, fn] : commands)
            if (n == name) fn(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        code = 1;
    } catch (const IndexNotConverged& e) {
        err << name << ": " << e.what() << "\n";
        code = 3;
    } catch (const std::exception& e) {
        err << name << ": numeric failure: " << e.what() << "\n";
        code = 2;
    }
    try {
        write_timings(ctx);
    } catch (const std::exception& e) {
        err << "warning: timings not written: " << e.what() << "\n";
    }
    return code;
}

}  // namespace homlab::cli
