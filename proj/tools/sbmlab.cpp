#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbmlab/runner/run.hpp"

namespace {

struct Common {
    std::string out = "results";
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

sbm::RunOptions options(const Common& c) {
    sbm::RunOptions o;
    o.out = c.out;
    o.workers = c.workers;
    o.seed_override = c.seed_set;
    o.seed = c.seed;
    return o;
}

int finish(const sbm::RunSummary& s) {
    const auto r = sbm::report_dir(s.dir);
    std::cout << r.text;
    return r.exit_code;
}

// `sbmlab <module> <op> key=value ...` runs one experiment named after the op.
int run_single(const std::string& module, const std::string& op, const std::vector<std::string>& kv, const Common& c) {
    sbm::Manifest m;
    m.title = module + "." + op;
    sbm::ExperimentSpec e;
    e.name = op;
    for (const auto& s : kv) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw sbm::input_error("expected key=value, got '" + s + "'");
        e.params[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (e.params.count("replicates")) {
        e.replicates = std::stoull(e.params["replicates"]);
        e.params.erase("replicates");
    }
    e.op = module + "." + op;
    m.experiments.push_back(e);
    sbm::finalize_manifest(m);
    return finish(sbm::run_manifest(m, options(c)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-Brownian motion local-time toolkit"};
    app.require_subcommand(1);
    Common c;
    auto flags = [&](CLI::App* s) {
        s->add_option("-o,--out", c.out, "Results directory")->capture_default_str();
        s->add_option("-w,--workers", c.workers, "Worker threads (default: SBMLAB_WORKERS or hardware)");
        s->add_option_function<std::uint64_t>("-s,--seed", [&](const std::uint64_t& v) { c.seed = v; c.seed_set = true; }, "Master seed");
    };

    std::string manifest_path, report_path;
    auto* run = app.add_subcommand("run", "Run every experiment in a manifest");
    run->add_option("manifest", manifest_path, "Manifest (INI-style or JSON)")->required()->check(CLI::ExistingFile);
    flags(run);
    auto* rep = app.add_subcommand("report", "Summarize a results directory; exit 0 iff all hard gates pass");
    rep->add_option("dir", report_path, "Results directory")->required();
    auto* ops = app.add_subcommand("ops", "List available ops");

    struct Module {
        std::string name, help;
        std::string op;
        std::vector<std::string> kv;
        CLI::App* cmd = nullptr;
    };
    std::vector<Module> mods{{"pde", "Radial PDE solutions, rate exponents, KPP", {}, {}},
                             {"bessel", "Bessel process checks", {}, {}},
                             {"sim", "Branching particle simulation", {}, {}},
                             {"frontier", "Local-time frontier and tails", {}, {}},
                             {"csbp", "Continuous-state branching process laws", {}, {}}};
    for (auto& m : mods) {
        m.cmd = app.add_subcommand(m.name, m.help + " (one op; parameters as key=value)");
        m.cmd->add_option("op", m.op, "Op name without the module prefix")->required();
        m.cmd->add_option("params", m.kv, "key=value parameters");
        flags(m.cmd);
    }

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) {
            const auto summary = sbm::run_manifest(sbm::load_manifest(manifest_path), options(c));
            return finish(summary);
        }
        if (rep->parsed()) {
            const auto r = sbm::report_dir(report_path);
            std::cout << r.text;
            return r.exit_code;
        }
        if (ops->parsed()) {
            for (const auto& [name, f] : sbm::op_registry()) std::cout << name << "\n";
            return 0;
        }
        for (auto& m : mods)
            if (m.cmd->parsed()) return run_single(m.name, m.op, m.kv, c);
    } catch (const sbm::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
