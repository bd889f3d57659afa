#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "sbmlab/core/parallel.hpp"
#include "sbmlab/runner/ops_bessel.hpp"
#include "sbmlab/runner/ops_frontier.hpp"
#include "sbmlab/runner/ops_pde.hpp"
#include "sbmlab/runner/ops_sim.hpp"
#include "sbmlab/runner/svg.hpp"

namespace sbm {

inline constexpr const char* version = "1.0.0";

using OpFactory = Job (*)(Params&);

inline const std::map<std::string, OpFactory>& op_registry() {
    static const std::map<std::string, OpFactory> ops{
        {"pde.v_infinity", ops::v_infinity_table},
        {"pde.v_lambda", ops::v_lambda_table},
        {"pde.u_exit", ops::u_exit_table},
        {"pde.closed_forms", ops::closed_form_suite},
        {"pde.exact", ops::pde_exact_suite},
        {"pde.rate_exponents", ops::rate_exponents},
        {"pde.kpp", ops::kpp_rates},
        {"pde.convrate", ops::convrate_table},
        {"csbp.laws", ops::csbp_laws},
        {"bessel.suite", ops::bessel_suite},
        {"bessel.hitting", ops::bessel_hitting},
        {"sim.normalization", ops::sim_normalization},
        {"sim.step_scheme", ops::sim_step_scheme},
        {"sim.exit_sphere", ops::sim_exit_sphere},
        {"sim.exit_tail", ops::sim_exit_tail},
        {"sim.exit_halfspace", ops::sim_exit_halfspace},
        {"frontier.d1", ops::frontier_d1},
        {"frontier.tails", ops::frontier_tails},
        {"frontier.synthetic", ops::frontier_synthetic},
        {"frontier.energy_levy", ops::frontier_energy},
        {"frontier.dimension", ops::frontier_dimension},
    };
    return ops;
}

struct RunOptions {
    std::string out = "results";
    int workers = 0;  // 0 = manifest value, then SBMLAB_WORKERS, then hardware
    bool seed_override = false;
    std::uint64_t seed = 0;
    bool quiet = false;
};

struct RunSummary {
    std::size_t experiments = 0, gates = 0, hard_failures = 0, diagnostic_failures = 0;
    std::string dir;
};

namespace detail {

struct Prepared {
    ExperimentSpec spec;
    Job job;
    std::map<std::string, std::string> resolved;
    std::uint64_t seed = 0;
};

inline std::string gates_csv(const std::vector<Gate>& gates) {
    CsvTable t(gate_header());
    for (const auto& g : gates) t.row(gate_cells(g));
    return t.str();
}

}  // namespace detail

// Validates every experiment, then runs them all and writes the results
// directory.  Validation errors throw before anything is written.
inline RunSummary run_manifest(Manifest m, const RunOptions& o) {
    if (o.seed_override) m.seed = o.seed;
    std::vector<detail::Prepared> prep;
    for (const auto& e : m.experiments) {
        const auto it = op_registry().find(e.op);
        if (it == op_registry().end()) throw input_error("experiment '" + e.name + "': unknown op '" + e.op + "'");
        Params p(e);
        Job job = it->second(p);
        p.finish();
        prep.push_back({e, std::move(job), p.resolved(), e.seed_given ? e.seed : derive_seed(m.seed, e.name)});
    }

    namespace fs = std::filesystem;
    fs::create_directories(o.out);
    const unsigned workers = resolve_workers(o.workers ? o.workers : m.workers);
    const unsigned outer = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(prep.size())));
    const unsigned inner = std::max(1u, workers / outer);

    std::vector<ExperimentOutput> outs(prep.size());
    std::vector<double> wall(prep.size(), 0);
    std::vector<std::string> errors(prep.size());
    std::atomic<std::size_t> next{0};
    std::mutex log;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < prep.size();) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                outs[i] = prep[i].job(RunContext{prep[i].seed, inner});
            } catch (const std::exception& ex) {
                errors[i] = ex.what();
                outs[i] = ExperimentOutput{};
            }
            wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!o.quiet) {
                std::lock_guard<std::mutex> lk(log);
                std::cerr << "[" << prep[i].spec.name << "] " << (errors[i].empty() ? "done" : "error: " + errors[i]) << " in "
                          << fmt_num(std::round(wall[i] * 10) / 10) << " s\n";
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < outer; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RunSummary sum;
    sum.dir = o.out;
    sum.experiments = prep.size();
    std::vector<Gate> all;
    CsvTable index({"experiment", "file"});
    nlohmann::ordered_json report;
    report["title"] = m.title;
    report["version"] = version;
    report["compiler"] = __VERSION__;
    report["cxx_standard"] = static_cast<long>(__cplusplus);
    report["master_seed"] = m.seed;
    report["workers"] = workers;
    report["experiments"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < prep.size(); ++i) {
        const auto& pr = prep[i];
        auto& out = outs[i];
        if (!errors[i].empty()) {
            Gate g;
            g.name = "completed";
            g.criterion = 0;
            g.rule = "bool";
            g.target = 1;
            g.detail = errors[i];
            out.gates.push_back(g);
        }
        const fs::path dir = fs::path(o.out) / pr.spec.outdir;
        fs::create_directories(dir);
        for (const auto& [stem, table] : out.tables) {
            table.save((dir / (stem + ".csv")).string());
            index.row({pr.spec.name, (fs::path(pr.spec.outdir) / (stem + ".csv")).generic_string()});
        }
        for (const auto& pl : out.plots) {
            if (pl.fit.xs.empty()) continue;
            save_text((dir / (pl.file + ".svg")).string(), fit_svg(pl.fit, pl.title, pl.xlabel, pl.ylabel));
            index.row({pr.spec.name, (fs::path(pr.spec.outdir) / (pl.file + ".svg")).generic_string()});
        }
        for (auto& g : out.gates) {
            g.experiment = pr.spec.name;
            all.push_back(g);
        }
        nlohmann::ordered_json ej;
        ej["name"] = pr.spec.name;
        ej["op"] = pr.spec.op;
        ej["seed"] = pr.seed;
        ej["outdir"] = pr.spec.outdir;
        ej["params"] = pr.resolved;
        ej["wall_seconds"] = wall[i];
        ej["inner_workers"] = inner;
        ej["warnings"] = out.warnings;
        if (!errors[i].empty()) ej["error"] = errors[i];
        report["experiments"].push_back(ej);
    }
    save_text((fs::path(o.out) / "gates.csv").string(), detail::gates_csv(all));
    index.save((fs::path(o.out) / "index.csv").string());
    save_text((fs::path(o.out) / "run_report.json").string(), report.dump(2) + "\n");
    for (const auto& g : all) {
        ++sum.gates;
        if (!g.pass) ++(g.hard ? sum.hard_failures : sum.diagnostic_failures);
    }
    return sum;
}

struct ReportResult {
    int exit_code = 0;
    std::string text;
    std::vector<Gate> gates;
    std::vector<std::string> missing;
};

inline std::vector<Gate> read_gates(const std::string& path) {
    const auto t = read_csv(path);
    if (t.header() != gate_header()) throw input_error(path + ": unexpected gate table header");
    std::vector<Gate> out;
    for (const auto& r : t.rows()) {
        Gate g;
        g.experiment = r[0];
        g.name = r[1];
        g.criterion = std::stoi(r[2]);
        g.hard = r[3] == "hard";
        g.rule = r[4];
        g.estimate = std::stod(r[5]);
        g.target = std::stod(r[6]);
        g.tolerance = std::stod(r[7]);
        if (!r[8].empty()) g.z = std::stod(r[8]);
        g.pass = r[9] == "pass";
        g.detail = r[10];
        out.push_back(g);
    }
    return out;
}

// Exit codes: 0 all hard gates pass, 1 some hard gate fails, 2 result files missing.
inline ReportResult report_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    ReportResult rr;
    std::ostringstream os;
    for (const char* f : {"gates.csv", "index.csv", "run_report.json"})
        if (!fs::exists(fs::path(dir) / f)) rr.missing.push_back((fs::path(dir) / f).string());
    if (fs::exists(fs::path(dir) / "index.csv")) {
        const auto index = read_csv((fs::path(dir) / "index.csv").string());
        for (const auto& r : index.rows())
            if (!fs::exists(fs::path(dir) / r[1])) rr.missing.push_back((fs::path(dir) / r[1]).string());
    }
    if (!rr.missing.empty()) {
        os << "missing result files:\n";
        for (const auto& m : rr.missing) os << "  " << m << "\n";
        rr.exit_code = 2;
        rr.text = os.str();
        return rr;
    }
    rr.gates = read_gates((fs::path(dir) / "gates.csv").string());
    std::size_t hard_fail = 0, diag_fail = 0;
    for (const auto& g : rr.gates) {
        os << (g.pass ? "PASS " : g.hard ? "FAIL " : "WARN ") << g.experiment << " / " << g.name << ": " << fmt_num(g.estimate);
        if (g.rule == "z") os << " z=" << fmt_num(g.z) << " (max " << fmt_num(g.tolerance) << ")";
        else if (g.rule == "abs" || g.rule == "rel") os << " target " << fmt_num(g.target) << " " << g.rule << " tol " << fmt_num(g.tolerance);
        else if (g.rule == "min") os << " >= " << fmt_num(g.target);
        else if (g.rule == "max") os << " <= " << fmt_num(g.target);
        if (!g.detail.empty()) os << "  [" << g.detail << "]";
        os << "\n";
        if (!g.pass) ++(g.hard ? hard_fail : diag_fail);
    }
    os << rr.gates.size() << " gates, " << hard_fail << " hard failures, " << diag_fail << " diagnostic warnings\n";
    if (hard_fail) {
        os << "failing hard gates:\n";
        for (const auto& g : rr.gates)
            if (g.hard && !g.pass) os << "  " << g.experiment << " / " << g.name << "\n";
    }
    rr.exit_code = hard_fail ? 1 : 0;
    rr.text = os.str();
    return rr;
}

}  // namespace sbm
