#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/fit.hpp"

namespace sbm {

// How a gate row is decided from its numbers:
//   abs  |estimate - target| <= tolerance
//   rel  |estimate - target| <= tolerance * |target|
//   z    z <= tolerance
//   min  estimate >= target
//   max  estimate <= target
//   bool estimate == 1
struct Gate {
    std::string experiment;
    std::string name;
    int criterion = 0;  // acceptance criterion number, 0 = module check
    bool hard = true;
    std::string rule = "abs";
    double estimate = 0, target = 0, tolerance = 0;
    double z = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    std::string detail;
};

inline bool decide(const std::string& rule, double est, double target, double tolerance, double z) {
    if (rule == "abs") return std::abs(est - target) <= tolerance;
    if (rule == "rel") return std::abs(est - target) <= tolerance * std::abs(target);
    if (rule == "z") return z <= tolerance;
    if (rule == "min") return est >= target;
    if (rule == "max") return est <= target;
    if (rule == "bool") return est == 1.0;
    return false;
}

inline const std::vector<std::string>& gate_header() {
    static const std::vector<std::string> h{"experiment", "gate", "criterion", "kind", "rule", "estimate",
                                            "target", "tolerance", "z", "pass", "detail"};
    return h;
}

inline std::vector<std::string> gate_cells(const Gate& g) {
    return {g.experiment, g.name, std::to_string(g.criterion), g.hard ? "hard" : "diagnostic", g.rule,
            fmt_num(g.estimate), fmt_num(g.target), fmt_num(g.tolerance), std::isnan(g.z) ? "" : fmt_num(g.z),
            g.pass ? "pass" : "fail", g.detail};
}

struct FitPlot {
    std::string file;  // without extension
    ExponentFit fit;
    std::string title, xlabel, ylabel;
};

struct ExperimentOutput {
    std::deque<std::pair<std::string, CsvTable>> tables;  // file stem, table; references stay valid
    std::vector<Gate> gates;
    std::vector<FitPlot> plots;
    std::vector<std::string> warnings;

    CsvTable& table(const std::string& stem, std::vector<std::string> header) {
        tables.emplace_back(stem, CsvTable(std::move(header)));
        return tables.back().second;
    }

    Gate& gate(const std::string& name, int criterion, const std::string& rule, double est, double target,
               double tolerance, std::string detail = "", double z = std::numeric_limits<double>::quiet_NaN()) {
        Gate g;
        g.name = name;
        g.criterion = criterion;
        g.rule = rule;
        g.estimate = est;
        g.target = target;
        g.tolerance = tolerance;
        g.z = z;
        g.detail = std::move(detail);
        g.pass = decide(rule, est, target, tolerance, z);
        gates.push_back(g);
        return gates.back();
    }

    Gate& check(const std::string& name, int criterion, bool ok, std::string detail = "") {
        return gate(name, criterion, "bool", ok ? 1.0 : 0.0, 1.0, 0.0, std::move(detail));
    }

    Gate& z_gate(const std::string& name, int criterion, double est, double se, double target, double zmax,
                 std::string detail = "") {
        const double z = se > 0 ? std::abs(est - target) / se : (est == target ? 0.0 : std::numeric_limits<double>::infinity());
        return gate(name, criterion, "z", est, target, zmax, std::move(detail), z);
    }

    void diagnostic() { gates.back().hard = false; }
};

}  // namespace sbm
