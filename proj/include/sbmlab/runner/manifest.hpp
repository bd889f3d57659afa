#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"
#include "sbmlab/core/rng.hpp"

namespace sbm {

struct ExperimentSpec {
    std::string name;
    std::string op;
    std::map<std::string, std::string> params;
    std::size_t replicates = 0;  // 0 = op default
    std::uint64_t seed = 0;      // derived from the master seed unless given
    bool seed_given = false;
    std::string outdir;          // relative to the run directory; defaults to name
};

struct Manifest {
    std::string title;
    std::uint64_t seed = 1;
    int workers = 0;
    std::vector<ExperimentSpec> experiments;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw input_error(what + ": not an unsigned integer: '" + s + "'");
    }
    if (pos != s.size() || s.find('-') != std::string::npos) throw input_error(what + ": not an unsigned integer: '" + s + "'");
    return v;
}

inline bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

// FNV-1a, so per-experiment seeds depend on the name, not the order.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& name) {
    std::uint64_t s = master ^ detail::fnv1a(name);
    return splitmix64(s);
}

inline void finalize_manifest(Manifest& m) {
    std::set<std::string> seen;
    for (auto& e : m.experiments) {
        if (!detail::valid_name(e.name)) throw input_error("manifest: bad experiment name '" + e.name + "'");
        if (!seen.insert(e.name).second) throw input_error("manifest: duplicate experiment name '" + e.name + "'");
        if (e.op.empty()) throw input_error("manifest: experiment '" + e.name + "' has no op");
        if (!e.seed_given) e.seed = derive_seed(m.seed, e.name);
        if (e.outdir.empty()) e.outdir = e.name;
        if (e.outdir.find("..") != std::string::npos || e.outdir.front() == '/')
            throw input_error("manifest: outdir of '" + e.name + "' must stay inside the run directory");
    }
}

// Sets a reserved key on an experiment, or stores it as a parameter.
inline void assign_key(ExperimentSpec& e, const std::string& key, const std::string& value) {
    const std::string where = "manifest [" + e.name + "] " + key;
    if (key == "op") e.op = value;
    else if (key == "replicates") e.replicates = detail::parse_u64(value, where);
    else if (key == "seed") {
        e.seed = detail::parse_u64(value, where);
        e.seed_given = true;
    } else if (key == "outdir") e.outdir = value;
    else {
        if (e.params.count(key)) throw input_error(where + ": given twice");
        e.params[key] = value;
    }
}

// Plain-text format:
//   # comment
//   seed = 20240611          (global keys before the first section)
//   workers = 1
//   [experiment_name]
//   op = pde.v_infinity
//   d = 3, 2, 1
inline Manifest parse_manifest_text(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    ExperimentSpec* cur = nullptr;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string at = "manifest line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw input_error(at + ": unterminated section header");
            m.experiments.push_back({});
            cur = &m.experiments.back();
            cur->name = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw input_error(at + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw input_error(at + ": empty key");
        if (!cur) {
            if (key == "seed") m.seed = detail::parse_u64(value, at);
            else if (key == "workers") m.workers = static_cast<int>(detail::parse_u64(value, at));
            else if (key == "title") m.title = value;
            else throw input_error(at + ": unknown global key '" + key + "'");
        } else {
            assign_key(*cur, key, value);
        }
    }
    finalize_manifest(m);
    return m;
}

// JSON alternative:
//   {"seed": 1, "workers": 1, "experiments": [{"name": "...", "op": "...", "d": 3, ...}]}
// Arrays become comma-separated lists.
inline Manifest parse_manifest_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("manifest: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw input_error("manifest: JSON root must be an object");
    auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_float()) return fmt_num(v.get<double>());
        throw input_error("manifest: unsupported JSON value " + v.dump());
    };
    Manifest m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "seed") m.seed = detail::parse_u64(scalar(it.value()), "manifest seed");
        else if (it.key() == "workers") m.workers = static_cast<int>(detail::parse_u64(scalar(it.value()), "manifest workers"));
        else if (it.key() == "title") m.title = scalar(it.value());
        else if (it.key() != "experiments") throw input_error("manifest: unknown global key '" + it.key() + "'");
    }
    if (j.contains("experiments")) {
        if (!j["experiments"].is_array()) throw input_error("manifest: experiments must be an array");
        for (const auto& ej : j["experiments"]) {
            if (!ej.is_object() || !ej.contains("name")) throw input_error("manifest: each experiment needs a name");
            ExperimentSpec e;
            e.name = scalar(ej["name"]);
            for (auto it = ej.begin(); it != ej.end(); ++it) {
                if (it.key() == "name") continue;
                std::string v;
                if (it.value().is_array()) {
                    for (std::size_t k = 0; k < it.value().size(); ++k) v += (k ? ", " : "") + scalar(it.value()[k]);
                } else {
                    v = scalar(it.value());
                }
                assign_key(e, it.key(), v);
            }
            m.experiments.push_back(std::move(e));
        }
    }
    finalize_manifest(m);
    return m;
}

inline Manifest parse_manifest(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{' ? parse_manifest_json(text) : parse_manifest_text(text);
    }
    return parse_manifest_text(text);
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot read manifest " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_manifest(ss.str());
}

// Typed access to an experiment's parameters.  Every value read (or default
// used) is recorded so the run report can echo the full configuration;
// leftover keys are reported as unknown.
class Params {
public:
    explicit Params(const ExperimentSpec& e) : spec_(e) {}

    const ExperimentSpec& spec() const { return spec_; }

    double num(const std::string& key, double def) {
        const auto it = spec_.params.find(key);
        const double v = it == spec_.params.end() ? def : to_double(key, it->second);
        used_[key] = fmt_num(v);
        return v;
    }
    double num(const std::string& key) {
        need(key);
        return num(key, 0.0);
    }
    int integer(const std::string& key, int def) {
        const double v = num(key, def);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw input_error(where(key) + ": expected an integer");
        return static_cast<int>(v);
    }
    std::vector<double> list(const std::string& key, std::vector<double> def) {
        const auto it = spec_.params.find(key);
        if (it != spec_.params.end()) {
            def.clear();
            std::stringstream ss(it->second);
            std::string item;
            while (std::getline(ss, item, ',')) def.push_back(to_double(key, detail::trim(item)));
            if (def.empty()) throw input_error(where(key) + ": empty list");
        }
        std::string echo;
        for (std::size_t i = 0; i < def.size(); ++i) echo += (i ? ", " : "") + fmt_num(def[i]);
        used_[key] = echo;
        return def;
    }
    std::string str(const std::string& key, const std::string& def) {
        const auto it = spec_.params.find(key);
        const std::string v = it == spec_.params.end() ? def : it->second;
        used_[key] = v;
        return v;
    }
    std::size_t replicates(std::size_t def) {
        const std::size_t n = spec_.replicates ? spec_.replicates : def;
        used_["replicates"] = std::to_string(n);
        return n;
    }

    // Range checks raise input_error naming the experiment and key.
    void check(bool ok, const std::string& key, const std::string& msg) const {
        if (!ok) throw input_error(where(key) + ": " + msg);
    }

    void finish() const {
        for (const auto& kv : spec_.params)
            if (!used_.count(kv.first)) throw input_error(where(kv.first) + ": unknown parameter for op " + spec_.op);
    }

    const std::map<std::string, std::string>& resolved() const { return used_; }

private:
    std::string where(const std::string& key) const { return "experiment '" + spec_.name + "' parameter '" + key + "'"; }

    void need(const std::string& key) const {
        if (!spec_.params.count(key)) throw input_error(where(key) + ": required");
    }

    double to_double(const std::string& key, const std::string& s) const {
        const std::string t = detail::trim(s);
        if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(t, &pos);
        } catch (const std::exception&) {
            throw input_error(where(key) + ": not a number: '" + s + "'");
        }
        if (pos != t.size() || std::isnan(v)) throw input_error(where(key) + ": not a number: '" + s + "'");
        return v;
    }

    const ExperimentSpec& spec_;
    std::map<std::string, std::string> used_;
};

}  // namespace sbm
