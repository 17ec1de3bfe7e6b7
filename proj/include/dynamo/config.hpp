#pragma once
// Experiment configuration: diff-able key-value text with [section] headers,
// typed extraction with collected error reporting, and an order-independent
// content hash for run manifests.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"

namespace dynamo {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Solver { ED, SSE, NIBA, GKLS, Analytic };

inline const char* solver_name(Solver s) {
    switch (s) {
        case Solver::ED: return "ed";
        case Solver::SSE: return "sse";
        case Solver::NIBA: return "niba";
        case Solver::GKLS: return "gkls";
        case Solver::Analytic: return "analytic";
    }
    return "?";
}

// Flat "section.key" -> value map parsed from INI-style text.
struct KeyValues {
    std::map<std::string, std::string> kv;

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static KeyValues parse(const std::string& text) {
        KeyValues out;
        std::istringstream is(text);
        std::string line, section = "run";
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            out.kv[section + "." + key] = trim(line.substr(eq + 1));
        }
        return out;
    }

    static KeyValues parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        std::ostringstream os;
        os << f.rdbuf();
        return parse(os.str());
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { kv[key] = value; }

    // Canonical text: sorted key=value lines (std::map iterates in key order).
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
        return out;
    }

    // FNV-1a 64-bit over the canonical text: stable under key reordering.
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    std::string hash_hex() const {
        static const char* digits = "0123456789abcdef";
        std::uint64_t h = hash();
        std::string s(16, '0');
        for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        return s;
    }
};

namespace detail {

// Typed extraction that records offending keys instead of throwing one by one.
struct KeyReader {
    const KeyValues& cfg;
    std::vector<std::string> errors;
    std::vector<std::string> seen;

    explicit KeyReader(const KeyValues& c) : cfg(c) {}

    void fail(const std::string& key, const std::string& why) { errors.push_back(key + " (" + why + ")"); }

    std::string str(const std::string& key, const std::string& dflt) {
        seen.push_back(key);
        auto it = cfg.kv.find(key);
        return it == cfg.kv.end() ? dflt : it->second;
    }

    double num(const std::string& key, double dflt) {
        seen.push_back(key);
        auto it = cfg.kv.find(key);
        if (it == cfg.kv.end()) return dflt;
        try {
            std::size_t pos = 0;
            const double x = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return x;
        } catch (const std::exception&) {
            fail(key, "not a number: " + it->second);
            return dflt;
        }
    }

    std::size_t count(const std::string& key, std::size_t dflt) {
        const double x = num(key, static_cast<double>(dflt));
        if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x))) {
            fail(key, "not a non-negative integer");
            return dflt;
        }
        return static_cast<std::size_t>(x);
    }

    bool flag(const std::string& key, bool dflt) {
        const std::string s = str(key, dflt ? "true" : "false");
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        fail(key, "not a boolean: " + s);
        return dflt;
    }

    std::vector<double> num_list(const std::string& key) {
        std::vector<double> out;
        const std::string s = str(key, "");
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = KeyValues::trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                fail(key, "not a number list: " + tok);
                return out;
            }
        }
        return out;
    }
};

} // namespace detail

enum class BathKind { None, OneMode, Continuum };

struct SweepAxis {
    std::string parameter; // full key, e.g. model.alpha
    std::vector<double> values;
};

// Fully typed experiment description built from a KeyValues map.
struct ExperimentConfig {
    Solver solver = Solver::Analytic;
    std::string out_dir = "out";
    std::size_t workers = 1;

    ModelParams model;
    TimeGrid grid{0.0, 1.0, 100};

    BathKind bath_kind = BathKind::None;
    std::size_t n_modes = 1;
    double omega_max = 100.0;
    double mode_omega = 1.0;
    double mode_g = 0.0;
    double g2_over_omega = -1.0; // if >= 0, overrides mode_g as g = sqrt(x * omega)

    double ed_tol = 1e-9;
    std::vector<std::size_t> truncations; // empty = automatic sizing

    std::size_t sse_n_traj = 1000, sse_M = 512, sse_workers = 1;
    std::uint64_t sse_seed = 1;
    double sse_tol = 1e-8, sse_l1 = 0.0;

    double gkls_tol = 1e-11;
    bool gkls_level_shift = false;
    std::string gkls_init = "up"; // up | down | orbit

    std::vector<SweepAxis> sweeps;
    KeyValues raw;

    static ExperimentConfig from_keyvalues(const KeyValues& cfg) {
        detail::KeyReader r(cfg);
        ExperimentConfig e;
        e.raw = cfg;

        const std::string sv = r.str("run.solver", "");
        if (sv == "ed") e.solver = Solver::ED;
        else if (sv == "sse") e.solver = Solver::SSE;
        else if (sv == "niba") e.solver = Solver::NIBA;
        else if (sv == "gkls") e.solver = Solver::GKLS;
        else if (sv == "analytic") e.solver = Solver::Analytic;
        else r.fail("run.solver", "must be one of ed, sse, niba, gkls, analytic");
        e.out_dir = r.str("run.out_dir", e.out_dir);
        e.workers = std::max<std::size_t>(1, r.count("run.workers", 1));

        e.model.H = r.num("model.H", 1.0);
        e.model.v = r.num("model.v", 0.04);
        e.model.M = r.num("model.M", 0.0);
        e.model.alpha = r.num("model.alpha", 0.0);
        e.model.omega_c = r.num("model.omega_c", 100.0);
        const std::string cut = r.str("model.cutoff", "exp");
        if (cut == "exp") e.model.cutoff = Cutoff::Exponential;
        else if (cut == "hard") e.model.cutoff = Cutoff::Hard;
        else r.fail("model.cutoff", "must be exp or hard");
        const std::string prep = r.str("model.preparation", "P2");
        if (prep == "P1") e.model.preparation = Preparation::P1;
        else if (prep == "P2") e.model.preparation = Preparation::P2;
        else r.fail("model.preparation", "must be P1 or P2");

        const double t0 = r.num("grid.t0", 0.0), tf = r.num("grid.tf", 1.0);
        const std::size_t ns = r.count("grid.n_steps", 100);
        if (tf > t0 && ns >= 1) e.grid = TimeGrid(t0, tf, ns);
        else r.fail("grid.tf", "grid requires tf > t0 and n_steps >= 1");

        const std::string bk = r.str("bath.kind", "none");
        if (bk == "none") e.bath_kind = BathKind::None;
        else if (bk == "one_mode") e.bath_kind = BathKind::OneMode;
        else if (bk == "continuum") e.bath_kind = BathKind::Continuum;
        else r.fail("bath.kind", "must be none, one_mode or continuum");
        e.n_modes = r.count("bath.n_modes", 12);
        e.omega_max = r.num("bath.omega_max", 100.0);
        e.mode_omega = r.num("bath.omega", 1.0);
        e.mode_g = r.num("bath.g", 0.0);
        e.g2_over_omega = r.num("bath.g2_over_omega", -1.0);

        e.ed_tol = r.num("ed.tol", 1e-9);
        for (double x : r.num_list("ed.truncations")) {
            if (x < 1) r.fail("ed.truncations", "entries must be >= 1");
            else e.truncations.push_back(static_cast<std::size_t>(x));
        }

        e.sse_n_traj = r.count("sse.n_traj", 1000);
        e.sse_M = r.count("sse.M", 512);
        e.sse_workers = std::max<std::size_t>(1, r.count("sse.workers", 1));
        e.sse_seed = r.count("sse.seed", 1);
        e.sse_tol = r.num("sse.tol", 1e-8);
        e.sse_l1 = r.num("sse.l1", 0.0);

        e.gkls_tol = r.num("gkls.tol", 1e-11);
        e.gkls_level_shift = r.flag("gkls.level_shift", false);
        e.gkls_init = r.str("gkls.init", "up");
        if (e.gkls_init != "up" && e.gkls_init != "down" && e.gkls_init != "orbit")
            r.fail("gkls.init", "must be up, down or orbit");

        for (const char* suffix : {"", "2"}) {
            const std::string pkey = std::string("sweep.parameter") + suffix;
            const std::string vkey = std::string("sweep.values") + suffix;
            const std::string param = r.str(pkey, "");
            const std::vector<double> vals = r.num_list(vkey);
            if (param.empty() && vals.empty()) continue;
            if (param.empty()) r.fail(pkey, "sweep values given without a parameter name");
            else if (vals.empty()) r.fail(vkey, "sweep parameter given without values");
            else {
                for (double x : vals)
                    if (!std::isfinite(x)) r.fail(vkey, "sweep values must be finite");
                e.sweeps.push_back({param, vals});
            }
        }

        // reject keys that nothing consumed (typos surface as validation errors)
        std::sort(r.seen.begin(), r.seen.end());
        for (const auto& [k, v] : cfg.kv)
            if (!std::binary_search(r.seen.begin(), r.seen.end(), k)) r.fail(k, "unknown key");

        try {
            e.model.validate();
        } catch (const std::exception& ex) {
            r.fail("model", ex.what());
        }
        if (!r.errors.empty()) {
            std::string msg = "invalid config:";
            for (const auto& s : r.errors) msg += "\n  " + s;
            throw ConfigError(msg);
        }
        return e;
    }
};

} // namespace dynamo
