#include "run_config.hpp"

#include <cmath>
#include <set>

namespace delaystab::cli {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

const json& section(const json& doc, const char* name) {
    if (!doc.contains(name)) throw ConfigError(std::string("missing section '") + name + "'");
    return doc.at(name);
}

double number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError(where + "." + key + " is required");
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + " must be finite");
    return d;
}

double number_or(const json& obj, const std::string& where, const char* key, double fallback) {
    return obj.contains(key) ? number(obj, where, key) : fallback;
}

int integer(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<int>();
}

}  // namespace

SimConfig RunConfig::sim_config() const {
    if (physical) {
        return make_config(PhysicalSetup{physical->l, physical->c, mode.ell, tau, alpha}, discretization);
    }
    return make_config(DimensionlessSetup{mode.ell, tau, alpha}, discretization);
}

RunConfig parse_run_config(const json& doc) {
    only_keys(doc, "config",
              {"schema_version", "mode", "control", "physical", "discretization", "initial", "outputs"});
    if (!doc.contains("schema_version")) throw ConfigError("schema_version is required");
    if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != 1) {
        throw ConfigError("unsupported schema_version (expected 1)");
    }

    RunConfig cfg;

    const json& mode = section(doc, "mode");
    only_keys(mode, "mode", {"n", "ell"});
    if (!mode.contains("n")) throw ConfigError("mode.n is required");
    cfg.mode.n = integer(mode, "mode", "n");
    cfg.mode.ell = number_or(mode, "mode", "ell", 1.0);
    cfg.mode.validate();

    const json& control = section(doc, "control");
    only_keys(control, "control", {"tau", "alpha"});
    cfg.tau = number(control, "control", "tau");
    cfg.alpha = number(control, "control", "alpha");

    if (doc.contains("physical")) {
        const json& p = doc.at("physical");
        only_keys(p, "physical", {"l", "c"});
        cfg.physical = PhysicalString{number(p, "physical", "l"), number(p, "physical", "c")};
    }

    const json& disc = section(doc, "discretization");
    only_keys(disc, "discretization", {"dx", "dt", "t_final", "snap_dt", "energy_weight"});
    cfg.discretization.dx = number(disc, "discretization", "dx");
    cfg.discretization.dt = number(disc, "discretization", "dt");
    cfg.discretization.t_final = number(disc, "discretization", "t_final");
    if (disc.contains("snap_dt")) {
        if (!disc.at("snap_dt").is_boolean()) throw ConfigError("discretization.snap_dt must be a boolean");
        cfg.discretization.snap_dt = disc.at("snap_dt").get<bool>();
    }
    if (disc.contains("energy_weight")) {
        cfg.discretization.energy_weight = number(disc, "discretization", "energy_weight");
    }

    if (doc.contains("initial")) {
        const json& init = doc.at("initial");
        only_keys(init, "initial", {"zeta0", "zeta1"});
        cfg.zeta0 = number_or(init, "initial", "zeta0", 1.0);
        cfg.zeta1 = number_or(init, "initial", "zeta1", 0.0);
    }

    if (doc.contains("outputs")) {
        const json& out = doc.at("outputs");
        only_keys(out, "outputs", {"directory", "snapshot_times", "energy_stride", "fit_window"});
        if (out.contains("directory")) {
            if (!out.at("directory").is_string()) throw ConfigError("outputs.directory must be a string");
            cfg.directory = out.at("directory").get<std::string>();
        }
        if (out.contains("snapshot_times")) {
            const json& times = out.at("snapshot_times");
            if (!times.is_array()) throw ConfigError("outputs.snapshot_times must be an array");
            for (const json& t : times) {
                if (!t.is_number() || !std::isfinite(t.get<double>()) || t.get<double>() < 0.0) {
                    throw ConfigError("outputs.snapshot_times entries must be finite and nonnegative");
                }
                cfg.snapshot_times.push_back(t.get<double>());
            }
        }
        if (out.contains("energy_stride")) {
            cfg.energy_stride = integer(out, "outputs", "energy_stride");
            if (cfg.energy_stride < 1) throw ConfigError("outputs.energy_stride must be >= 1");
        }
        if (out.contains("fit_window")) {
            const json& w = out.at("fit_window");
            if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
                throw ConfigError("outputs.fit_window must be [t_a, t_b]");
            }
            const double a = w[0].get<double>(), b = w[1].get<double>();
            if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
                throw ConfigError("outputs.fit_window must satisfy t_a < t_b");
            }
            cfg.fit_window = std::pair{a, b};
        }
    }
    return cfg;
}

RunConfig parse_run_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

}  // namespace delaystab::cli
