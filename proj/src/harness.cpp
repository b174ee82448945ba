#include "bbgky/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bbgky {

const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> ids{"conservation", "reversibility", "liouville", "special_flow",
        "lemma2_rate", "prop1_decomposition", "prop5_onestep", "series_identity", "grand_canonical_identity",
        "map_roundtrip"};
    return ids;
}

bool is_known_check(const std::string& id)
{
    const auto& ids = known_checks();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::uint64_t check_seed(std::uint64_t seed, const std::string& check) { return mix64(seed ^ mix64(fnv1a(check))); }

const Json& ExperimentConfig::check_settings(const std::string& check) const
{
    static const Json empty = Json::object();
    return settings.contains(check) ? settings.at(check) : empty;
}

const ParticleBox& ExperimentConfig::box(const std::string& name) const
{
    const auto it = boxes.find(name);
    if (it == boxes.end())
        throw ConfigError("unknown box '" + name + "'");
    return it->second;
}

std::string ExperimentConfig::hash() const
{
    Json effective = source;
    effective["seed"] = seed;
    effective["workers"] = workers;
    effective["checks"] = checks;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(effective.dump())));
    return buf;
}

namespace {

Vec3 vec3_at(const Json& t, const std::string& key)
{
    if (!t.contains(key))
        throw ConfigError("missing key '" + key + "'");
    const Json& v = t.at(key);
    if (!v.is_array() || v.size() != 3)
        throw ConfigError("'" + key + "' must be a list of three numbers");
    Vec3 out;
    for (std::size_t k = 0; k < 3; ++k) {
        if (!v[k].is_number())
            throw ConfigError("'" + key + "' must be a list of three numbers");
        out[k] = v[k].get<double>();
    }
    return out;
}

ParticleBox box_from(const std::string& name, const Json& t)
{
    try {
        ParticleBox b{vec3_at(t, "q_lo"), vec3_at(t, "q_hi"), vec3_at(t, "p_lo"), vec3_at(t, "p_hi")};
        DeltaBox check({b});
        return b;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("box '" + name + "': " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("box '" + name + "': " + e.what());
    }
}

} // namespace

ExperimentConfig parse_experiment(const Json& root)
{
    if (!root.is_object())
        throw ConfigError("configuration must be a table");
    const auto version = get_integer(root, "schema_version");
    if (version != ExperimentConfig::kSchemaVersion)
        throw ConfigError("unsupported schema_version " + std::to_string(version));

    ExperimentConfig cfg;
    cfg.source = root;
    cfg.seed = static_cast<std::uint64_t>(get_integer(root, "seed", 1));
    const auto workers = get_integer(root, "workers", 1);
    if (workers < 1)
        throw ConfigError("workers must be positive");
    cfg.workers = static_cast<unsigned>(workers);
    cfg.output = get_string(root, "output", cfg.output);
    cfg.k_sigma = get_number(root, "k_sigma", cfg.k_sigma);
    cfg.degenerate_ceiling = get_number(root, "degenerate_ceiling", cfg.degenerate_ceiling);
    if (!(cfg.k_sigma > 0.0))
        throw ConfigError("k_sigma must be positive");

    if (root.contains("checks")) {
        const Json& list = root.at("checks");
        if (!list.is_array())
            throw ConfigError("'checks' must be a list of check ids");
        for (const auto& c : list) {
            if (!c.is_string() || !is_known_check(c.get<std::string>()))
                throw ConfigError("unknown check id " + c.dump());
            cfg.checks.push_back(c.get<std::string>());
        }
    } else {
        cfg.checks = known_checks();
    }

    cfg.density = density_spec_from_json(get_table(root, "density"));
    if (root.contains("boxes")) {
        for (const auto& [name, t] : get_table(root, "boxes").items())
            cfg.boxes.emplace(name, box_from(name, t));
    }
    if (root.contains("check")) {
        for (const auto& [name, t] : get_table(root, "check").items()) {
            if (!is_known_check(name))
                throw ConfigError("settings for unknown check '" + name + "'");
            if (!t.is_object())
                throw ConfigError("check." + name + " must be a section");
            cfg.settings[name] = t;
        }
    }
    // Sample counts must be positive and box references must resolve.
    for (const auto& [name, t] : cfg.settings.items()) {
        for (const auto& [key, v] : t.items()) {
            const bool count = key == "samples" || key.ends_with("_samples") || key == "collisions"
                || key == "trajectories" || key == "proposals";
            if (count && (!v.is_number_integer() || v.get<long long>() <= 0))
                throw ConfigError("check." + name + "." + key + " must be a positive integer");
            if ((key == "t" || key == "t_mft") && (!v.is_number() || !(v.get<double>() > 0.0)))
                throw ConfigError("check." + name + "." + key + " must be positive");
            if (key == "boxes") {
                if (!v.is_array())
                    throw ConfigError("check." + name + ".boxes must be a list of box names");
                for (const auto& b : v)
                    cfg.box(b.get<std::string>());
            }
        }
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(read_config_file(path)); }

void finalize(CheckReport& r)
{
    const double diff = std::abs(r.lhs - r.rhs);
    if (r.deterministic) {
        r.z = r.tolerance > 0.0 ? diff / r.tolerance : (diff == 0.0 ? 0.0 : INFINITY);
        r.pass = diff <= r.tolerance;
    } else {
        const double sigma = std::hypot(r.lhs_err, r.rhs_err);
        r.z = sigma > 0.0 ? diff / sigma : (diff == 0.0 ? 0.0 : INFINITY);
        r.pass = diff <= r.k_sigma * sigma && r.degenerate_rate <= r.degenerate_ceiling;
    }
    if (!std::isfinite(r.lhs) || !std::isfinite(r.rhs))
        r.pass = false;
}

Json to_json(const CheckReport& r)
{
    Json j;
    j["id"] = r.id;
    j["check"] = r.check;
    j["lhs"] = r.lhs;
    j["lhs_stderr"] = r.lhs_err;
    j["rhs"] = r.rhs;
    j["rhs_stderr"] = r.rhs_err;
    j["z"] = std::isfinite(r.z) ? Json(r.z) : Json("inf");
    j["deterministic"] = r.deterministic;
    if (r.deterministic)
        j["tolerance"] = r.tolerance;
    else
        j["k_sigma"] = r.k_sigma;
    j["degenerate_rate"] = r.degenerate_rate;
    j["degenerate_ceiling"] = r.degenerate_ceiling;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["details"] = r.details;
    j["pass"] = r.pass;
    return j;
}

CheckReport report_from_json(const Json& j)
{
    CheckReport r;
    r.id = j.at("id").get<std::string>();
    r.check = j.at("check").get<std::string>();
    r.lhs = j.at("lhs").get<double>();
    r.lhs_err = j.at("lhs_stderr").get<double>();
    r.rhs = j.at("rhs").get<double>();
    r.rhs_err = j.at("rhs_stderr").get<double>();
    r.z = j.at("z").is_number() ? j.at("z").get<double>() : INFINITY;
    r.deterministic = j.at("deterministic").get<bool>();
    r.tolerance = j.value("tolerance", 0.0);
    r.k_sigma = j.value("k_sigma", 3.0);
    r.degenerate_rate = j.at("degenerate_rate").get<double>();
    r.degenerate_ceiling = j.value("degenerate_ceiling", 1e-3);
    r.samples = j.at("samples").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.details = j.value("details", Json::object());
    r.pass = j.at("pass").get<bool>();
    return r;
}

void write_report_line(std::ostream& out, const CheckReport& r) { out << to_json(r).dump() << '\n'; }

std::vector<CheckReport> read_reports(std::istream& in)
{
    std::vector<CheckReport> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(report_from_json(Json::parse(line)));
        } catch (const Json::exception& e) {
            throw ConfigError("report line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::string with_error(double v, double e, bool deterministic)
{
    std::ostringstream s;
    s << std::setprecision(6) << v;
    if (!deterministic)
        s << " +- " << std::setprecision(2) << e;
    return s.str();
}

} // namespace

void print_table(std::ostream& out, std::span<const CheckReport> reports, bool with_runtime)
{
    std::size_t width = 5;
    for (const auto& r : reports)
        width = std::max(width, r.id.size());
    out << std::left << std::setw(static_cast<int>(width)) << "check" << "  " << std::setw(26) << "lhs" << std::setw(26)
        << "rhs" << std::setw(9) << "z" << std::setw(10) << "degen" << std::setw(6) << "pass";
    if (with_runtime)
        out << "runtime";
    out << '\n';
    std::size_t failed = 0;
    for (const auto& r : reports) {
        std::ostringstream z;
        z << std::setprecision(3) << r.z;
        std::ostringstream degen;
        degen << std::setprecision(2) << r.degenerate_rate;
        out << std::setw(static_cast<int>(width)) << r.id << "  " << std::setw(26)
            << with_error(r.lhs, r.lhs_err, r.deterministic) << std::setw(26)
            << with_error(r.rhs, r.rhs_err, r.deterministic) << std::setw(9) << z.str() << std::setw(10)
            << degen.str() << std::setw(6) << (r.pass ? "yes" : "NO");
        if (with_runtime)
            out << std::fixed << std::setprecision(1) << r.runtime_seconds << "s" << std::defaultfloat;
        out << '\n';
        failed += r.pass ? 0 : 1;
    }
    out << reports.size() - failed << " passed, " << failed << " failed\n";
}

std::vector<CheckReport> run_all(const ExperimentConfig& cfg, std::ostream* jsonl)
{
    std::vector<CheckReport> all;
    for (const auto& check : cfg.checks) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<CheckReport> reports = run_check(check, cfg);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& r : reports) {
            r.runtime_seconds = seconds / static_cast<double>(reports.size());
            if (jsonl) {
                write_report_line(*jsonl, r);
                jsonl->flush();
            }
            all.push_back(std::move(r));
        }
    }
    return all;
}

} // namespace bbgky
