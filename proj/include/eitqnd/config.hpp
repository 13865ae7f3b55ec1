// Experiment configuration: a flat sectioned key = value text format,
// strictly parsed (unknown keys, duplicates and out-of-range values are
// rejected with file:line:col diagnostics), plus the canonical dump used by
// run manifests for bit-identical reruns.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eitqnd/herald.hpp"
#include "eitqnd/output.hpp"
#include "eitqnd/parallel.hpp"

namespace eitqnd {

struct GridOptions {
    std::vector<double> g_list;
    std::vector<double> kappa_list;
    std::vector<double> delta_list;
    std::vector<int> n_list;
    std::optional<int> fock_cutoff; // override; default max(n_list) + 2
};

struct HeraldOptions {
    Complex alpha{1.0, 0.0}; // |alpha|^2 = 1 by default
    int shots = 20000;
    double sigma_s = 0.0;
    MeasureMode mode = MeasureMode::FastTable;
    int target_n = 1;
    std::vector<int> calibrate_n = {0, 1, 2, 3, 4};
};

struct ExperimentConfig {
    SystemParams params;        // defaults: the common figure parameters
    GridOptions grid;           // empty lists mean per-command defaults
    PropagationConfig solver;   // t_end 50, sample_dt 0.05, rk45
    double t_window = kMeasurementWindow;
    OutputFormat format = OutputFormat::Csv;
    HeraldOptions herald;
    std::uint64_t seed = 20260810;
    int jobs = 0; // 0: hardware concurrency

    void validate() const {
        params.validate();
        solver.validate();
        if (t_window <= 0.0 || t_window > solver.t_end + 1e-12)
            throw InvalidParameterError("t_window must be in (0, t_end]");
        for (std::size_t i = 0; i < grid.n_list.size(); ++i) {
            if (grid.n_list[i] < 0)
                throw InvalidParameterError("n_list entries must be >= 0");
            if (i > 0 && grid.n_list[i] <= grid.n_list[i - 1])
                throw InvalidParameterError("n_list must be strictly increasing");
        }
        if (grid.fock_cutoff) {
            for (const int n : grid.n_list)
                if (*grid.fock_cutoff < n)
                    throw InvalidParameterError("fock_cutoff below largest n in n_list");
        }
        if (herald.shots < 1)
            throw InvalidParameterError("herald shots must be >= 1");
        if (herald.sigma_s < 0.0)
            throw InvalidParameterError("herald sigma_s must be >= 0");
        if (herald.target_n < 0)
            throw InvalidParameterError("herald target_n must be >= 0");
    }
};

namespace detail {

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line;
    int col; // 1-based column of the key (or of the value for value errors)
};

[[noreturn]] inline void config_fail(const std::string& file, int line, int col,
                                     const std::string& msg) {
    throw ConfigError(file + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + msg);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<ConfigEntry> tokenize_config(const std::string& text,
                                                const std::string& file) {
    std::vector<ConfigEntry> entries;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto comment = raw.find('#');
        std::string body = comment == std::string::npos ? raw : raw.substr(0, comment);
        const std::string stripped = trim(body);
        if (stripped.empty())
            continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                config_fail(file, line, 1, "unterminated section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty())
                config_fail(file, line, 1, "empty section name");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            config_fail(file, line, 1, "expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            config_fail(file, line, 1, "empty key");
        if (value.empty())
            config_fail(file, line, static_cast<int>(eq) + 2, "empty value");
        const int key_col = static_cast<int>(body.find_first_not_of(" \t")) + 1;
        if (section.empty())
            config_fail(file, line, key_col, "key '" + key + "' outside any section");
        entries.push_back({section, key, value, line, key_col});
    }
    return entries;
}

inline double parse_double_value(const ConfigEntry& e, const std::string& file) {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        config_fail(file, e.line, e.col, "'" + e.value + "' is not a number");
    return v;
}

inline long parse_int_value(const ConfigEntry& e, const std::string& file) {
    long v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        config_fail(file, e.line, e.col, "'" + e.value + "' is not an integer");
    return v;
}

inline std::uint64_t parse_uint64_value(const ConfigEntry& e, const std::string& file) {
    std::uint64_t v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        config_fail(file, e.line, e.col, "'" + e.value + "' is not an unsigned integer");
    return v;
}

template <class Parse>
auto parse_list_value(const ConfigEntry& e, const std::string& file, Parse&& parse) {
    std::vector<decltype(parse(e, file))> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        ConfigEntry sub = e;
        sub.value = trim(item);
        if (sub.value.empty())
            config_fail(file, e.line, e.col, "empty list element");
        out.push_back(parse(sub, file));
    }
    if (out.empty())
        config_fail(file, e.line, e.col, "empty list");
    return out;
}

} // namespace detail

/// Parse config text over the given defaults. Strict: unknown sections/keys,
/// duplicates, malformed numbers and out-of-range values all raise ConfigError
/// with file:line:col diagnostics.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& file,
                                          ExperimentConfig cfg = {}) {
    using detail::config_fail;
    const auto entries = detail::tokenize_config(text, file);

    std::vector<std::string> seen;
    for (const auto& e : entries) {
        const std::string id = e.section + "." + e.key;
        for (const auto& s : seen)
            if (s == id)
                config_fail(file, e.line, e.col, "duplicate key '" + e.key +
                                                     "' in section [" + e.section + "]");
        seen.push_back(id);

        const auto num = [&] { return detail::parse_double_value(e, file); };
        const auto integer = [&] { return detail::parse_int_value(e, file); };

        if (e.section == "params") {
            if (e.key == "omega_p") cfg.params.omega_p = num();
            else if (e.key == "omega_c") cfg.params.omega_c = num();
            else if (e.key == "delta_p") cfg.params.delta_p = num();
            else if (e.key == "delta_c") cfg.params.delta_c = num();
            else if (e.key == "gamma_ea") cfg.params.gamma_ea = num();
            else if (e.key == "gamma_eb") cfg.params.gamma_eb = num();
            else if (e.key == "gamma_deph") cfg.params.gamma_deph = num();
            else if (e.key == "kappa") cfg.params.kappa = num();
            else if (e.key == "g_disp") cfg.params.g_disp = num();
            else if (e.key == "suscept_prefactor") cfg.params.suscept_prefactor = num();
            else config_fail(file, e.line, e.col,
                             "unknown key '" + e.key + "' in section [params]");
        } else if (e.section == "grid") {
            if (e.key == "g_list")
                cfg.grid.g_list = detail::parse_list_value(e, file, detail::parse_double_value);
            else if (e.key == "kappa_list")
                cfg.grid.kappa_list =
                    detail::parse_list_value(e, file, detail::parse_double_value);
            else if (e.key == "delta_list")
                cfg.grid.delta_list =
                    detail::parse_list_value(e, file, detail::parse_double_value);
            else if (e.key == "n_list") {
                cfg.grid.n_list.clear();
                for (const long n : detail::parse_list_value(e, file, detail::parse_int_value))
                    cfg.grid.n_list.push_back(static_cast<int>(n));
            } else if (e.key == "fock_cutoff")
                cfg.grid.fock_cutoff = static_cast<int>(integer());
            else
                config_fail(file, e.line, e.col,
                            "unknown key '" + e.key + "' in section [grid]");
        } else if (e.section == "solver") {
            if (e.key == "method") {
                if (e.value == "rk45") cfg.solver.method = Method::Rk45Adaptive;
                else if (e.value == "rk4") cfg.solver.method = Method::Rk4Fixed;
                else if (e.value == "expm") cfg.solver.method = Method::ExpmOracle;
                else config_fail(file, e.line, e.col,
                                 "unknown method '" + e.value + "' (rk45|rk4|expm)");
            } else if (e.key == "t_end") cfg.solver.t_end = num();
            else if (e.key == "sample_dt") cfg.solver.sample_dt = num();
            else if (e.key == "step_dt") cfg.solver.step_dt = num();
            else if (e.key == "rel_tol") cfg.solver.rel_tol = num();
            else if (e.key == "abs_tol") cfg.solver.abs_tol = num();
            else if (e.key == "t_window") cfg.t_window = num();
            else config_fail(file, e.line, e.col,
                             "unknown key '" + e.key + "' in section [solver]");
        } else if (e.section == "output") {
            if (e.key == "format") {
                if (e.value == "csv") cfg.format = OutputFormat::Csv;
                else if (e.value == "json") cfg.format = OutputFormat::Json;
                else config_fail(file, e.line, e.col,
                                 "unknown format '" + e.value + "' (csv|json)");
            } else
                config_fail(file, e.line, e.col,
                            "unknown key '" + e.key + "' in section [output]");
        } else if (e.section == "herald") {
            if (e.key == "alpha_re")
                cfg.herald.alpha = Complex(num(), cfg.herald.alpha.imag());
            else if (e.key == "alpha_im")
                cfg.herald.alpha = Complex(cfg.herald.alpha.real(), num());
            else if (e.key == "shots") cfg.herald.shots = static_cast<int>(integer());
            else if (e.key == "sigma_s") cfg.herald.sigma_s = num();
            else if (e.key == "mode") {
                if (e.value == "fast") cfg.herald.mode = MeasureMode::FastTable;
                else if (e.value == "exact") cfg.herald.mode = MeasureMode::ExactDynamics;
                else config_fail(file, e.line, e.col,
                                 "unknown mode '" + e.value + "' (fast|exact)");
            } else if (e.key == "target_n") cfg.herald.target_n = static_cast<int>(integer());
            else if (e.key == "calibrate_n") {
                cfg.herald.calibrate_n.clear();
                for (const long n : detail::parse_list_value(e, file, detail::parse_int_value))
                    cfg.herald.calibrate_n.push_back(static_cast<int>(n));
            } else
                config_fail(file, e.line, e.col,
                            "unknown key '" + e.key + "' in section [herald]");
        } else if (e.section == "run") {
            if (e.key == "seed") cfg.seed = detail::parse_uint64_value(e, file);
            else if (e.key == "jobs") cfg.jobs = static_cast<int>(integer());
            else config_fail(file, e.line, e.col,
                             "unknown key '" + e.key + "' in section [run]");
        } else {
            config_fail(file, e.line, e.col, "unknown section [" + e.section + "]");
        }
    }

    try {
        cfg.validate();
    } catch (const Error& err) {
        throw ConfigError(file + ": " + err.what());
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path,
                                         ExperimentConfig defaults = {}) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path, std::move(defaults));
}

namespace detail {

template <class T>
std::string join_list(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i > 0)
            out += ", ";
        if constexpr (std::is_same_v<T, double>)
            out += format_double(xs[i]);
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

} // namespace detail

/// Canonical flat dump; parsing it back reproduces the config exactly.
inline std::string dump_config(const ExperimentConfig& cfg) {
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) {
        out += k + " = " + v + "\n";
    };
    out += "[params]\n";
    kv("omega_p", format_double(cfg.params.omega_p));
    kv("omega_c", format_double(cfg.params.omega_c));
    kv("delta_p", format_double(cfg.params.delta_p));
    kv("delta_c", format_double(cfg.params.delta_c));
    kv("gamma_ea", format_double(cfg.params.gamma_ea));
    kv("gamma_eb", format_double(cfg.params.gamma_eb));
    kv("gamma_deph", format_double(cfg.params.gamma_deph));
    kv("kappa", format_double(cfg.params.kappa));
    kv("g_disp", format_double(cfg.params.g_disp));
    kv("suscept_prefactor", format_double(cfg.params.suscept_prefactor));
    out += "\n[grid]\n";
    if (!cfg.grid.g_list.empty())
        kv("g_list", detail::join_list(cfg.grid.g_list));
    if (!cfg.grid.kappa_list.empty())
        kv("kappa_list", detail::join_list(cfg.grid.kappa_list));
    if (!cfg.grid.delta_list.empty())
        kv("delta_list", detail::join_list(cfg.grid.delta_list));
    if (!cfg.grid.n_list.empty())
        kv("n_list", detail::join_list(cfg.grid.n_list));
    if (cfg.grid.fock_cutoff)
        kv("fock_cutoff", std::to_string(*cfg.grid.fock_cutoff));
    out += "\n[solver]\n";
    kv("method", cfg.solver.method == Method::Rk45Adaptive
                     ? "rk45"
                     : (cfg.solver.method == Method::Rk4Fixed ? "rk4" : "expm"));
    kv("t_end", format_double(cfg.solver.t_end));
    kv("sample_dt", format_double(cfg.solver.sample_dt));
    kv("step_dt", format_double(cfg.solver.step_dt));
    kv("rel_tol", format_double(cfg.solver.rel_tol));
    kv("abs_tol", format_double(cfg.solver.abs_tol));
    kv("t_window", format_double(cfg.t_window));
    out += "\n[output]\n";
    kv("format", format_name(cfg.format));
    out += "\n[herald]\n";
    kv("alpha_re", format_double(cfg.herald.alpha.real()));
    kv("alpha_im", format_double(cfg.herald.alpha.imag()));
    kv("shots", std::to_string(cfg.herald.shots));
    kv("sigma_s", format_double(cfg.herald.sigma_s));
    kv("mode", measure_mode_name(cfg.herald.mode));
    kv("target_n", std::to_string(cfg.herald.target_n));
    kv("calibrate_n", detail::join_list(cfg.herald.calibrate_n));
    out += "\n[run]\n";
    kv("seed", std::to_string(cfg.seed));
    kv("jobs", std::to_string(cfg.jobs));
    return out;
}

} // namespace eitqnd
