#ifndef TRIONPOL_CONFIG_HPP
#define TRIONPOL_CONFIG_HPP

#include "trionpol/materials.hpp"
#include "trionpol/model.hpp"
#include "trionpol/types.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace trionpol {

enum class EnergyUnit { gamma_c, mev };

inline const char* to_string(EnergyUnit u)
{
    return u == EnergyUnit::gamma_c ? "gamma_c" : "meV";
}

struct SolverOptions {
    double steady_tol = 1e-10;
    double ode_tol = 1e-9;
    int max_enlarge = 3;
    double peak_prominence = 0.01;

    bool operator==(const SolverOptions&) const = default;
};

struct OutputOptions {
    std::string dir = ".";
    std::string prefix = "run";

    bool operator==(const OutputOptions&) const = default;
};

// Raw [material] section; compiled into ModelParams on demand.
struct MaterialConfig {
    MaterialParams mp;
    double gamma_c_mev = 0.0;
    double gamma_t_mev = 0.0;
    std::optional<double> pump_mev;
    std::optional<double> delta_mev;
    double omega_cav_mev = 0.0;

    bool operator==(const MaterialConfig&) const = default;
};

struct RunConfig {
    EnergyUnit unit = EnergyUnit::gamma_c;
    std::optional<ModelParams> model;
    std::optional<MaterialConfig> material;
    Truncation trunc{10, 10};
    SolverOptions solver;
    OutputOptions output;

    // ModelParams regardless of which section the config used.
    ModelParams resolved_model() const
    {
        if (model) return *model;
        if (!material) throw ConfigError("config: no [model] or [material] section");
        ModelParams p =
            derive_model_params(material->mp, material->gamma_c_mev, material->gamma_t_mev);
        p.omega_cav = material->omega_cav_mev;
        p.omega_t = material->omega_cav_mev;
        if (material->pump_mev) p.pump_p = material->pump_mev;
        if (material->delta_mev) p.set_delta(*material->delta_mev);
        return p;
    }

    EnergyUnit resolved_unit() const { return material ? EnergyUnit::mev : unit; }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct ConfigLine {
    std::string section;
    std::string key;
    std::string value;
    int line_no = 0;
};

[[noreturn]] inline void config_fail(const std::string& file, int line, const std::string& msg)
{
    throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
}

inline double parse_double(const ConfigLine& l, const std::string& file)
{
    try {
        size_t pos = 0;
        const double v = std::stod(l.value, &pos);
        while (pos < l.value.size() && std::isspace(static_cast<unsigned char>(l.value[pos])))
            ++pos;
        if (pos != l.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        config_fail(file, l.line_no, "key '" + l.key + "': not a number: '" + l.value + "'");
    }
}

inline int parse_int(const ConfigLine& l, const std::string& file)
{
    const double v = parse_double(l, file);
    const double r = std::floor(v + 0.5);
    if (std::abs(v - r) > 1e-12)
        config_fail(file, l.line_no, "key '" + l.key + "': expected an integer");
    return static_cast<int>(r);
}

inline std::string trim(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// Flat sectioned key=value config:
//   [model] | [material], [truncation], [solver], [output]
// '#' and ';' start comments. Exactly one of [model]/[material] is required.
inline RunConfig parse_config(std::istream& is, const std::string& file = "<config>")
{
    using detail::ConfigLine;
    using detail::config_fail;

    std::vector<ConfigLine> lines;
    std::string section;
    std::string raw;
    int line_no = 0;
    std::map<std::string, int> seen; // "section.key" -> line
    while (std::getline(is, raw)) {
        ++line_no;
        const size_t hash = raw.find_first_of("#;");
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = detail::trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') config_fail(file, line_no, "malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            continue;
        }
        const size_t eq = s.find('=');
        if (eq == std::string::npos) config_fail(file, line_no, "expected key = value");
        ConfigLine l;
        l.section = section;
        l.key = detail::trim(s.substr(0, eq));
        l.value = detail::trim(s.substr(eq + 1));
        l.line_no = line_no;
        if (l.key.empty()) config_fail(file, line_no, "empty key");
        if (section.empty()) config_fail(file, line_no, "key outside any section");
        const std::string id = section + "." + l.key;
        if (seen.count(id))
            config_fail(file, line_no,
                        "duplicate key '" + l.key + "' (first at line " +
                            std::to_string(seen[id]) + ")");
        seen[id] = line_no;
        lines.push_back(std::move(l));
    }

    RunConfig cfg;
    bool has_model = false, has_material = false;
    ModelParams mp;
    MaterialConfig mat;
    std::optional<double> model_gc, model_rabi, model_delta, model_omega_p;
    std::optional<double> model_gamma_c, model_gamma_t, model_omega_t;
    bool model_ns_set = false;

    for (const ConfigLine& l : lines) {
        auto num = [&] { return detail::parse_double(l, file); };
        auto integer = [&] { return detail::parse_int(l, file); };
        if (l.section == "model") {
            has_model = true;
            if (l.key == "unit") {
                if (l.value == "gamma_c")
                    cfg.unit = EnergyUnit::gamma_c;
                else if (l.value == "meV" || l.value == "mev")
                    cfg.unit = EnergyUnit::mev;
                else
                    config_fail(file, l.line_no, "unit must be 'gamma_c' or 'meV'");
            } else if (l.key == "n_s") {
                mp.n_s = integer();
                model_ns_set = true;
            } else if (l.key == "omega_cav")
                mp.omega_cav = num();
            else if (l.key == "omega_t")
                model_omega_t = num();
            else if (l.key == "g_c")
                model_gc = num();
            else if (l.key == "omega_rabi")
                model_rabi = num();
            else if (l.key == "gamma_c")
                model_gamma_c = num();
            else if (l.key == "gamma_t")
                model_gamma_t = num();
            else if (l.key == "pump_p")
                mp.pump_p = num();
            else if (l.key == "omega_p")
                model_omega_p = num();
            else if (l.key == "delta")
                model_delta = num();
            else
                config_fail(file, l.line_no, "unknown [model] key '" + l.key + "'");
        } else if (l.section == "material") {
            has_material = true;
            if (l.key == "lambda1_nm")
                mat.mp.lambda1_nm = num();
            else if (l.key == "lambda2_nm")
                mat.mp.lambda2_nm = num();
            else if (l.key == "xi")
                mat.mp.xi = num();
            else if (l.key == "epsilon")
                mat.mp.epsilon = num();
            else if (l.key == "m_e")
                mat.mp.m_e = num();
            else if (l.key == "m_h")
                mat.mp.m_h = num();
            else if (l.key == "l_cav_um")
                mat.mp.l_cav_um = num();
            else if (l.key == "area_um2")
                mat.mp.area_um2 = num();
            else if (l.key == "density_cm2")
                mat.mp.density_per_cm2 = num();
            else if (l.key == "gamma_c_mev")
                mat.gamma_c_mev = num();
            else if (l.key == "gamma_t_mev")
                mat.gamma_t_mev = num();
            else if (l.key == "pump_mev")
                mat.pump_mev = num();
            else if (l.key == "delta_mev")
                mat.delta_mev = num();
            else if (l.key == "omega_cav_mev")
                mat.omega_cav_mev = num();
            else
                config_fail(file, l.line_no, "unknown [material] key '" + l.key + "'");
        } else if (l.section == "truncation") {
            if (l.key == "n_c_max")
                cfg.trunc.n_c_max = integer();
            else if (l.key == "n_t_max")
                cfg.trunc.n_t_max = integer();
            else
                config_fail(file, l.line_no, "unknown [truncation] key '" + l.key + "'");
        } else if (l.section == "solver") {
            if (l.key == "steady_tol")
                cfg.solver.steady_tol = num();
            else if (l.key == "ode_tol")
                cfg.solver.ode_tol = num();
            else if (l.key == "max_enlarge")
                cfg.solver.max_enlarge = integer();
            else if (l.key == "peak_prominence")
                cfg.solver.peak_prominence = num();
            else
                config_fail(file, l.line_no, "unknown [solver] key '" + l.key + "'");
        } else if (l.section == "output") {
            if (l.key == "dir")
                cfg.output.dir = l.value;
            else if (l.key == "prefix")
                cfg.output.prefix = l.value;
            else
                config_fail(file, l.line_no, "unknown [output] key '" + l.key + "'");
        } else {
            config_fail(file, l.line_no, "unknown section [" + l.section + "]");
        }
    }

    if (has_model == has_material)
        throw ConfigError(file + ": exactly one of [model] or [material] is required");

    if (has_model) {
        if (!model_ns_set) throw ConfigError(file + ": [model] n_s is required");
        if (model_gc.has_value() == model_rabi.has_value())
            throw ConfigError(file + ": [model] needs exactly one of g_c / omega_rabi");
        if (model_rabi)
            mp.omega_rabi = *model_rabi;
        else
            mp.set_g_c(*model_gc);
        mp.gamma_c = model_gamma_c.value_or(cfg.unit == EnergyUnit::gamma_c ? 1.0 : 0.0);
        if (cfg.unit == EnergyUnit::mev && !model_gamma_c)
            throw ConfigError(file + ": [model] gamma_c is required when unit = meV");
        mp.gamma_t = model_gamma_t.value_or(mp.gamma_c);
        mp.omega_t = model_omega_t.value_or(mp.omega_cav);
        if (model_delta && model_omega_p)
            throw ConfigError(file + ": [model] delta and omega_p are mutually exclusive");
        if (model_omega_p) mp.omega_p = model_omega_p;
        if (model_delta) mp.set_delta(*model_delta);
        try {
            mp.validate();
        } catch (const std::exception& e) {
            throw ConfigError(file + ": [model] " + e.what());
        }
        cfg.model = mp;
    } else {
        try {
            mat.mp.validate();
            cfg.material = mat;
            cfg.resolved_model().validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(file + ": [material] " + std::string(e.what()));
        }
        cfg.unit = EnergyUnit::mev;
    }
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& file = "<config>")
{
    std::istringstream is(text);
    return parse_config(is, file);
}

// Normalized config text; parse_config_text(dump_config(c)) == c.
inline std::string dump_config(const RunConfig& cfg)
{
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << key << " = " << buf << '\n';
    };
    if (cfg.model) {
        const ModelParams& m = *cfg.model;
        os << "[model]\n";
        os << "unit = " << to_string(cfg.unit) << '\n';
        os << "n_s = " << m.n_s << '\n';
        put("omega_cav", m.omega_cav);
        put("omega_t", m.omega_t);
        put("omega_rabi", m.omega_rabi);
        put("gamma_c", m.gamma_c);
        put("gamma_t", m.gamma_t);
        if (m.pump_p) put("pump_p", *m.pump_p);
        if (m.omega_p) put("omega_p", *m.omega_p);
    } else if (cfg.material) {
        const MaterialConfig& mc = *cfg.material;
        os << "[material]\n";
        put("lambda1_nm", mc.mp.lambda1_nm);
        put("lambda2_nm", mc.mp.lambda2_nm);
        put("xi", mc.mp.xi);
        put("epsilon", mc.mp.epsilon);
        put("m_e", mc.mp.m_e);
        put("m_h", mc.mp.m_h);
        put("l_cav_um", mc.mp.l_cav_um);
        put("area_um2", mc.mp.area_um2);
        put("density_cm2", mc.mp.density_per_cm2);
        put("gamma_c_mev", mc.gamma_c_mev);
        put("gamma_t_mev", mc.gamma_t_mev);
        if (mc.pump_mev) put("pump_mev", *mc.pump_mev);
        if (mc.delta_mev) put("delta_mev", *mc.delta_mev);
        put("omega_cav_mev", mc.omega_cav_mev);
    }
    os << "[truncation]\n";
    os << "n_c_max = " << cfg.trunc.n_c_max << '\n';
    os << "n_t_max = " << cfg.trunc.n_t_max << '\n';
    os << "[solver]\n";
    put("steady_tol", cfg.solver.steady_tol);
    put("ode_tol", cfg.solver.ode_tol);
    os << "max_enlarge = " << cfg.solver.max_enlarge << '\n';
    put("peak_prominence", cfg.solver.peak_prominence);
    os << "[output]\n";
    os << "dir = " << cfg.output.dir << '\n';
    os << "prefix = " << cfg.output.prefix << '\n';
    return os.str();
}

} // namespace trionpol

#endif
