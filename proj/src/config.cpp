#include "spdc/config.hpp"

#include <set>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

using nlohmann::json;

constexpr double kMetersPerPicometer = 1e-12;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

double number(const json& obj, const std::string& key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return number(obj, key, where);
}

std::vector<double> number_list(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(where + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + " must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

CrystalSpec parse_crystal(const json& j) {
    check_keys(j, "crystal",
               {"length_m", "poling_period_m", "d_eff_pm_per_V", "pump_axis", "a_axis", "b_axis",
                "temperature_note"});
    CrystalSpec c = reference_crystal();
    if (auto v = opt_number(j, "length_m", "crystal")) c.length_m = *v;
    if (auto v = opt_number(j, "poling_period_m", "crystal")) c.poling_period_m = *v;
    if (auto v = opt_number(j, "d_eff_pm_per_V", "crystal")) c.d_eff_m_per_v = *v * kMetersPerPicometer;
    if (j.contains("pump_axis")) c.pump_axis = axis_from_string(j.at("pump_axis").get<std::string>());
    if (j.contains("a_axis")) c.a_axis = axis_from_string(j.at("a_axis").get<std::string>());
    if (j.contains("b_axis")) c.b_axis = axis_from_string(j.at("b_axis").get<std::string>());
    if (j.contains("temperature_note")) c.temperature_note = j.at("temperature_note").get<std::string>();
    c.validate();
    return c;
}

AxisModels parse_models(const json& j) {
    if (!j.is_object()) throw ConfigError("'models' must map axis labels to models");
    AxisModels models;
    for (const auto& [key, v] : j.items()) {
        const Axis axis = axis_from_string(key);
        SellmeierModel m = v.is_string() ? builtin_model(v.get<std::string>()) : sellmeier_from_json(v);
        if (m.axis() != axis) {
            throw ConfigError("model '" + m.name() + "' describes axis " +
                              std::string(to_string(m.axis())) + ", configured under " + key);
        }
        models.set(std::move(m));
    }
    return models;
}

DeltaKChoice parse_delta_k(const json& v) {
    if (v.is_number()) return DeltaKChoice::fixed(v.get<double>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "bare") return DeltaKChoice::bare();
        if (s == "residual") return DeltaKChoice::residual();
    }
    throw ConfigError("delta_k must be \"bare\", \"residual\" or a number in rad/m");
}

FocusSettings parse_focus(const json& j) {
    check_keys(j, "focus", {"xi_p", "xi_a", "xi_b", "w_p_m", "w_a_m"});
    FocusSettings f;
    f.xi_p = opt_number(j, "xi_p", "focus");
    f.xi_a = opt_number(j, "xi_a", "focus");
    f.xi_b = opt_number(j, "xi_b", "focus");
    f.w_p_m = opt_number(j, "w_p_m", "focus");
    f.w_a_m = opt_number(j, "w_a_m", "focus");
    if (f.xi_p && f.w_p_m) throw ConfigError("focus: give xi_p or w_p_m, not both");
    if (f.xi_a && f.w_a_m) throw ConfigError("focus: give xi_a or w_a_m, not both");
    return f;
}

std::vector<double> parse_grid(const json& v, const std::string& where) {
    if (v.is_object()) {
        check_keys(v, where, {"min", "max", "points", "spacing"});
        const double lo = number(v, "min", where);
        const double hi = number(v, "max", where);
        const auto& pts = v.at("points");
        if (!pts.is_number_integer() || pts.get<long long>() < 0) {
            throw ConfigError(where + ".points must be a non-negative integer");
        }
        const auto n = static_cast<std::size_t>(pts.get<long long>());
        const std::string spacing = v.value("spacing", std::string("log"));
        if (n == 0) return {};
        if (spacing == "log") return log_grid(lo, hi, n);
        if (spacing == "linear") return linear_grid(lo, hi, n);
        throw ConfigError(where + ".spacing must be \"log\" or \"linear\"");
    }
    return number_list(v, where);
}

SweepSettings parse_sweep(const json& j) {
    check_keys(j, "sweep", {"xi_p", "xi_a"});
    SweepSettings s;
    if (!j.contains("xi_p") || !j.contains("xi_a")) throw ConfigError("sweep needs xi_p and xi_a");
    s.xi_p = number_list(j.at("xi_p"), "sweep.xi_p");
    s.xi_a = parse_grid(j.at("xi_a"), "sweep.xi_a");
    return s;
}

ArmSettings parse_arm(const json& j, const std::string& where) {
    check_keys(j, where, {"eta_s", "eta_d", "dark_cps", "wires", "wire_efficiencies"});
    ArmSettings a;
    if (auto v = opt_number(j, "eta_s", where)) a.eta_s = *v;
    if (auto v = opt_number(j, "eta_d", where)) a.eta_d = *v;
    if (auto v = opt_number(j, "dark_cps", where)) a.dark_cps = *v;
    if (j.contains("wires")) {
        if (!j.at("wires").is_number_integer()) throw ConfigError(where + ".wires must be an integer");
        a.wires = j.at("wires").get<int>();
    }
    if (j.contains("wire_efficiencies")) {
        a.wire_efficiencies = number_list(j.at("wire_efficiencies"), where + ".wire_efficiencies");
    }
    a.path().validate();
    a.detector().validate();
    return a;
}

SimulationSettings parse_simulation(const json& j) {
    check_keys(j, "simulation",
               {"mode", "trials", "duration_s", "pump_mw", "window_s", "dead_time_s", "rates_per_mw"});
    SimulationSettings s;
    if (j.contains("mode")) s.mode = mc::sim_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("trials")) {
        if (!j.at("trials").is_number_unsigned()) throw ConfigError("simulation.trials must be >= 0");
        s.trials = j.at("trials").get<std::uint64_t>();
    }
    if (auto v = opt_number(j, "duration_s", "simulation")) s.duration_s = *v;
    if (auto v = opt_number(j, "pump_mw", "simulation")) s.pump_mw = *v;
    if (auto v = opt_number(j, "window_s", "simulation")) s.window_s = *v;
    if (auto v = opt_number(j, "dead_time_s", "simulation")) s.dead_time_s = *v;
    if (j.contains("rates_per_mw")) {
        const auto& r = j.at("rates_per_mw");
        check_keys(r, "simulation.rates_per_mw", {"R_a", "R_b", "R_c"});
        EmissionRates e;
        e.R_a = number(r, "R_a", "rates_per_mw");
        e.R_b = number(r, "R_b", "rates_per_mw");
        e.R_c = number(r, "R_c", "rates_per_mw");
        e.R_t = e.R_a + e.R_b;
        s.rates_per_mw = e;
    }
    return s;
}

}  // namespace

mc::ArmConfig ArmSettings::arm() const {
    mc::ArmConfig a;
    a.eta_s = eta_s;
    a.eta_d = eta_d;
    a.wire_count = wires;
    a.wire_efficiencies = wire_efficiencies;
    a.dark_cps = dark_cps;
    return a;
}

SourceContext RunConfig::context() const {
    SourceContext ctx;
    ctx.crystal = crystal;
    ctx.models = models;
    ctx.waves = make_wave_triple(crystal, models, pump_m, a_m, b_m);
    ctx.delta_k = delta_k;
    if (focus && focus->xi_b) ctx.xi_b_override = focus->xi_b;
    return ctx;
}

FocusConfig RunConfig::focus_point(const WaveTriple& waves) const {
    if (!focus) throw ConfigError("this command needs a 'focus' block");
    const auto& f = *focus;
    if (!f.xi_p && !f.w_p_m) throw ConfigError("focus needs xi_p or w_p_m");
    if (!f.xi_a && !f.w_a_m) throw ConfigError("focus needs xi_a or w_a_m");
    const double xi_p = f.xi_p ? *f.xi_p : focal_parameter(crystal.length_m, waves.k_p, *f.w_p_m);
    const double xi_a = f.xi_a ? *f.xi_a : focal_parameter(crystal.length_m, waves.k_a, *f.w_a_m);
    // A shared collection waist gives the same ξ_b as the tie rule.
    FocusConfig out = tied_focus(xi_p, xi_a, waves);
    if (f.xi_b) out.xi_b = *f.xi_b;
    out.validate();
    return out;
}

RunConfig run_config_from_json(const json& doc) {
    check_keys(doc, "config",
               {"crystal", "models", "waves", "delta_k", "focus", "sweep", "index", "detectors",
                "dark_coincidence", "simulation", "measurements", "output", "seed", "description"});
    try {
        RunConfig c;
        if (doc.contains("crystal")) c.crystal = parse_crystal(doc.at("crystal"));
        if (doc.contains("models")) c.models = parse_models(doc.at("models"));
        if (doc.contains("waves")) {
            const auto& w = doc.at("waves");
            check_keys(w, "waves", {"pump_m", "a_m", "b_m"});
            c.pump_m = number(w, "pump_m", "waves");
            c.a_m = number(w, "a_m", "waves");
            c.b_m = opt_number(w, "b_m", "waves");
        }
        if (doc.contains("delta_k")) c.delta_k = parse_delta_k(doc.at("delta_k"));
        if (doc.contains("focus")) c.focus = parse_focus(doc.at("focus"));
        if (doc.contains("sweep")) c.sweep = parse_sweep(doc.at("sweep"));
        if (doc.contains("index")) {
            const auto& ix = doc.at("index");
            check_keys(ix, "index", {"wavelengths_m"});
            c.index_wavelengths_m = number_list(ix.at("wavelengths_m"), "index.wavelengths_m");
        }
        if (doc.contains("detectors")) {
            const auto& d = doc.at("detectors");
            check_keys(d, "detectors", {"config", "single", "a", "b"});
            const std::string layout = d.value("config", std::string("dual"));
            if (layout == "single") {
                c.layout = RecordLayout::Single;
                if (!d.contains("single")) throw ConfigError("detectors.config single needs 'single'");
                c.single = parse_arm(d.at("single"), "detectors.single");
            } else if (layout == "dual") {
                c.layout = RecordLayout::Dual;
                if (!d.contains("a") || !d.contains("b")) {
                    throw ConfigError("detectors.config dual needs 'a' and 'b'");
                }
                c.arm_a = parse_arm(d.at("a"), "detectors.a");
                c.arm_b = parse_arm(d.at("b"), "detectors.b");
            } else {
                throw ConfigError("detectors.config must be \"single\" or \"dual\"");
            }
            c.detectors_present = true;
        }
        if (doc.contains("dark_coincidence")) {
            const auto mode = doc.at("dark_coincidence").get<std::string>();
            if (mode == "estimate") {
                c.dark_coincidence = DarkCoincidenceMode::Estimate;
            } else if (mode == "zero") {
                c.dark_coincidence = DarkCoincidenceMode::Zero;
            } else {
                throw ConfigError("dark_coincidence must be \"estimate\" or \"zero\"");
            }
        }
        if (doc.contains("simulation")) c.simulation = parse_simulation(doc.at("simulation"));
        if (doc.contains("measurements")) c.measurements_path = doc.at("measurements").get<std::string>();
        if (doc.contains("output")) {
            const auto& o = doc.at("output");
            check_keys(o, "output", {"format", "path"});
            if (o.contains("format")) c.format = o.at("format").get<std::string>();
            if (o.contains("path")) c.out_path = o.at("path").get<std::string>();
        }
        if (c.format != "csv" && c.format != "json") {
            throw ConfigError("output format must be \"csv\" or \"json\"");
        }
        if (doc.contains("seed")) {
            if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
            c.seed = doc.at("seed").get<std::uint64_t>();
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    const std::string text = read_text_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(doc);
}

}  // namespace spdc
