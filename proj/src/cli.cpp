#include "spdc/cli.hpp"

#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "spdc/config.hpp"
#include "spdc/errors.hpp"
#include "spdc/format.hpp"

namespace spdc {

namespace {

using nlohmann::json;

struct Options {
    std::string config_path;
    std::optional<double> xi_p;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> measurements;
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

RunConfig load(const Options& opt) {
    RunConfig cfg = load_run_config(opt.config_path);
    if (opt.seed) cfg.seed = opt.seed;
    if (opt.out) cfg.out_path = opt.out;
    if (opt.format) {
        if (*opt.format != "csv" && *opt.format != "json") {
            throw ConfigError("--format must be csv or json");
        }
        cfg.format = *opt.format;
    }
    if (opt.measurements) cfg.measurements_path = opt.measurements;
    if (opt.xi_p) {
        if (cfg.sweep) cfg.sweep->xi_p = {*opt.xi_p};
        if (!cfg.focus) cfg.focus = FocusSettings{};
        cfg.focus->xi_p = opt.xi_p;
        cfg.focus->w_p_m.reset();
    }
    return cfg;
}

void emit(const RunConfig& cfg, const std::string& text, Streams& s) {
    if (cfg.out_path) {
        write_text_file(*cfg.out_path, text);
    } else {
        s.out << text;
    }
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// ---- index

void cmd_index(const RunConfig& cfg, Streams& s) {
    struct Row {
        std::string role;
        const SellmeierModel* model;
        double lambda;
    };
    std::vector<Row> rows;
    if (!cfg.index_wavelengths_m.empty()) {
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            if (!cfg.models.has(axis)) continue;
            for (double l : cfg.index_wavelengths_m) rows.push_back({"", &cfg.models.at(axis), l});
        }
        if (rows.empty()) throw ConfigError("no Sellmeier models configured");
    } else {
        const WaveTriple w = make_wave_triple(cfg.crystal, cfg.models, cfg.pump_m, cfg.a_m, cfg.b_m);
        rows.push_back({"pump", &cfg.models.at(cfg.crystal.pump_axis), w.lambda_p});
        rows.push_back({"a", &cfg.models.at(cfg.crystal.a_axis), w.lambda_a});
        rows.push_back({"b", &cfg.models.at(cfg.crystal.b_axis), w.lambda_b});
    }

    std::string csv = "role,axis,model,lambda_m,n,n_group\n";
    json arr = json::array();
    for (const auto& r : rows) {
        const double n = refractive_index(*r.model, r.lambda);
        const double ng = group_index(*r.model, r.lambda);
        const std::string axis(to_string(r.model->axis()));
        csv += r.role + ',' + axis + ',' + csv_field(r.model->name()) + ',' + format_double(r.lambda) +
               ',' + format_double(n) + ',' + format_double(ng) + '\n';
        arr.push_back({{"role", r.role},
                       {"axis", axis},
                       {"model", r.model->name()},
                       {"lambda_m", r.lambda},
                       {"n", n},
                       {"n_group", ng}});
    }
    emit(cfg, cfg.format == "json" ? json_text(arr) : csv, s);
}

// ---- rates

SourceContext baseline_context(const RunConfig& cfg) {
    SourceContext ctx = cfg.context();
    ctx.xi_b_override.reset();  // the baseline always uses the tie rule
    return ctx;
}

void cmd_rates(const RunConfig& cfg, Streams& s) {
    const SourceContext ctx = cfg.context();
    const FocusConfig focus = cfg.focus_point(ctx.waves);
    const double dk = ctx.delta_k_value();

    SweepRecord r;
    r.xi_p = focus.xi_p;
    r.xi_a = focus.xi_a;
    r.xi_b = focus.xi_b;
    r.rates = emission_rates(ctx.crystal, ctx.waves, focus, dk);
    const auto eta = eta_c_from_rates(r.rates);
    r.eta_c = eta.value;
    if (eta.zero_emission) r.warnings.push_back("zero emission: eta_c reported as 0");
    const double baseline = normalization_baseline(baseline_context(cfg));
    r.norm_pair_rate = baseline > 0.0 ? r.rates.R_c / baseline : 0.0;
    for (const auto& w : validity_check(ctx.crystal, ctx.waves, dk, focus)) {
        r.warnings.push_back(w);
        s.err << "warning: " << w << "\n";
    }
    if (cfg.format == "json") {
        json j = sweep_to_json({r}).at(0);
        j["baseline_R_c"] = baseline;
        j["delta_k"] = dk;
        emit(cfg, json_text(j), s);
    } else {
        emit(cfg, sweep_to_csv({r}), s);
    }
}

// ---- sweep

void cmd_sweep(const RunConfig& cfg, Streams& s) {
    if (!cfg.sweep) throw ConfigError("sweep needs a 'sweep' block");
    const SourceContext ctx = cfg.context();
    const double baseline = normalization_baseline(baseline_context(cfg));
    std::vector<SweepRecord> all;
    for (double xi_p : cfg.sweep->xi_p) {
        auto part = sweep_xi_a(xi_p, cfg.sweep->xi_a, ctx, baseline);
        all.insert(all.end(), part.begin(), part.end());
    }
    std::size_t failed = 0;
    for (const auto& r : all) failed += r.ok ? 0 : 1;
    if (failed) s.err << "warning: " << failed << " sweep point(s) failed; see warnings column\n";
    emit(cfg, cfg.format == "json" ? json_text(sweep_to_json(all)) : sweep_to_csv(all), s);
}

// ---- invert

void require_detectors(const RunConfig& cfg) {
    if (!cfg.detectors_present) throw ConfigError("this command needs a 'detectors' block");
}

void cmd_invert(const RunConfig& cfg, Streams& s) {
    require_detectors(cfg);
    if (!cfg.measurements_path) throw ConfigError("invert needs --measurements or 'measurements'");
    const MeasurementTable table = parse_measurements(read_text_file(*cfg.measurements_path));
    if (table.layout != cfg.layout) {
        throw ConfigError("measurement file has " + to_string(table.layout) +
                          " columns but detectors.config is " + to_string(cfg.layout));
    }
    // Whole-run domain checks come first so they are not reported per row.
    if (cfg.layout == RecordLayout::Single) {
        if (!(cfg.single.eta_s * cfg.single.eta_d > 0.0)) {
            throw DomainError("cannot invert with zero efficiency eta_s * eta_d");
        }
        if (cfg.single.wires < 2) throw DomainError("single-detector inversion needs >= 2 wires");
    } else if (!(cfg.arm_a.eta_s * cfg.arm_a.eta_d > 0.0) ||
               !(cfg.arm_b.eta_s * cfg.arm_b.eta_d > 0.0)) {
        throw DomainError("cannot invert with zero arm efficiency");
    }

    if (table.rows.empty()) throw ConfigError("measurement file has no records");

    const bool single = cfg.layout == RecordLayout::Single;
    std::string csv = single ? "label,R_t,R_c,eta_c,eta_c_stderr,D_c,warnings,error\n"
                             : "label,R_a,R_b,R_c,eta_c,eta_c_stderr,eta_c_above_one,D_c,warnings,error\n";
    json arr = json::array();
    std::size_t failures = 0;
    for (const auto& row : table.rows) {
        json j = {{"row", row.index}};
        try {
            if (!row.record) throw DataQualityError(row.error);
            MeasurementRecord rec = *row.record;
            std::vector<std::string> warnings;
            if (single) {
                auto m = std::get<MeasuredRatesSingle>(rec);
                if (row.d_c_missing) {
                    m.D_c = cfg.dark_coincidence == DarkCoincidenceMode::Zero
                                ? 0.0
                                : estimated_dark_coincidences(m, cfg.single.wires);
                }
                const auto inv = invert_single(m, cfg.single.eta_s, cfg.single.eta_d, cfg.single.wires);
                warnings = inv.warnings;
                std::string se;
                if (row.has_integration) {
                    const double v = eta_c_standard_error(m, cfg.single.eta_s, cfg.single.eta_d,
                                                          cfg.single.wires);
                    se = format_double(v);
                    j["eta_c_stderr"] = v;
                }
                csv += csv_field(m.label) + ',' + format_double(inv.R_t) + ',' + format_double(inv.R_c) +
                       ',' + format_double(inv.eta_c) + ',' + se + ',' + format_double(m.D_c) + ',' +
                       csv_field(join(warnings, ';')) + ",\n";
                j.update({{"label", m.label}, {"R_t", inv.R_t}, {"R_c", inv.R_c}, {"eta_c", inv.eta_c},
                          {"D_c", m.D_c}});
            } else {
                auto m = std::get<MeasuredRatesDual>(rec);
                if (row.d_c_missing) {
                    m.D_c = cfg.dark_coincidence == DarkCoincidenceMode::Zero
                                ? 0.0
                                : estimated_dark_coincidences(m);
                }
                const auto pa = cfg.arm_a.path();
                const auto da = cfg.arm_a.detector();
                const auto pb = cfg.arm_b.path();
                const auto db = cfg.arm_b.detector();
                const auto inv = invert_dual(m, pa, da, pb, db);
                warnings = inv.warnings;
                std::string se;
                if (row.has_integration) {
                    const double v = eta_c_standard_error(m, pa, da, pb, db);
                    se = format_double(v);
                    j["eta_c_stderr"] = v;
                }
                csv += csv_field(m.label) + ',' + format_double(inv.R_a) + ',' + format_double(inv.R_b) +
                       ',' + format_double(inv.R_c) + ',' + format_double(inv.eta_c) + ',' + se + ',' +
                       (inv.eta_c_above_one ? "true" : "false") + ',' + format_double(m.D_c) + ',' +
                       csv_field(join(warnings, ';')) + ",\n";
                j.update({{"label", m.label},
                          {"R_a", inv.R_a},
                          {"R_b", inv.R_b},
                          {"R_c", inv.R_c},
                          {"eta_c", inv.eta_c},
                          {"eta_c_above_one", inv.eta_c_above_one},
                          {"D_c", m.D_c}});
            }
            j["warnings"] = warnings;
            for (const auto& w : warnings) s.err << "warning: row " << row.index << ": " << w << "\n";
        } catch (const Error& e) {
            ++failures;
            // Every column but label and error is left empty.
            const std::string blanks = single ? ",,,,,,," : ",,,,,,,,,";
            csv += csv_field(row.label) + blanks + csv_field(e.what()) + "\n";
            j["label"] = row.label;
            j["error"] = e.what();
            s.err << "error: row " << row.index << ": " << e.what() << "\n";
        }
        arr.push_back(j);
    }
    emit(cfg, cfg.format == "json" ? json_text({{"layout", to_string(cfg.layout)}, {"records", arr}})
                                   : csv,
         s);
    if (failures == table.rows.size()) throw DataQualityError("every measurement row failed");
}

// ---- simulate

mc::SimConfig simulation_config(const RunConfig& cfg) {
    if (!cfg.simulation) throw ConfigError("simulate needs a 'simulation' block");
    if (!cfg.seed) throw ConfigError("simulate needs a seed (config 'seed' or --seed)");
    require_detectors(cfg);
    const auto& sim = *cfg.simulation;
    mc::SimConfig sc;
    sc.seed = *cfg.seed;
    sc.mode = sim.mode;
    sc.trials = sim.trials;
    sc.duration_s = sim.duration_s;
    sc.pump_mw = sim.pump_mw;
    sc.window_s = sim.window_s;
    sc.dead_time_s = sim.dead_time_s;
    const bool wants_dual = sim.mode == mc::SimMode::TimestreamDual;
    if (wants_dual != (cfg.layout == RecordLayout::Dual) &&
        sim.mode != mc::SimMode::PairTrials && sim.mode != mc::SimMode::SingleTrials) {
        throw ConfigError("simulation mode " + mc::to_string(sim.mode) +
                          " does not match detectors.config " + to_string(cfg.layout));
    }
    if (cfg.layout == RecordLayout::Single) {
        sc.arm_a = cfg.single.arm();
        sc.arm_b = cfg.single.arm();
    } else {
        sc.arm_a = cfg.arm_a.arm();
        sc.arm_b = cfg.arm_b.arm();
    }
    EmissionRates rates;
    if (sim.rates_per_mw) {
        rates = *sim.rates_per_mw;
    } else {
        const SourceContext ctx = cfg.context();
        rates = emission_rates(ctx.crystal, ctx.waves, cfg.focus_point(ctx.waves), ctx.delta_k_value());
    }
    sc.R_a = rates.R_a;
    sc.R_b = rates.R_b;
    sc.R_c = rates.R_c;
    sc.validate();
    return sc;
}

void cmd_simulate(const RunConfig& cfg, Streams& s) {
    const mc::SimConfig sc = simulation_config(cfg);
    const mc::SimOutcome outcome = mc::simulate(sc);
    for (const auto& w : outcome.warnings) s.err << "warning: " << w << "\n";

    json truth = {{"R_a_per_mw", sc.R_a},
                  {"R_b_per_mw", sc.R_b},
                  {"R_c_per_mw", sc.R_c},
                  {"pump_mw", sc.pump_mw}};
    const auto eta = eta_c_from_rates({sc.R_a, sc.R_b, sc.R_c, sc.R_a + sc.R_b});
    truth["eta_c"] = eta.value;

    std::string text;
    const bool trial_mode = sc.mode == mc::SimMode::PairTrials || sc.mode == mc::SimMode::SingleTrials;
    if (trial_mode) {
        if (cfg.format == "json") {
            text = json_text(mc::sim_outcome_to_json(outcome));
        } else {
            text = "events,count,probability,std_error\n";
            for (int k = 0; k < 3; ++k) {
                const auto p = outcome.probability(k);
                text += std::to_string(k) + ',' + std::to_string(outcome.events[k]) + ',' +
                        format_double(p.value) + ',' + format_double(p.std_error) + '\n';
            }
        }
    } else {
        const auto record = mc::estimate_rates(outcome, sc);
        const double accidental = outcome.accidental_rate().value;
        const double true_rate = outcome.true_coincidence_rate().value;
        const bool single = sc.mode == mc::SimMode::TimestreamSingle;
        if (cfg.format == "json") {
            json rec = {{"integration_s", outcome.duration_s},
                        {"accidental_cps", accidental},
                        {"true_coincidence_cps", true_rate}};
            std::visit(
                [&](const auto& m) {
                    rec["label"] = m.label;
                    rec["R_c"] = m.R_c;
                    rec["D_c"] = m.D_c;
                    rec["dt_s"] = m.window_s;
                },
                record);
            if (single) {
                const auto& m = std::get<MeasuredRatesSingle>(record);
                rec["R_t"] = m.R_t;
                rec["D"] = m.D;
            } else {
                const auto& m = std::get<MeasuredRatesDual>(record);
                rec.update({{"R_a", m.R_a}, {"R_b", m.R_b}, {"D_a", m.D_a}, {"D_b", m.D_b}});
            }
            text = json_text({{"layout", single ? "single" : "dual"}, {"records", json::array({rec})}});
        } else {
            text = measurement_csv_header(single ? RecordLayout::Single : RecordLayout::Dual) +
                   ",accidental_cps,true_coincidence_cps\n" + measurement_csv_row(record) + ',' +
                   format_double(accidental) + ',' + format_double(true_rate) + '\n';
        }
        // Expected accidentals from dark counts meeting detected photons.
        double expected_acc = 0.0;
        if (single) {
            const auto& m = std::get<MeasuredRatesSingle>(record);
            expected_acc = estimated_dark_coincidences(m, sc.arm_a.wire_count);
        } else {
            const auto& m = std::get<MeasuredRatesDual>(record);
            expected_acc = estimated_dark_coincidences(m);
        }
        truth["expected_dark_coincidence_cps"] = expected_acc;
        try {
            if (single) {
                const auto& m = std::get<MeasuredRatesSingle>(record);
                truth["eta_c_estimate"] =
                    invert_single(m, sc.arm_a.eta_s, sc.arm_a.eta_d, sc.arm_a.wire_count).eta_c;
            } else {
                const auto& m = std::get<MeasuredRatesDual>(record);
                truth["eta_c_estimate"] =
                    invert_dual(m, cfg.arm_a.path(), cfg.arm_a.detector(), cfg.arm_b.path(),
                                cfg.arm_b.detector())
                        .eta_c;
            }
            truth["eta_c_stderr"] = mc::eta_c_standard_error(outcome, sc);
        } catch (const Error& e) {
            truth["eta_c_estimate_error"] = e.what();
        }
    }

    emit(cfg, text, s);
    if (cfg.out_path) {
        const json sidecar = {{"config", mc::sim_config_to_json(sc)},
                              {"outcome", mc::sim_outcome_to_json(outcome)},
                              {"truth", truth}};
        write_text_file(*cfg.out_path + ".truth.json", json_text(sidecar));
    } else {
        s.err << "note: no output path, ground-truth sidecar not written\n";
    }
}

// ---- fit-deff

void cmd_fit_deff(const RunConfig& cfg, Streams& s) {
    if (!cfg.measurements_path) throw ConfigError("fit-deff needs --measurements or 'measurements'");
    const auto records = parse_fit_records(read_text_file(*cfg.measurements_path));
    const SourceContext ctx = cfg.context();
    const DeffFit fit = fit_deff(records, ctx);
    const double pm = fit.d_eff_m_per_v * 1e12;
    if (cfg.format == "json") {
        emit(cfg,
             json_text({{"d_eff_pm_per_V", pm},
                        {"d_eff_m_per_V", fit.d_eff_m_per_v},
                        {"records", fit.records_used},
                        {"rms_relative_residual", fit.rms_relative_residual}}),
             s);
    } else {
        emit(cfg,
             "d_eff_pm_per_V,d_eff_m_per_V,records,rms_relative_residual\n" + format_double(pm) + ',' +
                 format_double(fit.d_eff_m_per_v) + ',' + std::to_string(fit.records_used) + ',' +
                 format_double(fit.rms_relative_residual) + '\n',
             s);
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SPDC source model: dispersion, emission rates, detection statistics"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub, bool needs_measurements) {
        sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
        sub->add_option("--xi-p", opt.xi_p, "override the pump focal parameter");
        sub->add_option("--seed", opt.seed, "override the simulation seed");
        sub->add_option("--out", opt.out, "output path (default: standard output)");
        sub->add_option("--format", opt.format, "csv or json");
        if (needs_measurements) {
            sub->add_option("--measurements", opt.measurements, "measurement record file");
        }
    };
    struct Command {
        const char* name;
        const char* help;
        bool measurements;
        void (*run)(const RunConfig&, Streams&);
    };
    const Command commands[] = {
        {"index", "refractive and group indices", false, cmd_index},
        {"rates", "emission rates and eta_c at one focus point", false, cmd_rates},
        {"sweep", "rates over a grid of collection focal parameters", false, cmd_sweep},
        {"invert", "intrinsic rates and eta_c from measured detection rates", true, cmd_invert},
        {"simulate", "Monte Carlo measurement records with a ground-truth sidecar", false,
         cmd_simulate},
        {"fit-deff", "fit the effective nonlinearity to measured intrinsic rates", true,
         cmd_fit_deff},
    };
    for (const auto& c : commands) add_common(app.add_subcommand(c.name, c.help), c.measurements);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    Streams streams{out, err};
    try {
        for (const auto& c : commands) {
            if (app.got_subcommand(c.name)) {
                c.run(load(opt), streams);
                break;
            }
        }
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace spdc
