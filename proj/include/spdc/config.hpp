#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdc/detector.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/records.hpp"
#include "spdc/sweep.hpp"

// One JSON document per CLI run. See docs/config-schema.md.
namespace spdc {

struct FocusSettings {
    std::optional<double> xi_p, xi_a, xi_b;
    std::optional<double> w_p_m, w_a_m;  // alternative to xi_p / xi_a
};

struct SweepSettings {
    std::vector<double> xi_p;
    std::vector<double> xi_a;
};

struct ArmSettings {
    double eta_s = 1.0;
    double eta_d = 1.0;
    double dark_cps = 0.0;
    int wires = 4;
    std::vector<double> wire_efficiencies;

    OpticalPath path() const { return {eta_s, ""}; }
    DetectorSpec detector() const { return {eta_d, dark_cps, wires, ""}; }
    mc::ArmConfig arm() const;
};

enum class DarkCoincidenceMode { Estimate, Zero };

struct SimulationSettings {
    mc::SimMode mode = mc::SimMode::TimestreamDual;
    std::uint64_t trials = 1'000'000;
    double duration_s = 1.0;
    double pump_mw = 1.0;
    double window_s = 1e-9;
    double dead_time_s = 0.0;
    // Intrinsic rates per mW; computed from the focus point when absent.
    std::optional<EmissionRates> rates_per_mw;
};

struct RunConfig {
    CrystalSpec crystal = reference_crystal();
    AxisModels models = AxisModels::ktp();
    double pump_m = 780e-9;
    double a_m = 1560e-9;
    std::optional<double> b_m;
    DeltaKChoice delta_k = DeltaKChoice::bare();

    std::optional<FocusSettings> focus;
    std::optional<SweepSettings> sweep;
    std::vector<double> index_wavelengths_m;

    RecordLayout layout = RecordLayout::Dual;
    ArmSettings single, arm_a, arm_b;
    bool detectors_present = false;
    DarkCoincidenceMode dark_coincidence = DarkCoincidenceMode::Estimate;

    std::optional<SimulationSettings> simulation;
    std::optional<std::string> measurements_path;

    std::string format = "csv";
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;

    SourceContext context() const;
    // Focal parameters of the configured single point; ConfigError when the
    // focus block is missing or incomplete.
    FocusConfig focus_point(const WaveTriple& waves) const;
};

// Throws ConfigError for schema violations and DomainError for values out
// of their physical range.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

}  // namespace spdc
