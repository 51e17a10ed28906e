#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace spdc {

enum class Axis { X, Y, Z };

std::string_view to_string(Axis axis);
Axis axis_from_string(std::string_view label);

// Functional forms understood by SellmeierModel. Wavelength inside every
// form is in micrometres.
//
//   Constant        n = c0
//   Quadratic       n = c0 + c1 λ²
//   PoleIr          n² = c0 + Σ_i c(2i-1) / (1 − c(2i)/λ²) + c_last λ²
//                   (even number of coefficients, last one is the IR term)
//   Standard        n² = 1 + Σ_i c(2i) λ² / (λ² − c(2i+1))
enum class SellmeierForm { Constant, Quadratic, PoleIr, Standard };

std::string_view to_string(SellmeierForm form);
SellmeierForm sellmeier_form_from_string(std::string_view id);

struct WavelengthRange {
    double min_m = 0.0;
    double max_m = 0.0;

    bool contains(double lambda_m) const { return lambda_m >= min_m && lambda_m <= max_m; }
};

// Dispersion model for one crystal axis.
class SellmeierModel {
public:
    SellmeierModel(std::string name, Axis axis, SellmeierForm form,
                   std::vector<double> coefficients, WavelengthRange range);

    const std::string& name() const { return name_; }
    Axis axis() const { return axis_; }
    SellmeierForm form() const { return form_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const WavelengthRange& range() const { return range_; }

    // Raw evaluation without the range check.
    double evaluate(double lambda_m) const;

private:
    std::string name_;
    Axis axis_;
    SellmeierForm form_;
    std::vector<double> coefficients_;
    WavelengthRange range_;
};

// Built-in KTP models: z axis (Fradkin et al. 1999) and y axis
// (König & Wong 2004).
SellmeierModel ktp_z_fradkin1999();
SellmeierModel ktp_y_konig2004();
// Dispersionless test model.
SellmeierModel constant_model(double n, Axis axis = Axis::Y);

// Looks up a built-in model by name ("ktp_z_fradkin1999", "ktp_y_konig2004").
SellmeierModel builtin_model(std::string_view name);
std::vector<std::string> builtin_model_names();

// {"form": ..., "axis": "Y", "coefficients": [...], "range_m": [min, max]}
SellmeierModel sellmeier_from_json(const nlohmann::json& doc);
nlohmann::json sellmeier_to_json(const SellmeierModel& model);

// One model per principal axis; lookups of an absent axis throw ConfigError.
class AxisModels {
public:
    AxisModels() = default;

    void set(SellmeierModel model);
    bool has(Axis axis) const;
    const SellmeierModel& at(Axis axis) const;

    static AxisModels ktp();

private:
    std::array<std::optional<SellmeierModel>, 3> models_;
};

struct CrystalSpec {
    double length_m = 0.0;
    double poling_period_m = 0.0;
    double d_eff_m_per_v = 0.0;
    Axis pump_axis = Axis::Y;
    Axis a_axis = Axis::Z;
    Axis b_axis = Axis::Y;
    std::string temperature_note;

    // Throws DomainError on a non-physical spec. d_eff = 0 is accepted so
    // that rate scaling can be probed at the origin.
    void validate() const;
};

// 1 cm PPKTP, 46.1 µm poling, type-II y → z + y, d_eff = 1.82 pm/V.
CrystalSpec reference_crystal();

// Wavelengths plus the derived indices, wavenumbers and group indices.
struct WaveTriple {
    double lambda_p = 0.0, lambda_a = 0.0, lambda_b = 0.0;  // m, vacuum
    double n_p = 0.0, n_a = 0.0, n_b = 0.0;
    double k_p = 0.0, k_a = 0.0, k_b = 0.0;                 // rad/m
    double ng_a = 0.0, ng_b = 0.0;                          // group indices
};

// λ_b is fixed by energy conservation when not given; a supplied λ_b must
// satisfy 1/λ_p = 1/λ_a + 1/λ_b to 1e-9 relative.
WaveTriple make_wave_triple(const CrystalSpec& crystal, const AxisModels& models,
                            double lambda_p, double lambda_a,
                            std::optional<double> lambda_b = std::nullopt);

// Degenerate 780 → 1560 + 1560 nm triple for the given crystal.
WaveTriple reference_waves(const CrystalSpec& crystal, const AxisModels& models);

inline constexpr double kGroupIndexRelativeStep = 1e-5;

double refractive_index(const SellmeierModel& model, double lambda_m);

// n′ = n − λ dn/dλ by central difference with relative step `rel_step`.
double group_index(const SellmeierModel& model, double lambda_m,
                   double rel_step = kGroupIndexRelativeStep);

double wavenumber(const SellmeierModel& model, double lambda_m);

struct PhaseMismatch {
    double bare = 0.0;      // k_p − k_a − k_b
    double grating = 0.0;   // 2π/Λ
    // Mismatch left after the grating order that opposes `bare`:
    // bare − sign(bare)·2π/Λ.
    double residual = 0.0;
};

PhaseMismatch phase_mismatch(const CrystalSpec& crystal, const WaveTriple& waves);

}  // namespace spdc
