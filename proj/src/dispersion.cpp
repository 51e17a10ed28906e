#include "spdc/dispersion.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kMicronsPerMetre = 1e6;

std::string format_wavelength(double lambda_m) {
    std::ostringstream os;
    os.precision(6);
    os << lambda_m * 1e9 << " nm";
    return os.str();
}

void check_coefficient_count(SellmeierForm form, std::size_t count) {
    bool ok = false;
    switch (form) {
        case SellmeierForm::Constant: ok = count == 1; break;
        case SellmeierForm::Quadratic: ok = count == 2; break;
        case SellmeierForm::PoleIr: ok = count >= 2 && count % 2 == 0; break;
        case SellmeierForm::Standard: ok = count >= 2 && count % 2 == 0; break;
    }
    if (!ok) {
        throw ConfigError("Sellmeier form '" + std::string(to_string(form)) +
                          "' cannot take " + std::to_string(count) + " coefficients");
    }
}

}  // namespace

std::string_view to_string(Axis axis) {
    switch (axis) {
        case Axis::X: return "X";
        case Axis::Y: return "Y";
        case Axis::Z: return "Z";
    }
    return "?";
}

Axis axis_from_string(std::string_view label) {
    if (label == "X" || label == "x") return Axis::X;
    if (label == "Y" || label == "y") return Axis::Y;
    if (label == "Z" || label == "z") return Axis::Z;
    throw ConfigError("unknown crystal axis '" + std::string(label) + "'");
}

std::string_view to_string(SellmeierForm form) {
    switch (form) {
        case SellmeierForm::Constant: return "constant";
        case SellmeierForm::Quadratic: return "quadratic";
        case SellmeierForm::PoleIr: return "pole_ir";
        case SellmeierForm::Standard: return "sellmeier";
    }
    return "?";
}

SellmeierForm sellmeier_form_from_string(std::string_view id) {
    if (id == "constant") return SellmeierForm::Constant;
    if (id == "quadratic") return SellmeierForm::Quadratic;
    if (id == "pole_ir") return SellmeierForm::PoleIr;
    if (id == "sellmeier") return SellmeierForm::Standard;
    throw ConfigError("unknown Sellmeier form '" + std::string(id) + "'");
}

SellmeierModel::SellmeierModel(std::string name, Axis axis, SellmeierForm form,
                               std::vector<double> coefficients, WavelengthRange range)
    : name_(std::move(name)),
      axis_(axis),
      form_(form),
      coefficients_(std::move(coefficients)),
      range_(range) {
    check_coefficient_count(form_, coefficients_.size());
    if (!(range_.min_m > 0.0) || !(range_.max_m > range_.min_m)) {
        throw ConfigError("Sellmeier model '" + name_ + "' has an invalid wavelength range");
    }
}

double SellmeierModel::evaluate(double lambda_m) const {
    const double l = lambda_m * kMicronsPerMetre;
    const double l2 = l * l;
    const auto& c = coefficients_;
    switch (form_) {
        case SellmeierForm::Constant:
            return c[0];
        case SellmeierForm::Quadratic:
            return c[0] + c[1] * l2;
        case SellmeierForm::PoleIr: {
            double n2 = c[0] + c.back() * l2;
            for (std::size_t i = 1; i + 1 < c.size(); i += 2) {
                n2 += c[i] / (1.0 - c[i + 1] / l2);
            }
            return std::sqrt(n2);
        }
        case SellmeierForm::Standard: {
            double n2 = 1.0;
            for (std::size_t i = 0; i + 1 < c.size(); i += 2) {
                n2 += c[i] * l2 / (l2 - c[i + 1]);
            }
            return std::sqrt(n2);
        }
    }
    return std::nan("");
}

SellmeierModel ktp_z_fradkin1999() {
    return SellmeierModel("ktp_z_fradkin1999", Axis::Z, SellmeierForm::PoleIr,
                          {2.12725, 1.18431, 5.14852e-2, 0.6603, 100.00507, -9.68956e-3},
                          {0.40e-6, 4.0e-6});
}

SellmeierModel ktp_y_konig2004() {
    return SellmeierModel("ktp_y_konig2004", Axis::Y, SellmeierForm::PoleIr,
                          {2.09930, 0.922683, 4.67695e-2, -1.38408e-2},
                          {0.40e-6, 3.5e-6});
}

SellmeierModel constant_model(double n, Axis axis) {
    return SellmeierModel("constant", axis, SellmeierForm::Constant, {n}, {1e-9, 1.0});
}

SellmeierModel builtin_model(std::string_view name) {
    if (name == "ktp_z_fradkin1999") return ktp_z_fradkin1999();
    if (name == "ktp_y_konig2004") return ktp_y_konig2004();
    throw ConfigError("unknown built-in Sellmeier model '" + std::string(name) + "'");
}

std::vector<std::string> builtin_model_names() {
    return {"ktp_y_konig2004", "ktp_z_fradkin1999"};
}

SellmeierModel sellmeier_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("Sellmeier model must be a JSON object");
    for (const char* key : {"form", "axis", "coefficients", "range_m"}) {
        if (!doc.contains(key)) {
            throw ConfigError(std::string("Sellmeier model is missing '") + key + "'");
        }
    }
    try {
        const auto form = sellmeier_form_from_string(doc.at("form").get<std::string>());
        const auto axis = axis_from_string(doc.at("axis").get<std::string>());
        auto coefficients = doc.at("coefficients").get<std::vector<double>>();
        const auto range = doc.at("range_m").get<std::vector<double>>();
        if (range.size() != 2) throw ConfigError("Sellmeier 'range_m' must be [min, max]");
        const std::string name = doc.value("name", std::string("user"));
        return SellmeierModel(name, axis, form, std::move(coefficients), {range[0], range[1]});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed Sellmeier model: ") + e.what());
    }
}

nlohmann::json sellmeier_to_json(const SellmeierModel& model) {
    return {{"name", model.name()},
            {"form", std::string(to_string(model.form()))},
            {"axis", std::string(to_string(model.axis()))},
            {"coefficients", model.coefficients()},
            {"range_m", {model.range().min_m, model.range().max_m}}};
}

void AxisModels::set(SellmeierModel model) {
    const auto idx = static_cast<std::size_t>(model.axis());
    models_[idx] = std::move(model);
}

bool AxisModels::has(Axis axis) const {
    return models_[static_cast<std::size_t>(axis)].has_value();
}

const SellmeierModel& AxisModels::at(Axis axis) const {
    const auto& slot = models_[static_cast<std::size_t>(axis)];
    if (!slot) {
        throw ConfigError("no Sellmeier model configured for axis " + std::string(to_string(axis)));
    }
    return *slot;
}

AxisModels AxisModels::ktp() {
    AxisModels m;
    m.set(ktp_y_konig2004());
    m.set(ktp_z_fradkin1999());
    return m;
}

void CrystalSpec::validate() const {
    if (!(length_m > 0.0)) throw DomainError("crystal length must be > 0");
    if (!(poling_period_m > 0.0)) throw DomainError("poling period must be > 0");
    if (!(d_eff_m_per_v >= 0.0)) throw DomainError("d_eff must be >= 0");
    if (a_axis == b_axis) {
        throw DomainError("type-II crystal needs orthogonal a and b axes");
    }
}

CrystalSpec reference_crystal() {
    CrystalSpec c;
    c.length_m = 10e-3;
    c.poling_period_m = 46.1e-6;
    c.d_eff_m_per_v = 1.82e-12;
    c.pump_axis = Axis::Y;
    c.a_axis = Axis::Z;
    c.b_axis = Axis::Y;
    c.temperature_note = "room temperature, no thermal model";
    return c;
}

double refractive_index(const SellmeierModel& model, double lambda_m) {
    if (!model.range().contains(lambda_m)) {
        throw RangeError("wavelength " + format_wavelength(lambda_m) +
                         " is outside the valid range of model '" + model.name() + "'");
    }
    return model.evaluate(lambda_m);
}

double group_index(const SellmeierModel& model, double lambda_m, double rel_step) {
    const double h = lambda_m * rel_step;
    const double lo = lambda_m - h;
    const double hi = lambda_m + h;
    if (!model.range().contains(lo) || !model.range().contains(hi)) {
        throw RangeError("wavelength " + format_wavelength(lambda_m) +
                         " is too close to the range boundary of model '" + model.name() +
                         "' for differentiation");
    }
    const double dn_dl = (model.evaluate(hi) - model.evaluate(lo)) / (2.0 * h);
    return model.evaluate(lambda_m) - lambda_m * dn_dl;
}

double wavenumber(const SellmeierModel& model, double lambda_m) {
    return 2.0 * constants::kPi * refractive_index(model, lambda_m) / lambda_m;
}

WaveTriple make_wave_triple(const CrystalSpec& crystal, const AxisModels& models,
                            double lambda_p, double lambda_a, std::optional<double> lambda_b) {
    if (!(lambda_p > 0.0) || !(lambda_a > 0.0)) throw DomainError("wavelengths must be > 0");
    if (!(lambda_a > lambda_p)) throw DomainError("signal wavelength must exceed the pump wavelength");
    const double inv_b = 1.0 / lambda_p - 1.0 / lambda_a;
    if (lambda_b) {
        const double lhs = 1.0 / lambda_p;
        const double rhs = 1.0 / lambda_a + 1.0 / *lambda_b;
        if (std::abs(lhs - rhs) > 1e-9 * lhs) {
            throw DomainError("wavelengths violate energy conservation 1/λp = 1/λa + 1/λb");
        }
    }
    WaveTriple w;
    w.lambda_p = lambda_p;
    w.lambda_a = lambda_a;
    w.lambda_b = lambda_b.value_or(1.0 / inv_b);

    const auto& mp = models.at(crystal.pump_axis);
    const auto& ma = models.at(crystal.a_axis);
    const auto& mb = models.at(crystal.b_axis);
    w.n_p = refractive_index(mp, w.lambda_p);
    w.n_a = refractive_index(ma, w.lambda_a);
    w.n_b = refractive_index(mb, w.lambda_b);
    const double two_pi = 2.0 * constants::kPi;
    w.k_p = two_pi * w.n_p / w.lambda_p;
    w.k_a = two_pi * w.n_a / w.lambda_a;
    w.k_b = two_pi * w.n_b / w.lambda_b;
    w.ng_a = group_index(ma, w.lambda_a);
    w.ng_b = group_index(mb, w.lambda_b);
    return w;
}

WaveTriple reference_waves(const CrystalSpec& crystal, const AxisModels& models) {
    return make_wave_triple(crystal, models, 780e-9, 1560e-9);
}

PhaseMismatch phase_mismatch(const CrystalSpec& crystal, const WaveTriple& waves) {
    PhaseMismatch m;
    m.bare = waves.k_p - waves.k_a - waves.k_b;
    m.grating = 2.0 * constants::kPi / crystal.poling_period_m;
    const double sign = m.bare < 0.0 ? -1.0 : 1.0;
    m.residual = m.bare - sign * m.grating;
    return m;
}

}  // namespace spdc
