#include "spdc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kWaistTolerance = 1e-9;
constexpr double kDegenerateGroupIndex = 1e-12;

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw DomainError(std::string(what) + " must be > 0");
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

void FocusConfig::validate() const {
    require_positive(xi_p, "xi_p");
    require_positive(xi_a, "xi_a");
    require_positive(xi_b, "xi_b");
}

void FocusConfig::validate(double length_m, const WaveTriple& waves) const {
    validate();
    auto check = [&](const std::optional<double>& w, double k, double xi, const char* label) {
        if (!w) return;
        const double expected = focal_parameter(length_m, k, *w);
        if (std::abs(expected - xi) > kWaistTolerance * xi) {
            throw DomainError(std::string("focal parameter ") + label +
                              " is inconsistent with its waist");
        }
    };
    check(w_p, waves.k_p, xi_p, "xi_p");
    check(w_a, waves.k_a, xi_a, "xi_a");
    check(w_b, waves.k_b, xi_b, "xi_b");
}

double focal_parameter(double length_m, double k, double waist_m) {
    require_positive(length_m, "crystal length");
    require_positive(k, "wavenumber");
    require_positive(waist_m, "waist");
    return length_m / (k * waist_m * waist_m);
}

double waist_from_focal_parameter(double length_m, double k, double xi) {
    require_positive(length_m, "crystal length");
    require_positive(k, "wavenumber");
    require_positive(xi, "focal parameter");
    return std::sqrt(length_m / (k * xi));
}

double derive_xi_b(double xi_a, double k_a, double k_b) {
    require_positive(xi_a, "xi_a");
    require_positive(k_a, "k_a");
    require_positive(k_b, "k_b");
    return xi_a * k_a / k_b;
}

FocusConfig tied_focus(double xi_p, double xi_a, const WaveTriple& waves) {
    FocusConfig f;
    f.xi_p = xi_p;
    f.xi_a = xi_a;
    f.xi_b = derive_xi_b(xi_a, waves.k_a, waves.k_b);
    return f;
}

FocusConfig focus_from_waists(double length_m, const WaveTriple& waves, double w_p, double w_c) {
    FocusConfig f;
    f.xi_p = focal_parameter(length_m, waves.k_p, w_p);
    f.xi_a = focal_parameter(length_m, waves.k_a, w_c);
    f.xi_b = focal_parameter(length_m, waves.k_b, w_c);
    f.w_p = w_p;
    f.w_a = w_c;
    f.w_b = w_c;
    return f;
}

ABCoefficients ab_coefficients(const WaveTriple& waves, double delta_k, const FocusConfig& focus) {
    focus.validate();
    const double kp = waves.k_p;
    const double ka = waves.k_a;
    const double kb = waves.k_b;
    if (!(delta_k < kp)) throw DomainError("phase mismatch must satisfy dk < k_p");

    const double ra = focus.xi_a / focus.xi_p;  // ξ_a/ξ_p
    const double rb = focus.xi_b / focus.xi_p;

    ABCoefficients c;
    c.A_a = 2.0 * std::sqrt((1.0 + (ka / kp) * ra) * (kb / kp));
    c.A_b = 2.0 * std::sqrt((1.0 + (kb / kp) * rb) * (ka / kp));
    c.A_plus = 1.0 + (ka / kp) * ra + (kb / kp) * rb;

    // The B forms shift every wavenumber by Δk; note B_+ uses the inverse
    // ratios ξ_p/ξ_a and ξ_p/ξ_b.
    const double shrink = 1.0 - delta_k / kp;
    const double denom = kp - delta_k;
    const double qa = (ka + delta_k) / denom;
    const double qb = (kb + delta_k) / denom;
    if (!(qa > 0.0) || !(qb > 0.0)) {
        throw DomainError("phase mismatch too large: k + dk must stay positive");
    }
    c.B_a = 2.0 * shrink * std::sqrt((1.0 + qa * ra) * qb);
    c.B_b = 2.0 * shrink * std::sqrt((1.0 + qb * rb) * qa);
    c.B_plus = shrink * (1.0 + qa / ra + qb / rb);
    return c;
}

double resolve_delta_k(const CrystalSpec& crystal, const WaveTriple& waves, DeltaKChoice choice) {
    switch (choice.kind) {
        case DeltaKChoice::Kind::Bare: return phase_mismatch(crystal, waves).bare;
        case DeltaKChoice::Kind::Residual: return phase_mismatch(crystal, waves).residual;
        case DeltaKChoice::Kind::Value: return choice.value;
    }
    return 0.0;
}

double rate_prefactor(const CrystalSpec& crystal, const WaveTriple& waves) {
    const double dng = std::abs(waves.ng_a - waves.ng_b);
    if (dng < kDegenerateGroupIndex) {
        throw DomainError("degenerate group indices (|n'_a - n'_b| < 1e-12): rate prefactor diverges");
    }
    const double pi = constants::kPi;
    const double d_ratio = crystal.d_eff_m_per_v / (waves.lambda_a * waves.lambda_b);
    const double per_watt = 128.0 * pi * pi * waves.lambda_p /
                            (constants::kVacuumPermittivity * waves.n_p * waves.n_p * dng);
    return per_watt * constants::kWattsPerMilliwatt * d_ratio * d_ratio;
}

EmissionRates emission_rates(const CrystalSpec& crystal, const WaveTriple& waves,
                             const FocusConfig& focus, double delta_k) {
    const auto c = ab_coefficients(waves, delta_k, focus);
    const double pre = rate_prefactor(crystal, waves);
    EmissionRates r;
    r.R_a = pre * std::atan(c.B_a / c.A_a * focus.xi_a) / (c.A_a * c.B_a);
    r.R_b = pre * std::atan(c.B_b / c.A_b * focus.xi_b) / (c.A_b * c.B_b);
    r.R_c = pre * std::atan(c.B_plus / c.A_plus * focus.xi_a * focus.xi_b / focus.xi_p) /
            (c.A_plus * c.B_plus);
    r.R_t = r.R_a + r.R_b;
    return r;
}

EmissionRates emission_rates(const CrystalSpec& crystal, const WaveTriple& waves,
                             const FocusConfig& focus, DeltaKChoice choice) {
    return emission_rates(crystal, waves, focus, resolve_delta_k(crystal, waves, choice));
}

CouplingEfficiency eta_c_from_rates(const EmissionRates& rates) {
    CouplingEfficiency e;
    const double denom = rates.R_a * rates.R_b;
    if (!(denom > 0.0)) {
        e.zero_emission = true;
        return e;
    }
    e.value = rates.R_c / std::sqrt(denom);
    e.at_bound = std::abs(e.value - 1.0) <= 1e-12;
    return e;
}

ModeCouplingProbabilities ModeCouplingProbabilities::from_exclusive(double p_pair, double p_a_only,
                                                                    double p_b_only) {
    ModeCouplingProbabilities p;
    p.P_p = p_pair;
    p.P_a_only = p_a_only;
    p.P_b_only = p_b_only;
    p.P_a = p_a_only + p_pair;
    p.P_b = p_b_only + p_pair;
    return p;
}

ModeCouplingProbabilities ModeCouplingProbabilities::from_totals(double p_pair, double p_a, double p_b) {
    ModeCouplingProbabilities p;
    p.P_p = p_pair;
    p.P_a = p_a;
    p.P_b = p_b;
    p.P_a_only = p_a - p_pair;
    p.P_b_only = p_b - p_pair;
    return p;
}

CouplingEfficiency eta_c_from_probabilities(const ModeCouplingProbabilities& p) {
    check_probability(p.P_p, "P_p");
    check_probability(p.P_a, "P_a");
    check_probability(p.P_b, "P_b");
    CouplingEfficiency e;
    const double denom = p.P_a * p.P_b;
    if (denom == 0.0) {
        if (p.P_p > 0.0) {
            throw DomainError("inconsistent probabilities: P_p > 0 while P_a * P_b = 0");
        }
        e.zero_emission = true;
        return e;
    }
    e.value = p.P_p / std::sqrt(denom);
    if (e.value > 1.0 + 1e-12) {
        throw DomainError("inconsistent probabilities: P_p exceeds sqrt(P_a * P_b)");
    }
    e.at_bound = std::abs(e.value - 1.0) <= 1e-12;
    return e;
}

double eta_c_closed_form(const WaveTriple& waves, double delta_k, const FocusConfig& focus) {
    const auto c = ab_coefficients(waves, delta_k, focus);
    const double pair = std::atan(c.B_plus / c.A_plus * focus.xi_a * focus.xi_b / focus.xi_p);
    const double single_a = std::atan(c.B_a / c.A_a * focus.xi_a);
    const double single_b = std::atan(c.B_b / c.A_b * focus.xi_b);
    return std::sqrt(c.A_a * c.B_a * c.A_b * c.B_b) * pair /
           (c.A_plus * c.B_plus * std::sqrt(single_a * single_b));
}

HeraldingEfficiencies heralding_efficiencies(const ModeCouplingProbabilities& p,
                                             double eta_avail_a, double eta_avail_b) {
    check_probability(eta_avail_a, "availability efficiency (a)");
    check_probability(eta_avail_b, "availability efficiency (b)");
    check_probability(p.P_p, "P_p");
    if (!(p.P_a > 0.0) || !(p.P_b > 0.0)) {
        throw DomainError("heralding efficiency undefined: P_a and P_b must be > 0");
    }
    HeraldingEfficiencies h;
    h.herald_a = p.P_p / p.P_b * eta_avail_a;
    h.herald_b = p.P_p / p.P_a * eta_avail_b;
    h.herald_sym = std::sqrt(h.herald_a * h.herald_b);
    return h;
}

std::vector<std::string> validity_check(const CrystalSpec& crystal, const WaveTriple& waves,
                                        double delta_k, const FocusConfig& focus) {
    std::vector<std::string> warnings;
    if (crystal.length_m < kMinCrystalLength) {
        warnings.push_back("short crystal: L = " + fmt(crystal.length_m * 1e3) +
                           " mm < 1 mm; rate formulas assume the crystal is not very short");
    }
    const double k_min = std::min({waves.k_p, waves.k_a, waves.k_b});
    if (std::abs(delta_k) > kMaxRelativeMismatch * k_min) {
        warnings.push_back("large phase mismatch: |dk| = " + fmt(std::abs(delta_k)) +
                           " rad/m exceeds 5% of min(k)");
    }
    const std::pair<const char*, double> xis[] = {
        {"xi_p", focus.xi_p}, {"xi_a", focus.xi_a}, {"xi_b", focus.xi_b}};
    for (const auto& [name, xi] : xis) {
        if (xi > kMaxFocalParameter) {
            warnings.push_back(std::string("tight focus: ") + name + " = " + fmt(xi) +
                               " > 10; focusing must not be extremely tight");
        }
    }
    return warnings;
}

}  // namespace spdc
