#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc {

// Gaussian interaction geometry, expressed through focal parameters
// ξ = L / (k w²). Waists are optional companions; when present they must
// agree with the focal parameters (see validate()).
struct FocusConfig {
    double xi_p = 0.0;
    double xi_a = 0.0;
    double xi_b = 0.0;
    std::optional<double> w_p, w_a, w_b;  // m, at crystal centre

    void validate() const;
    // Checks ξ ↔ w consistency (1e-9 relative) for whichever waists are set.
    void validate(double length_m, const WaveTriple& waves) const;
};

double focal_parameter(double length_m, double k, double waist_m);
double waist_from_focal_parameter(double length_m, double k, double xi);

// Shared collection optics: one waist for both photons, so
// ξ_b = ξ_a · k_a / k_b.
double derive_xi_b(double xi_a, double k_a, double k_b);

// Focus with ξ_b tied to ξ_a through the shared-optics rule.
FocusConfig tied_focus(double xi_p, double xi_a, const WaveTriple& waves);

// Focus built from waists; the collection modes share `w_c`.
FocusConfig focus_from_waists(double length_m, const WaveTriple& waves, double w_p, double w_c);

struct ABCoefficients {
    double A_a = 0.0, A_b = 0.0, A_plus = 0.0;
    double B_a = 0.0, B_b = 0.0, B_plus = 0.0;
};

// Raises DomainError when Δk ≥ k_p.
ABCoefficients ab_coefficients(const WaveTriple& waves, double delta_k, const FocusConfig& focus);

// Source-intrinsic rates in counts·s⁻¹·mW⁻¹.
struct EmissionRates {
    double R_a = 0.0;
    double R_b = 0.0;
    double R_c = 0.0;
    double R_t = 0.0;
};

// Which Δk enters the B coefficients.
struct DeltaKChoice {
    enum class Kind { Bare, Residual, Value };
    Kind kind = Kind::Bare;
    double value = 0.0;  // used for Kind::Value

    static DeltaKChoice bare() { return {}; }
    static DeltaKChoice residual() { return {Kind::Residual, 0.0}; }
    static DeltaKChoice fixed(double dk) { return {Kind::Value, dk}; }
};

double resolve_delta_k(const CrystalSpec& crystal, const WaveTriple& waves, DeltaKChoice choice);

// 128π²λ_p (d_eff/λ_aλ_b)² / (10³ ε₀ n_p² |n′_a − n′_b|); the common rate
// scale of R_a, R_b and R_c.
double rate_prefactor(const CrystalSpec& crystal, const WaveTriple& waves);

EmissionRates emission_rates(const CrystalSpec& crystal, const WaveTriple& waves,
                             const FocusConfig& focus, double delta_k);
EmissionRates emission_rates(const CrystalSpec& crystal, const WaveTriple& waves,
                             const FocusConfig& focus,
                             DeltaKChoice choice = DeltaKChoice::bare());

// η_c with the zero-emission convention: R_a·R_b = 0 gives 0 and sets the flag.
struct CouplingEfficiency {
    double value = 0.0;
    bool zero_emission = false;
    bool at_bound = false;  // value within 1e-12 of 1
};

CouplingEfficiency eta_c_from_rates(const EmissionRates& rates);

struct ModeCouplingProbabilities {
    double P_p = 0.0;
    double P_a = 0.0;        // total, P̃_a + P_p
    double P_b = 0.0;
    double P_a_only = 0.0;   // P̃_a
    double P_b_only = 0.0;   // P̃_b

    static ModeCouplingProbabilities from_exclusive(double p_pair, double p_a_only, double p_b_only);
    static ModeCouplingProbabilities from_totals(double p_pair, double p_a, double p_b);
};

// P_p / sqrt(P_a P_b). P_a P_b = 0 with P_p = 0 returns 0 (flagged);
// with P_p > 0 it is inconsistent and throws DomainError.
CouplingEfficiency eta_c_from_probabilities(const ModeCouplingProbabilities& p);

double eta_c_closed_form(const WaveTriple& waves, double delta_k, const FocusConfig& focus);

struct HeraldingEfficiencies {
    double herald_a = 0.0;   // a conditioned on b: (P_p/P_b)·η̃_a
    double herald_b = 0.0;   // b conditioned on a: (P_p/P_a)·η̃_b
    double herald_sym = 0.0;
};

HeraldingEfficiencies heralding_efficiencies(const ModeCouplingProbabilities& p,
                                             double eta_avail_a, double eta_avail_b);

// Advisory thresholds for the rate approximations.
inline constexpr double kMinCrystalLength = 1e-3;      // m
inline constexpr double kMaxRelativeMismatch = 0.05;   // |Δk| / min(k)
inline constexpr double kMaxFocalParameter = 10.0;

std::vector<std::string> validity_check(const CrystalSpec& crystal, const WaveTriple& waves,
                                        double delta_k, const FocusConfig& focus);

}  // namespace spdc
