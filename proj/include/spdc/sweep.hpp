#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdc/coupling.hpp"

namespace spdc {

// Everything a rate evaluation needs besides the focal parameters.
struct SourceContext {
    CrystalSpec crystal;
    AxisModels models;
    WaveTriple waves;
    DeltaKChoice delta_k = DeltaKChoice::bare();
    // When set, every point uses this ξ_b instead of the shared-optics tie.
    std::optional<double> xi_b_override;

    // Reference crystal, KTP models, 780 → 1560 + 1560 nm.
    static SourceContext reference();

    double delta_k_value() const;
    FocusConfig focus(double xi_p, double xi_a) const;
    EmissionRates rates(double xi_p, double xi_a) const;
};

// Search domain for every focal parameter.
inline constexpr double kXiMin = 0.01;
inline constexpr double kXiMax = 10.0;
// Pump focal parameter whose peak pair rate is the normalization baseline.
inline constexpr double kBaselineXiP = 2.84;

struct SweepRecord {
    double xi_p = 0.0;
    double xi_a = 0.0;
    double xi_b = 0.0;
    EmissionRates rates;
    double eta_c = 0.0;
    double norm_pair_rate = 0.0;
    bool ok = true;  // false when the point raised a domain error
    std::vector<std::string> warnings;
};

// Log-spaced grid with `points` values over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

// One record per grid value, in input order. Per-point errors are recorded
// in the warnings column and do not stop the sweep.
std::vector<SweepRecord> sweep_xi_a(double xi_p, const std::vector<double>& grid,
                                    const SourceContext& ctx, double baseline_rate);
std::vector<SweepRecord> sweep_xi_a(double xi_p, const std::vector<double>& grid,
                                    const SourceContext& ctx);

enum class PeakObjective { PairRate, EtaC };

std::string to_string(PeakObjective objective);
PeakObjective peak_objective_from_string(const std::string& id);

struct PeakCandidate {
    double xi_a = 0.0;
    double value = 0.0;
};

struct PeakResult {
    double xi_a = 0.0;
    double value = 0.0;
    std::vector<PeakCandidate> candidates;  // one per restart
    std::vector<std::string> warnings;
};

struct PeakSearch {
    double lo = kXiMin;
    double hi = kXiMax;
    double rel_tol = 1e-6;
    // Restarts disagreeing by more than this raise a multimodality warning.
    double agreement = 1e-3;
};

// Golden-section maximization over log ξ_a with three restarts whose
// interior points sit at 0.382, 0.5 and 0.618 of the log interval.
PeakResult find_peak(double xi_p, PeakObjective objective, const SourceContext& ctx,
                     const PeakSearch& search = {});

// Peak R_c over ξ_a at ξ_p = 2.84, in counts/s/mW.
double normalization_baseline(const SourceContext& ctx);

struct TradeoffPoint {
    double target = 0.0;
    bool reachable = false;
    double xi_p = 0.0;
    double xi_a = 0.0;
    double xi_b = 0.0;
    double eta_c = 0.0;
    double rate = 0.0;       // R_c, counts/s/mW
    double norm_rate = 0.0;
};

struct TradeoffSearch {
    double xi_p_min = kXiMin;
    double xi_p_max = kXiMax;
    std::size_t grid_points = 31;
    int refine_steps = 40;
};

// For each target η_c, the largest normalized pair rate among peak-η_c
// configurations (one per ξ_p) that reach the target.
std::vector<TradeoffPoint> tradeoff_curve(const std::vector<double>& targets,
                                          const SourceContext& ctx,
                                          const TradeoffSearch& search = {});

enum class RateQuantity { R_a, R_b, R_c, R_t };

std::string to_string(RateQuantity q);
RateQuantity rate_quantity_from_string(const std::string& id);
double select_rate(const EmissionRates& rates, RateQuantity q);

struct FitRecord {
    std::string label;
    double xi_p = 0.0;
    double xi_a = 0.0;
    std::optional<double> xi_b;
    RateQuantity quantity = RateQuantity::R_c;
    double measured = 0.0;  // intrinsic rate, counts/s/mW
};

struct DeffFit {
    double d_eff_m_per_v = 0.0;
    std::size_t records_used = 0;
    double rms_relative_residual = 0.0;
};

// Rates scale as d_eff², so the least-squares scale has a closed form:
// d̂ = d_ref · sqrt(Σ m_i p_i / Σ p_i²) with p_i the model at d_ref.
DeffFit fit_deff(const std::vector<FitRecord>& records, const SourceContext& ctx);

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRecord& r);
std::string sweep_to_csv(const std::vector<SweepRecord>& records);
nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records);

}  // namespace spdc
