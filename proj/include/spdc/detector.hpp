#pragma once

#include <string>
#include <vector>

#include "spdc/coupling.hpp"

namespace spdc {

// Interleaved-nanowire detector apparatus. Each of the `wire_count` wires
// has efficiency η_d / wire_count.
struct DetectorSpec {
    double eta_d = 1.0;
    double dark_cps = 0.0;
    int wire_count = 4;
    std::string label;

    void validate() const;
};

struct OpticalPath {
    double eta_s = 1.0;
    std::string label;

    void validate() const;
};

// Raw (not dark-corrected) rates from one detector apparatus seeing both
// photons of each pair.
struct MeasuredRatesSingle {
    std::string label;
    double R_t = 0.0;   // total detection rate, cps
    double R_c = 0.0;   // coincidence rate, cps
    double D = 0.0;     // dark count rate
    double D_c = 0.0;   // coincident dark rate
    double integration_s = 1.0;
    double window_s = 1e-9;  // coincidence window Δt
};

struct MeasuredRatesDual {
    std::string label;
    double R_a = 0.0;
    double R_b = 0.0;
    double R_c = 0.0;
    double D_a = 0.0;
    double D_b = 0.0;
    double D_c = 0.0;
    double integration_s = 1.0;
    double window_s = 1e-9;
};

struct PairOutcomeProbs {
    double two = 0.0;   // P(2|2)
    double one = 0.0;   // P(1|2)
    double none = 0.0;  // P(0|2)
};

struct SingleOutcomeProbs {
    double one = 0.0;   // P(1|1)
    double none = 0.0;  // P(0|1)
};

// η = η_s η_d. With w wires, P(2|2) = (1 − 1/w)η²; w = 4 gives 3η²/4.
PairOutcomeProbs outcome_probs_pair(double eta, int wire_count = 4);
SingleOutcomeProbs outcome_probs_single(double eta);

// Dark-count corrected detection rates (ℜ̃).
struct DetectedSingle {
    double R_t = 0.0;
    double R_c = 0.0;
};

struct DetectedDual {
    double R_a = 0.0;
    double R_b = 0.0;
    double R_c = 0.0;
};

DetectedSingle forward_single(const EmissionRates& rates, double eta_s, double eta_d,
                              int wire_count = 4);
DetectedDual forward_dual(const EmissionRates& rates, const OpticalPath& path_a,
                          const DetectorSpec& det_a, const OpticalPath& path_b,
                          const DetectorSpec& det_b);

struct CorrectedRate {
    double value = 0.0;
    bool negative = false;  // data-quality flag: D exceeded the raw rate
};

CorrectedRate dark_correct(double raw_cps, double dark_cps);

struct SingleInversion {
    double R_c = 0.0;
    double R_t = 0.0;
    double eta_c = 0.0;
    std::vector<std::string> warnings;
};

struct DualInversion {
    double R_a = 0.0;
    double R_b = 0.0;
    double R_c = 0.0;
    double eta_c = 0.0;
    bool eta_c_above_one = false;
    std::vector<std::string> warnings;
};

SingleInversion invert_single(const MeasuredRatesSingle& m, double eta_s, double eta_d,
                              int wire_count = 4);
DualInversion invert_dual(const MeasuredRatesDual& m, const OpticalPath& path_a,
                          const DetectorSpec& det_a, const OpticalPath& path_b,
                          const DetectorSpec& det_b);

// Delta-method standard error of the η_c above, treating the raw counts
// (rate × integration_s) as Poisson and D, D_c as known. Returns 0 when a
// corrected count is not positive.
double eta_c_standard_error(const MeasuredRatesSingle& m, double eta_s, double eta_d,
                            int wire_count = 4);
double eta_c_standard_error(const MeasuredRatesDual& m, const OpticalPath& path_a,
                            const DetectorSpec& det_a, const OpticalPath& path_b,
                            const DetectorSpec& det_b);

// Tolerance above 1 before an η_c estimate is flagged.
inline constexpr double kEtaAboveOneTolerance = 1e-9;

// Accidentals per coincidence window: a dark count can precede or follow
// the partner event, hence κ = 2.
inline constexpr double kAccidentalKappa = 2.0;

struct AccidentalEstimate {
    double dark_photon = 0.0;  // κ D R Δt
    double dark_dark = 0.0;    // κ D² Δt
    double total() const { return dark_photon + dark_dark; }
};

AccidentalEstimate accidental_coincidence_estimate(double dark_cps, double photon_cps,
                                                   double window_s);

// Default D_c when it was not measured. Photon rates are taken from the
// dark-corrected singles of the record.
double estimated_dark_coincidences(const MeasuredRatesSingle& m, int wire_count = 4);
double estimated_dark_coincidences(const MeasuredRatesDual& m);

}  // namespace spdc
