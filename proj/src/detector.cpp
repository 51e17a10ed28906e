#include "spdc/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

void check_efficiency(double eta, const std::string& what) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(what + " must lie in [0, 1]");
}

void check_wires(int wire_count) {
    if (wire_count < 1) throw DomainError("wire count must be >= 1");
}

double corrected_or_throw(double raw, double dark, const char* name) {
    const auto c = dark_correct(raw, dark);
    if (c.negative) {
        std::ostringstream os;
        os << "dark-corrected rate " << name << " is negative (raw " << raw << " cps, dark " << dark
           << " cps)";
        throw DataQualityError(os.str());
    }
    return c.value;
}

}  // namespace

void DetectorSpec::validate() const {
    check_efficiency(eta_d, "detector efficiency eta_d");
    if (!(dark_cps >= 0.0)) throw DomainError("dark count rate must be >= 0");
    check_wires(wire_count);
}

void OpticalPath::validate() const {
    check_efficiency(eta_s, "transmission efficiency eta_s");
}

PairOutcomeProbs outcome_probs_pair(double eta, int wire_count) {
    check_efficiency(eta, "eta_s * eta_d");
    check_wires(wire_count);
    const double inv_w = 1.0 / wire_count;
    const double eta2 = eta * eta;
    PairOutcomeProbs p;
    p.two = (1.0 - inv_w) * eta2;
    p.one = 2.0 * eta - (2.0 - inv_w) * eta2;
    p.none = 1.0 - 2.0 * eta + eta2;
    return p;
}

SingleOutcomeProbs outcome_probs_single(double eta) {
    check_efficiency(eta, "eta_s * eta_d");
    return {eta, 1.0 - eta};
}

DetectedSingle forward_single(const EmissionRates& rates, double eta_s, double eta_d,
                              int wire_count) {
    check_efficiency(eta_s, "eta_s");
    check_efficiency(eta_d, "eta_d");
    const double eta = eta_s * eta_d;
    const auto pair = outcome_probs_pair(eta, wire_count);
    const auto single = outcome_probs_single(eta);
    DetectedSingle d;
    d.R_t = rates.R_c * (pair.one + 2.0 * pair.two) +
            (rates.R_a + rates.R_b - 2.0 * rates.R_c) * single.one;
    d.R_c = rates.R_c * pair.two;
    return d;
}

DetectedDual forward_dual(const EmissionRates& rates, const OpticalPath& path_a,
                          const DetectorSpec& det_a, const OpticalPath& path_b,
                          const DetectorSpec& det_b) {
    path_a.validate();
    path_b.validate();
    det_a.validate();
    det_b.validate();
    const double pa = outcome_probs_single(path_a.eta_s * det_a.eta_d).one;
    const double pb = outcome_probs_single(path_b.eta_s * det_b.eta_d).one;
    return {rates.R_a * pa, rates.R_b * pb, rates.R_c * pa * pb};
}

CorrectedRate dark_correct(double raw_cps, double dark_cps) {
    CorrectedRate c;
    c.value = raw_cps - dark_cps;
    c.negative = c.value < 0.0;
    return c;
}

SingleInversion invert_single(const MeasuredRatesSingle& m, double eta_s, double eta_d,
                              int wire_count) {
    check_efficiency(eta_s, "eta_s");
    check_efficiency(eta_d, "eta_d");
    check_wires(wire_count);
    if (wire_count < 2) {
        throw DomainError("single-detector inversion needs >= 2 wires (one wire never records pairs)");
    }
    const double eta = eta_s * eta_d;
    if (!(eta > 0.0)) throw DomainError("cannot invert with zero efficiency eta_s * eta_d");

    const double rt = corrected_or_throw(m.R_t, m.D, "R_t");
    const double rc = corrected_or_throw(m.R_c, m.D_c, "R_c");

    SingleInversion out;
    const double inv_w = 1.0 / wire_count;
    out.R_c = rc / ((1.0 - inv_w) * eta * eta);
    out.R_t = (rt + out.R_c * eta * eta * inv_w) / eta;
    if (rt > 0.0) {
        // η_c = 2R_c/R_t; at w = 4 this is 8(ℜ̃c/ℜ̃t) / (η(3 + ℜ̃c/ℜ̃t)).
        out.eta_c = 2.0 * out.R_c / out.R_t;
    } else if (rc > 0.0) {
        throw DataQualityError("coincidences without singles: R_t corrected to 0 while R_c > 0");
    } else {
        out.warnings.push_back("zero emission: eta_c reported as 0");
    }
    if (out.eta_c > 1.0 + kEtaAboveOneTolerance) {
        out.warnings.push_back("eta_c above 1 (statistical fluctuation or mis-set efficiencies)");
    }
    return out;
}

DualInversion invert_dual(const MeasuredRatesDual& m, const OpticalPath& path_a,
                          const DetectorSpec& det_a, const OpticalPath& path_b,
                          const DetectorSpec& det_b) {
    path_a.validate();
    path_b.validate();
    det_a.validate();
    det_b.validate();
    const double eta_a = path_a.eta_s * det_a.eta_d;
    const double eta_b = path_b.eta_s * det_b.eta_d;
    if (!(eta_a > 0.0) || !(eta_b > 0.0)) {
        throw DomainError("cannot invert with zero arm efficiency");
    }
    const double ra = corrected_or_throw(m.R_a, m.D_a, "R_a");
    const double rb = corrected_or_throw(m.R_b, m.D_b, "R_b");
    const double rc = corrected_or_throw(m.R_c, m.D_c, "R_c");

    DualInversion out;
    out.R_a = ra / eta_a;
    out.R_b = rb / eta_b;
    out.R_c = rc / (eta_a * eta_b);
    if (ra > 0.0 && rb > 0.0) {
        // Per-arm generalization of a single η_sη_d: divide by sqrt(η_a η_b).
        out.eta_c = std::sqrt((rc / ra) * (rc / rb)) / std::sqrt(eta_a * eta_b);
    } else if (rc > 0.0) {
        throw DataQualityError("coincidences without singles in one arm");
    } else {
        out.warnings.push_back("zero emission: eta_c reported as 0");
    }
    if (out.eta_c > 1.0 + kEtaAboveOneTolerance) {
        out.eta_c_above_one = true;
        out.warnings.push_back("eta_c above 1 (statistical fluctuation or mis-set efficiencies)");
    }
    return out;
}

double eta_c_standard_error(const MeasuredRatesSingle& m, double eta_s, double eta_d,
                            int wire_count) {
    const auto inv = invert_single(m, eta_s, eta_d, wire_count);
    if (wire_count < 2) return 0.0;
    const double T = m.integration_s;
    const double nc = m.R_c * T;
    const double nt = m.R_t * T;
    const double rc = (m.R_c - m.D_c) * T;
    const double rt = (m.R_t - m.D) * T;
    // Events not part of a coincidence.
    const double rest = std::max(0.0, nt - 2.0 * nc);
    const double w = wire_count;
    const double denom = rt + rc / (w - 1.0);
    if (!(rc > 0.0) || !(denom > 0.0)) return 0.0;
    const double d_pairs = 1.0 / rc - (2.0 + 1.0 / (w - 1.0)) / denom;
    const double d_rest = -1.0 / denom;
    return inv.eta_c * std::sqrt(d_pairs * d_pairs * nc + d_rest * d_rest * rest);
}

double eta_c_standard_error(const MeasuredRatesDual& m, const OpticalPath& path_a,
                            const DetectorSpec& det_a, const OpticalPath& path_b,
                            const DetectorSpec& det_b) {
    const auto inv = invert_dual(m, path_a, det_a, path_b, det_b);
    const double T = m.integration_s;
    const double nc = m.R_c * T;
    const double rc = (m.R_c - m.D_c) * T;
    const double ra = (m.R_a - m.D_a) * T;
    const double rb = (m.R_b - m.D_b) * T;
    if (!(rc > 0.0) || !(ra > 0.0) || !(rb > 0.0)) return 0.0;
    // Coincidences and the two unmatched single streams are independent.
    const double only_a = std::max(0.0, m.R_a * T - nc);
    const double only_b = std::max(0.0, m.R_b * T - nc);
    const double d_pairs = 1.0 / rc - 0.5 / ra - 0.5 / rb;
    const double d_a = -0.5 / ra;
    const double d_b = -0.5 / rb;
    return inv.eta_c * std::sqrt(d_pairs * d_pairs * nc + d_a * d_a * only_a + d_b * d_b * only_b);
}

AccidentalEstimate accidental_coincidence_estimate(double dark_cps, double photon_cps,
                                                   double window_s) {
    if (!(dark_cps >= 0.0) || !(photon_cps >= 0.0) || !(window_s >= 0.0)) {
        throw DomainError("accidental estimate needs non-negative rates and window");
    }
    AccidentalEstimate e;
    e.dark_photon = kAccidentalKappa * dark_cps * photon_cps * window_s;
    e.dark_dark = kAccidentalKappa * dark_cps * dark_cps * window_s;
    return e;
}

double estimated_dark_coincidences(const MeasuredRatesSingle& m, int wire_count) {
    check_wires(wire_count);
    const double photons = std::max(0.0, m.R_t - m.D);
    const double distinct_wire = 1.0 - 1.0 / wire_count;
    return kAccidentalKappa * distinct_wire * m.window_s * (m.D * photons + 0.5 * m.D * m.D);
}

double estimated_dark_coincidences(const MeasuredRatesDual& m) {
    const double pa = std::max(0.0, m.R_a - m.D_a);
    const double pb = std::max(0.0, m.R_b - m.D_b);
    return kAccidentalKappa * m.window_s * (m.D_a * pb + m.D_b * pa + m.D_a * m.D_b);
}

}  // namespace spdc
