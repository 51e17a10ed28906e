#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spdc/detector.hpp"

// Event-level simulator used as an independent oracle for the detection
// statistics. Nothing in here calls the analytic formulas of detector.hpp
// except estimate_rates(), which only packages tallies.
namespace spdc::mc {

// Counter-based generator: stream (seed, id) is a pure function of its key,
// so blocks can be simulated in any order or in parallel.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Exponential with the given rate (> 0).
    double exponential(double rate);
    // Uniform integer in [0, n).
    std::uint32_t below(std::uint32_t n);

private:
    std::uint64_t state_;
};

enum class SimMode { PairTrials, SingleTrials, TimestreamSingle, TimestreamDual };

std::string to_string(SimMode mode);
SimMode sim_mode_from_string(const std::string& id);

// One detector apparatus plus the optical path in front of it.
struct ArmConfig {
    double eta_s = 1.0;
    double eta_d = 1.0;
    int wire_count = 4;
    // Absolute per-wire efficiencies; empty means η_d / wire_count each.
    std::vector<double> wire_efficiencies;
    double dark_cps = 0.0;

    // η_s times the probability of a click on each wire.
    std::vector<double> click_probabilities() const;
    void validate() const;
};

struct SimConfig {
    std::uint64_t seed = 1;
    SimMode mode = SimMode::PairTrials;
    std::uint64_t trials = 1'000'000;
    double duration_s = 1.0;
    // Intrinsic rates, counts/s per mW of pump.
    double R_a = 0.0;
    double R_b = 0.0;
    double R_c = 0.0;
    double pump_mw = 1.0;
    ArmConfig arm_a;  // the only detector in single-detector modes
    ArmConfig arm_b;
    double window_s = 1e-9;
    double dead_time_s = 0.0;  // non-paralyzable, per wire

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct SimOutcome {
    SimMode mode = SimMode::PairTrials;
    std::uint64_t trials = 0;
    double duration_s = 0.0;

    // Trial modes: index = number of detection events (0, 1, 2).
    std::uint64_t events[3] = {0, 0, 0};

    // Time-stream modes. Single-detector modes count everything in arm a.
    std::uint64_t singles_a = 0;
    std::uint64_t singles_b = 0;
    std::uint64_t coincidences = 0;
    std::uint64_t true_coincidences = 0;
    std::uint64_t accidental_coincidences = 0;
    std::uint64_t dark_events_a = 0;
    std::uint64_t dark_events_b = 0;
    std::uint64_t dead_time_losses = 0;
    std::uint64_t pair_events = 0;

    std::vector<std::string> warnings;

    // Binomial estimate of P(k events) for trial modes.
    Estimate probability(int k) const;
    // Poisson rate estimates (cps) for time-stream modes.
    Estimate rate_a() const;
    Estimate rate_b() const;
    Estimate coincidence_rate() const;
    Estimate accidental_rate() const;
    Estimate true_coincidence_rate() const;
};

// Per trial: two photons, each clicking wire i with probability η_s e_i;
// two clicks on the same wire register once.
SimOutcome simulate_pair_trials(const SimConfig& cfg);
// Per trial: one photon.
SimOutcome simulate_single_trials(const SimConfig& cfg);
// Poisson streams of pairs, unpaired photons and dark counts, followed by a
// greedy earliest-first coincidence scan.
SimOutcome simulate_timestream(const SimConfig& cfg);
// Dispatches on cfg.mode.
SimOutcome simulate(const SimConfig& cfg);

using MeasuredRates = std::variant<MeasuredRatesSingle, MeasuredRatesDual>;

// Packages time-stream tallies as a measurement record. D is the configured
// dark rate (a characterized quantity) and D_c the default estimate.
MeasuredRates estimate_rates(const SimOutcome& out, const SimConfig& cfg);

// Delta-method standard error of the η_c that invert_single / invert_dual
// return for estimate_rates(out, cfg), from the Poisson counts.
double eta_c_standard_error(const SimOutcome& out, const SimConfig& cfg);

SimConfig sim_config_from_json(const nlohmann::json& doc);
nlohmann::json sim_config_to_json(const SimConfig& cfg);
nlohmann::json sim_outcome_to_json(const SimOutcome& out);

}  // namespace spdc::mc
