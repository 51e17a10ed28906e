#include "spdc/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"

namespace spdc::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kTrialBlock = 1ULL << 16;
constexpr double kEventsPerSegment = 2e5;
constexpr double kMinExpectedCoincidences = 100.0;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Index of the clicking wire, or -1 when the photon is lost.
int draw_click(CounterRng& rng, const std::vector<double>& cumulative) {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
        if (u < cumulative[i]) return static_cast<int>(i);
    }
    return -1;
}

std::vector<double> cumulative_of(const std::vector<double>& p) {
    std::vector<double> c(p.size());
    std::partial_sum(p.begin(), p.end(), c.begin());
    return c;
}

enum class Source : std::uint8_t { Pair, Unpaired, Dark };

struct Event {
    double t;
    std::uint16_t channel;  // arm * kMaxWires + wire
    std::uint8_t arm;
    Source source;
    std::uint64_t pair;     // 0 unless source == Pair
};

constexpr std::uint16_t kMaxWires = 256;

bool dual_mode(SimMode m) { return m == SimMode::TimestreamDual; }

Estimate poisson_rate(std::uint64_t n, double duration) {
    if (!(duration > 0.0)) return {};
    return {static_cast<double>(n) / duration, std::sqrt(static_cast<double>(n)) / duration};
}

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
}

std::uint32_t CounterRng::below(std::uint32_t n) {
    return static_cast<std::uint32_t>(((next_u64() >> 32) * n) >> 32);
}

std::string to_string(SimMode mode) {
    switch (mode) {
        case SimMode::PairTrials: return "pair-trials";
        case SimMode::SingleTrials: return "single-trials";
        case SimMode::TimestreamSingle: return "timestream-single-config";
        case SimMode::TimestreamDual: return "timestream-dual-config";
    }
    return "?";
}

SimMode sim_mode_from_string(const std::string& id) {
    if (id == "pair-trials") return SimMode::PairTrials;
    if (id == "single-trials") return SimMode::SingleTrials;
    if (id == "timestream-single-config") return SimMode::TimestreamSingle;
    if (id == "timestream-dual-config") return SimMode::TimestreamDual;
    throw ConfigError("unknown simulation mode '" + id + "'");
}

std::vector<double> ArmConfig::click_probabilities() const {
    std::vector<double> p;
    if (wire_efficiencies.empty()) {
        p.assign(static_cast<std::size_t>(wire_count), eta_d / wire_count);
    } else {
        p = wire_efficiencies;
    }
    for (auto& v : p) v *= eta_s;
    return p;
}

void ArmConfig::validate() const {
    check_probability(eta_s, "eta_s");
    check_probability(eta_d, "eta_d");
    if (wire_count < 1 || wire_count > kMaxWires) throw DomainError("wire count must be in [1, 256]");
    if (!wire_efficiencies.empty()) {
        if (wire_efficiencies.size() != static_cast<std::size_t>(wire_count)) {
            throw ConfigError("wire_efficiencies must list one value per wire");
        }
        double sum = 0.0;
        for (double e : wire_efficiencies) {
            if (!(e >= 0.0)) throw DomainError("wire efficiencies must be >= 0");
            sum += e;
        }
        if (sum > 1.0 + 1e-12) throw DomainError("wire efficiencies sum above 1");
    }
    if (!(dark_cps >= 0.0)) throw DomainError("dark count rate must be >= 0");
}

void SimConfig::validate() const {
    arm_a.validate();
    arm_b.validate();
    if (!(R_a >= 0.0) || !(R_b >= 0.0) || !(R_c >= 0.0)) throw DomainError("rates must be >= 0");
    if (R_c > std::min(R_a, R_b)) throw DomainError("R_c must not exceed min(R_a, R_b)");
    if (!(pump_mw >= 0.0)) throw DomainError("pump power must be >= 0");
    if (!(window_s >= 0.0)) throw DomainError("coincidence window must be >= 0");
    if (!(dead_time_s >= 0.0)) throw DomainError("dead time must be >= 0");
    if (!(duration_s >= 0.0)) throw DomainError("duration must be >= 0");
}

Estimate SimOutcome::probability(int k) const {
    if (trials == 0 || k < 0 || k > 2) return {};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(events[k]) / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

Estimate SimOutcome::rate_a() const { return poisson_rate(singles_a, duration_s); }
Estimate SimOutcome::rate_b() const { return poisson_rate(singles_b, duration_s); }
Estimate SimOutcome::coincidence_rate() const { return poisson_rate(coincidences, duration_s); }
Estimate SimOutcome::accidental_rate() const {
    return poisson_rate(accidental_coincidences, duration_s);
}
Estimate SimOutcome::true_coincidence_rate() const {
    return poisson_rate(true_coincidences, duration_s);
}

SimOutcome simulate_pair_trials(const SimConfig& cfg) {
    cfg.validate();
    const auto cumulative = cumulative_of(cfg.arm_a.click_probabilities());
    const std::size_t n_blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<std::array<std::uint64_t, 3>> tallies(n_blocks, {0, 0, 0});

    parallel_for(n_blocks, [&](std::size_t b) {
        CounterRng rng(cfg.seed, b);
        const std::uint64_t begin = b * kTrialBlock;
        const std::uint64_t end = std::min<std::uint64_t>(cfg.trials, begin + kTrialBlock);
        auto& t = tallies[b];
        for (std::uint64_t i = begin; i < end; ++i) {
            const int w1 = draw_click(rng, cumulative);
            const int w2 = draw_click(rng, cumulative);
            int clicks = (w1 >= 0) + (w2 >= 0);
            if (clicks == 2 && w1 == w2) clicks = 1;  // same-wire blocking
            ++t[static_cast<std::size_t>(clicks)];
        }
    });

    SimOutcome out;
    out.mode = SimMode::PairTrials;
    out.trials = cfg.trials;
    for (const auto& t : tallies) {
        for (int k = 0; k < 3; ++k) out.events[k] += t[static_cast<std::size_t>(k)];
    }
    return out;
}

SimOutcome simulate_single_trials(const SimConfig& cfg) {
    cfg.validate();
    const auto cumulative = cumulative_of(cfg.arm_a.click_probabilities());
    const std::size_t n_blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<std::uint64_t> clicks(n_blocks, 0);

    parallel_for(n_blocks, [&](std::size_t b) {
        CounterRng rng(cfg.seed, b);
        const std::uint64_t begin = b * kTrialBlock;
        const std::uint64_t end = std::min<std::uint64_t>(cfg.trials, begin + kTrialBlock);
        for (std::uint64_t i = begin; i < end; ++i) {
            if (draw_click(rng, cumulative) >= 0) ++clicks[b];
        }
    });

    SimOutcome out;
    out.mode = SimMode::SingleTrials;
    out.trials = cfg.trials;
    out.events[1] = std::accumulate(clicks.begin(), clicks.end(), std::uint64_t{0});
    out.events[0] = cfg.trials - out.events[1];
    return out;
}

SimOutcome simulate_timestream(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.mode != SimMode::TimestreamSingle && cfg.mode != SimMode::TimestreamDual) {
        throw ConfigError("simulate_timestream needs a timestream mode");
    }
    const bool dual = dual_mode(cfg.mode);
    const ArmConfig& arm_b = dual ? cfg.arm_b : cfg.arm_a;
    const std::uint8_t b_index = dual ? 1 : 0;

    const double pair_rate = cfg.R_c * cfg.pump_mw;
    const double only_a_rate = (cfg.R_a - cfg.R_c) * cfg.pump_mw;
    const double only_b_rate = (cfg.R_b - cfg.R_c) * cfg.pump_mw;
    const double dark_a = cfg.arm_a.dark_cps;
    const double dark_b = dual ? cfg.arm_b.dark_cps : 0.0;

    const auto cum_a = cumulative_of(cfg.arm_a.click_probabilities());
    const auto cum_b = cumulative_of(arm_b.click_probabilities());

    SimOutcome out;
    out.mode = cfg.mode;
    out.duration_s = cfg.duration_s;
    if (!(cfg.duration_s > 0.0)) return out;

    const double total_rate = 2.0 * pair_rate + only_a_rate + only_b_rate + dark_a + dark_b;
    const double seg_len =
        total_rate > 0.0 ? std::min(cfg.duration_s, std::max(1e-3, kEventsPerSegment / total_rate))
                         : cfg.duration_s;
    const auto n_segments = static_cast<std::size_t>(std::ceil(cfg.duration_s / seg_len));

    std::vector<std::vector<Event>> segments(n_segments);
    std::vector<std::uint64_t> pair_counts(n_segments, 0);

    parallel_for(n_segments, [&](std::size_t s) {
        CounterRng rng(cfg.seed, s);
        const double t0 = static_cast<double>(s) * seg_len;
        const double t1 = std::min(cfg.duration_s, t0 + seg_len);
        auto& ev = segments[s];

        auto emit = [&](double t, std::uint8_t arm, int wire, Source src, std::uint64_t pair) {
            ev.push_back({t, static_cast<std::uint16_t>(arm * kMaxWires + wire), arm, src, pair});
        };

        if (pair_rate > 0.0) {
            std::uint64_t local = 0;
            for (double t = t0 + rng.exponential(pair_rate); t < t1; t += rng.exponential(pair_rate)) {
                const std::uint64_t id = (static_cast<std::uint64_t>(s) << 32) | ++local;
                const int wa = draw_click(rng, cum_a);
                const int wb = draw_click(rng, cum_b);
                if (wa >= 0) emit(t, 0, wa, Source::Pair, id);
                // One apparatus: both photons on one wire register once.
                if (wb >= 0 && !(!dual && wa == wb)) emit(t, b_index, wb, Source::Pair, id);
            }
            pair_counts[s] = local;
        }
        auto poisson_stream = [&](double rate, std::uint8_t arm, const std::vector<double>& cum) {
            if (!(rate > 0.0)) return;
            for (double t = t0 + rng.exponential(rate); t < t1; t += rng.exponential(rate)) {
                const int w = draw_click(rng, cum);
                if (w >= 0) emit(t, arm, w, Source::Unpaired, 0);
            }
        };
        poisson_stream(only_a_rate, 0, cum_a);
        poisson_stream(only_b_rate, b_index, cum_b);

        auto dark_stream = [&](double rate, std::uint8_t arm, int wires) {
            if (!(rate > 0.0)) return;
            for (double t = t0 + rng.exponential(rate); t < t1; t += rng.exponential(rate)) {
                emit(t, arm, static_cast<int>(rng.below(static_cast<std::uint32_t>(wires))),
                     Source::Dark, 0);
            }
        };
        dark_stream(dark_a, 0, cfg.arm_a.wire_count);
        if (dual) dark_stream(dark_b, 1, cfg.arm_b.wire_count);

        std::sort(ev.begin(), ev.end(), [](const Event& x, const Event& y) {
            if (x.t != y.t) return x.t < y.t;
            return x.channel < y.channel;
        });
    });

    std::vector<Event> events;
    std::size_t total = 0;
    for (const auto& s : segments) total += s.size();
    events.reserve(total);
    for (auto& s : segments) {
        events.insert(events.end(), s.begin(), s.end());
        std::vector<Event>().swap(s);
    }
    out.pair_events = std::accumulate(pair_counts.begin(), pair_counts.end(), std::uint64_t{0});

    if (cfg.dead_time_s > 0.0) {
        std::vector<double> last(2 * kMaxWires, -1e300);
        std::vector<Event> kept;
        kept.reserve(events.size());
        for (const auto& e : events) {
            if (e.t - last[e.channel] < cfg.dead_time_s) {
                ++out.dead_time_losses;
                continue;
            }
            last[e.channel] = e.t;
            kept.push_back(e);
        }
        events.swap(kept);
    }

    for (const auto& e : events) {
        if (e.arm == 0) {
            ++out.singles_a;
            if (e.source == Source::Dark) ++out.dark_events_a;
        } else {
            ++out.singles_b;
            if (e.source == Source::Dark) ++out.dark_events_b;
        }
    }

    // Greedy earliest-first matching; each event joins at most one
    // coincidence.
    std::vector<bool> used(events.size(), false);
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (used[i]) continue;
        const auto& ei = events[i];
        for (std::size_t j = i + 1; j < events.size() && events[j].t - ei.t <= cfg.window_s; ++j) {
            if (used[j]) continue;
            const auto& ej = events[j];
            const bool eligible = dual ? ej.arm != ei.arm : ej.channel != ei.channel;
            if (!eligible) continue;
            used[i] = used[j] = true;
            ++out.coincidences;
            if (ei.pair != 0 && ei.pair == ej.pair) {
                ++out.true_coincidences;
            } else {
                ++out.accidental_coincidences;
            }
            break;
        }
    }

    const double eta_a = cum_a.empty() ? 0.0 : cum_a.back();
    const double eta_b = cum_b.empty() ? 0.0 : cum_b.back();
    const double expected_coincidences = pair_rate * cfg.duration_s * eta_a * eta_b;
    if (expected_coincidences < kMinExpectedCoincidences) {
        out.warnings.push_back("statistics: fewer than 100 expected true coincidences");
    }
    return out;
}

SimOutcome simulate(const SimConfig& cfg) {
    switch (cfg.mode) {
        case SimMode::PairTrials: return simulate_pair_trials(cfg);
        case SimMode::SingleTrials: return simulate_single_trials(cfg);
        case SimMode::TimestreamSingle:
        case SimMode::TimestreamDual: return simulate_timestream(cfg);
    }
    throw ConfigError("unknown simulation mode");
}

MeasuredRates estimate_rates(const SimOutcome& out, const SimConfig& cfg) {
    if (out.mode != cfg.mode) throw ConfigError("simulation outcome and config modes differ");
    if (out.mode != SimMode::TimestreamSingle && out.mode != SimMode::TimestreamDual) {
        throw ConfigError("measurement records need a timestream simulation");
    }
    if (!(out.duration_s > 0.0)) throw DataQualityError("empty record: zero-duration stream");
    const double T = out.duration_s;
    if (out.mode == SimMode::TimestreamSingle) {
        MeasuredRatesSingle m;
        m.label = "sim-seed-" + std::to_string(cfg.seed);
        m.R_t = static_cast<double>(out.singles_a) / T;
        m.R_c = static_cast<double>(out.coincidences) / T;
        m.D = cfg.arm_a.dark_cps;
        m.integration_s = T;
        m.window_s = cfg.window_s;
        m.D_c = estimated_dark_coincidences(m, cfg.arm_a.wire_count);
        return m;
    }
    MeasuredRatesDual m;
    m.label = "sim-seed-" + std::to_string(cfg.seed);
    m.R_a = static_cast<double>(out.singles_a) / T;
    m.R_b = static_cast<double>(out.singles_b) / T;
    m.R_c = static_cast<double>(out.coincidences) / T;
    m.D_a = cfg.arm_a.dark_cps;
    m.D_b = cfg.arm_b.dark_cps;
    m.integration_s = T;
    m.window_s = cfg.window_s;
    m.D_c = estimated_dark_coincidences(m);
    return m;
}

double eta_c_standard_error(const SimOutcome& out, const SimConfig& cfg) {
    const auto record = estimate_rates(out, cfg);
    if (const auto* s = std::get_if<MeasuredRatesSingle>(&record)) {
        return spdc::eta_c_standard_error(*s, cfg.arm_a.eta_s, cfg.arm_a.eta_d,
                                          cfg.arm_a.wire_count);
    }
    const OpticalPath pa{cfg.arm_a.eta_s, "a"};
    const OpticalPath pb{cfg.arm_b.eta_s, "b"};
    const DetectorSpec da{cfg.arm_a.eta_d, cfg.arm_a.dark_cps, cfg.arm_a.wire_count, "a"};
    const DetectorSpec db{cfg.arm_b.eta_d, cfg.arm_b.dark_cps, cfg.arm_b.wire_count, "b"};
    return spdc::eta_c_standard_error(std::get<MeasuredRatesDual>(record), pa, da, pb, db);
}

namespace {

ArmConfig arm_from_json(const nlohmann::json& j) {
    ArmConfig a;
    a.eta_s = j.value("eta_s", 1.0);
    a.eta_d = j.value("eta_d", 1.0);
    a.wire_count = j.value("wire_count", 4);
    a.dark_cps = j.value("dark_cps", 0.0);
    if (j.contains("wire_efficiencies")) {
        a.wire_efficiencies = j.at("wire_efficiencies").get<std::vector<double>>();
    }
    return a;
}

nlohmann::json arm_to_json(const ArmConfig& a) {
    nlohmann::json j = {{"eta_s", a.eta_s},
                        {"eta_d", a.eta_d},
                        {"wire_count", a.wire_count},
                        {"dark_cps", a.dark_cps}};
    if (!a.wire_efficiencies.empty()) j["wire_efficiencies"] = a.wire_efficiencies;
    return j;
}

nlohmann::json estimate_json(const Estimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}};
}

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("simulation config must be a JSON object");
    try {
        SimConfig c;
        if (!doc.contains("seed")) throw ConfigError("simulation config needs a 'seed'");
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.mode = sim_mode_from_string(doc.value("mode", std::string("pair-trials")));
        c.trials = doc.value("trials", c.trials);
        c.duration_s = doc.value("duration_s", c.duration_s);
        if (doc.contains("rates_per_mw")) {
            const auto& r = doc.at("rates_per_mw");
            c.R_a = r.value("R_a", 0.0);
            c.R_b = r.value("R_b", 0.0);
            c.R_c = r.value("R_c", 0.0);
        }
        c.pump_mw = doc.value("pump_mw", c.pump_mw);
        if (doc.contains("arm_a")) c.arm_a = arm_from_json(doc.at("arm_a"));
        if (doc.contains("arm_b")) c.arm_b = arm_from_json(doc.at("arm_b"));
        c.window_s = doc.value("window_s", c.window_s);
        c.dead_time_s = doc.value("dead_time_s", c.dead_time_s);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed simulation config: ") + e.what());
    }
}

nlohmann::json sim_config_to_json(const SimConfig& c) {
    return {{"seed", c.seed},
            {"mode", to_string(c.mode)},
            {"trials", c.trials},
            {"duration_s", c.duration_s},
            {"rates_per_mw", {{"R_a", c.R_a}, {"R_b", c.R_b}, {"R_c", c.R_c}}},
            {"pump_mw", c.pump_mw},
            {"arm_a", arm_to_json(c.arm_a)},
            {"arm_b", arm_to_json(c.arm_b)},
            {"window_s", c.window_s},
            {"dead_time_s", c.dead_time_s}};
}

nlohmann::json sim_outcome_to_json(const SimOutcome& o) {
    nlohmann::json j = {{"mode", to_string(o.mode)}, {"warnings", o.warnings}};
    if (o.mode == SimMode::PairTrials || o.mode == SimMode::SingleTrials) {
        j["trials"] = o.trials;
        j["counts"] = {{"0", o.events[0]}, {"1", o.events[1]}, {"2", o.events[2]}};
        j["estimates"] = {{"P0", estimate_json(o.probability(0))},
                          {"P1", estimate_json(o.probability(1))},
                          {"P2", estimate_json(o.probability(2))}};
        return j;
    }
    j["duration_s"] = o.duration_s;
    j["counts"] = {{"singles_a", o.singles_a},
                   {"singles_b", o.singles_b},
                   {"coincidences", o.coincidences},
                   {"true_coincidences", o.true_coincidences},
                   {"accidental_coincidences", o.accidental_coincidences},
                   {"dark_events_a", o.dark_events_a},
                   {"dark_events_b", o.dark_events_b},
                   {"dead_time_losses", o.dead_time_losses},
                   {"pair_events", o.pair_events}};
    j["estimates"] = {{"rate_a", estimate_json(o.rate_a())},
                      {"rate_b", estimate_json(o.rate_b())},
                      {"coincidence_rate", estimate_json(o.coincidence_rate())},
                      {"true_coincidence_rate", estimate_json(o.true_coincidence_rate())},
                      {"accidental_rate", estimate_json(o.accidental_rate())}};
    return j;
}

}  // namespace spdc::mc
