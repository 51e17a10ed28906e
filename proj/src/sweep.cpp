#include "spdc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"
#include "spdc/parallel.hpp"

namespace spdc {

namespace {

constexpr double kGoldenFraction = 0.3819660112501051;  // (3 − √5) / 2
constexpr double kRestartFractions[] = {0.381966, 0.5, 0.618034};

double objective_value(const EmissionRates& r, PeakObjective objective) {
    return objective == PeakObjective::PairRate ? r.R_c : eta_c_from_rates(r).value;
}

struct Probe {
    double log_x;
    double value;
};

// Golden-section refinement of a bracketing triple in log ξ.
template <class F>
Probe golden_section(F&& f, double a, double b, double c, double tol) {
    double fb = f(b);
    while (c - a > tol) {
        const bool right = (c - b) > (b - a);
        const double x = right ? b + kGoldenFraction * (c - b) : b - kGoldenFraction * (b - a);
        const double fx = f(x);
        if (right) {
            if (fx > fb) {
                a = b;
                b = x;
                fb = fx;
            } else {
                c = x;
            }
        } else {
            if (fx > fb) {
                c = b;
                b = x;
                fb = fx;
            } else {
                a = x;
            }
        }
    }
    return {b, fb};
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

SourceContext SourceContext::reference() {
    SourceContext ctx;
    ctx.crystal = reference_crystal();
    ctx.models = AxisModels::ktp();
    ctx.waves = reference_waves(ctx.crystal, ctx.models);
    return ctx;
}

double SourceContext::delta_k_value() const { return resolve_delta_k(crystal, waves, delta_k); }

FocusConfig SourceContext::focus(double xi_p, double xi_a) const {
    FocusConfig f = tied_focus(xi_p, xi_a, waves);
    if (xi_b_override) f.xi_b = *xi_b_override;
    return f;
}

EmissionRates SourceContext::rates(double xi_p, double xi_a) const {
    return emission_rates(crystal, waves, focus(xi_p, xi_a), delta_k_value());
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log grid needs 0 < lo <= hi");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    if (points > 1) g.back() = hi;
    return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (!(hi >= lo)) throw DomainError("linear grid needs lo <= hi");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

std::vector<SweepRecord> sweep_xi_a(double xi_p, const std::vector<double>& grid,
                                    const SourceContext& ctx, double baseline_rate) {
    for (double x : grid) {
        if (!(x > 0.0)) throw DomainError("sweep grid values must be > 0");
    }
    const double dk = ctx.delta_k_value();
    std::vector<SweepRecord> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        SweepRecord& r = out[i];
        r.xi_p = xi_p;
        r.xi_a = grid[i];
        try {
            const FocusConfig f = ctx.focus(xi_p, grid[i]);
            r.xi_b = f.xi_b;
            r.rates = emission_rates(ctx.crystal, ctx.waves, f, dk);
            const auto eta = eta_c_from_rates(r.rates);
            r.eta_c = eta.value;
            if (eta.zero_emission) r.warnings.push_back("zero emission: eta_c reported as 0");
            r.norm_pair_rate = baseline_rate > 0.0 ? r.rates.R_c / baseline_rate : 0.0;
            for (auto& w : validity_check(ctx.crystal, ctx.waves, dk, f)) r.warnings.push_back(w);
        } catch (const Error& e) {
            r.ok = false;
            r.warnings.push_back(std::string("error: ") + e.what());
        }
    });
    return out;
}

std::vector<SweepRecord> sweep_xi_a(double xi_p, const std::vector<double>& grid,
                                    const SourceContext& ctx) {
    if (grid.empty()) return {};
    return sweep_xi_a(xi_p, grid, ctx, normalization_baseline(ctx));
}

std::string to_string(PeakObjective objective) {
    return objective == PeakObjective::PairRate ? "pair-rate" : "eta-c";
}

PeakObjective peak_objective_from_string(const std::string& id) {
    if (id == "pair-rate") return PeakObjective::PairRate;
    if (id == "eta-c") return PeakObjective::EtaC;
    throw ConfigError("unknown peak objective '" + id + "' (expected pair-rate or eta-c)");
}

PeakResult find_peak(double xi_p, PeakObjective objective, const SourceContext& ctx,
                     const PeakSearch& search) {
    if (!(search.lo > 0.0) || !(search.hi >= search.lo)) {
        throw DomainError("peak search needs 0 < lo <= hi");
    }
    const double dk = ctx.delta_k_value();
    auto f = [&](double log_x) {
        const double x = std::exp(log_x);
        try {
            return objective_value(emission_rates(ctx.crystal, ctx.waves, ctx.focus(xi_p, x), dk),
                                   objective);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "peak search failed at xi_a = " << x << " (bracket [" << search.lo << ", "
               << search.hi << "], xi_p = " << xi_p << "): " << e.what();
            throw NumericalError(os.str());
        }
    };

    PeakResult res;
    const double a = std::log(search.lo);
    const double c = std::log(search.hi);
    if (c - a <= 0.0) {
        res.xi_a = search.lo;
        res.value = f(a);
        res.candidates.push_back({res.xi_a, res.value});
        return res;
    }
    // Endpoints take part so that a maximum on the boundary is found exactly.
    const Probe lo_end{a, f(a)};
    const Probe hi_end{c, f(c)};
    for (double frac : kRestartFractions) {
        Probe best = golden_section(f, a, a + frac * (c - a), c, search.rel_tol);
        if (lo_end.value > best.value) best = lo_end;
        if (hi_end.value > best.value) best = hi_end;
        res.candidates.push_back({std::exp(best.log_x), best.value});
    }
    const auto best = std::max_element(
        res.candidates.begin(), res.candidates.end(),
        [](const PeakCandidate& x, const PeakCandidate& y) { return x.value < y.value; });
    res.xi_a = best->xi_a;
    res.value = best->value;

    bool disagree = false;
    for (const auto& cand : res.candidates) {
        if (std::abs(cand.xi_a - res.xi_a) > search.agreement * res.xi_a) disagree = true;
        if (std::abs(cand.value - res.value) > search.agreement * std::abs(res.value)) {
            disagree = true;
        }
    }
    if (disagree) {
        std::ostringstream os;
        os << "multimodality: restarts disagree; candidates";
        for (const auto& cand : res.candidates) os << " (" << cand.xi_a << ", " << cand.value << ")";
        res.warnings.push_back(os.str());
    }
    return res;
}

double normalization_baseline(const SourceContext& ctx) {
    return find_peak(kBaselineXiP, PeakObjective::PairRate, ctx).value;
}

std::vector<TradeoffPoint> tradeoff_curve(const std::vector<double>& targets,
                                          const SourceContext& ctx,
                                          const TradeoffSearch& search) {
    for (double t : targets) {
        if (!(t > 0.0 && t < 1.0)) throw DomainError("tradeoff targets must lie in (0, 1)");
    }
    if (search.grid_points < 2) throw DomainError("tradeoff search needs at least 2 grid points");
    const double baseline = normalization_baseline(ctx);

    struct Config {
        double xi_p, xi_a, xi_b, eta_c, rate;
    };
    auto peak_config = [&](double xi_p) {
        const auto peak = find_peak(xi_p, PeakObjective::EtaC, ctx);
        const auto f = ctx.focus(xi_p, peak.xi_a);
        const auto r = emission_rates(ctx.crystal, ctx.waves, f, ctx.delta_k_value());
        return Config{xi_p, peak.xi_a, f.xi_b, peak.value, r.R_c};
    };

    const auto grid = log_grid(search.xi_p_min, search.xi_p_max, search.grid_points);
    std::vector<Config> table(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { table[i] = peak_config(grid[i]); });

    std::vector<TradeoffPoint> out;
    out.reserve(targets.size());
    for (double target : targets) {
        TradeoffPoint tp;
        tp.target = target;
        std::optional<Config> best;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (table[i].eta_c >= target && (!best || table[i].rate > best->rate)) {
                best = table[i];
                best_i = i;
            }
        }
        if (best) {
            // Refine towards each infeasible neighbour: the feasibility edge is
            // where the rate/η_c trade-off is sharpest.
            for (int side : {-1, 1}) {
                const auto j = static_cast<std::ptrdiff_t>(best_i) + side;
                if (j < 0 || j >= static_cast<std::ptrdiff_t>(table.size())) continue;
                if (table[static_cast<std::size_t>(j)].eta_c >= target) continue;
                double in = std::log(table[best_i].xi_p);
                double outside = std::log(table[static_cast<std::size_t>(j)].xi_p);
                for (int k = 0; k < search.refine_steps; ++k) {
                    const double mid = 0.5 * (in + outside);
                    const Config c = peak_config(std::exp(mid));
                    if (c.eta_c >= target) {
                        in = mid;
                        if (c.rate > best->rate) best = c;
                    } else {
                        outside = mid;
                    }
                }
            }
            tp.reachable = true;
            tp.xi_p = best->xi_p;
            tp.xi_a = best->xi_a;
            tp.xi_b = best->xi_b;
            tp.eta_c = best->eta_c;
            tp.rate = best->rate;
            tp.norm_rate = baseline > 0.0 ? best->rate / baseline : 0.0;
        }
        out.push_back(tp);
    }
    return out;
}

std::string to_string(RateQuantity q) {
    switch (q) {
        case RateQuantity::R_a: return "R_a";
        case RateQuantity::R_b: return "R_b";
        case RateQuantity::R_c: return "R_c";
        case RateQuantity::R_t: return "R_t";
    }
    return "?";
}

RateQuantity rate_quantity_from_string(const std::string& id) {
    if (id == "R_a") return RateQuantity::R_a;
    if (id == "R_b") return RateQuantity::R_b;
    if (id == "R_c") return RateQuantity::R_c;
    if (id == "R_t") return RateQuantity::R_t;
    throw ConfigError("unknown rate quantity '" + id + "' (expected R_a, R_b, R_c or R_t)");
}

double select_rate(const EmissionRates& rates, RateQuantity q) {
    switch (q) {
        case RateQuantity::R_a: return rates.R_a;
        case RateQuantity::R_b: return rates.R_b;
        case RateQuantity::R_c: return rates.R_c;
        case RateQuantity::R_t: return rates.R_t;
    }
    return 0.0;
}

DeffFit fit_deff(const std::vector<FitRecord>& records, const SourceContext& ctx) {
    if (records.empty()) throw DomainError("d_eff fit needs at least one record");
    if (std::none_of(records.begin(), records.end(),
                     [](const FitRecord& r) { return r.measured > 0.0; })) {
        throw DomainError("d_eff fit needs at least one positive measured rate");
    }
    const double dk = ctx.delta_k_value();
    std::vector<double> model(records.size());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        FocusConfig f = ctx.focus(r.xi_p, r.xi_a);
        if (r.xi_b) f.xi_b = *r.xi_b;
        model[i] = select_rate(emission_rates(ctx.crystal, ctx.waves, f, dk), r.quantity);
        num += r.measured * model[i];
        den += model[i] * model[i];
    }
    if (!(den > 0.0)) throw NumericalError("degenerate d_eff fit: all model rates are zero");
    if (!(num > 0.0)) throw NumericalError("degenerate d_eff fit: no positive overlap with model");

    DeffFit fit;
    const double scale = num / den;
    fit.d_eff_m_per_v = ctx.crystal.d_eff_m_per_v * std::sqrt(scale);
    fit.records_used = records.size();
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const double pred = scale * model[i];
        if (pred > 0.0) {
            const double rel = (records[i].measured - pred) / pred;
            ss += rel * rel;
            ++n;
        }
    }
    fit.rms_relative_residual = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
    return fit;
}

std::string sweep_csv_header() {
    return "xi_p,xi_a,xi_b,R_a,R_b,R_c,R_t,eta_c,norm_pair_rate,warnings";
}

std::string sweep_csv_row(const SweepRecord& r) {
    std::string s;
    for (double v : {r.xi_p, r.xi_a, r.xi_b, r.rates.R_a, r.rates.R_b, r.rates.R_c, r.rates.R_t,
                     r.eta_c, r.norm_pair_rate}) {
        s += format_double(v);
        s += ',';
    }
    s += csv_field(join(r.warnings, ';'));
    return s;
}

std::string sweep_to_csv(const std::vector<SweepRecord>& records) {
    std::string s = sweep_csv_header() + "\n";
    for (const auto& r : records) s += sweep_csv_row(r) + "\n";
    return s;
}

nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"xi_p", r.xi_p},
                       {"xi_a", r.xi_a},
                       {"xi_b", r.xi_b},
                       {"R_a", r.rates.R_a},
                       {"R_b", r.rates.R_b},
                       {"R_c", r.rates.R_c},
                       {"R_t", r.rates.R_t},
                       {"eta_c", r.eta_c},
                       {"norm_pair_rate", r.norm_pair_rate},
                       {"ok", r.ok},
                       {"warnings", r.warnings}});
    }
    return arr;
}

}  // namespace spdc
