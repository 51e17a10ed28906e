#include <cmath>

#include "doctest.h"
#include "spdc/constants.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/errors.hpp"

using namespace spdc;

namespace {

// Pinned by tests/oracle/reference_values.py (mpmath, exact derivative).
constexpr double kRefNy780 = 1.75795285041655;
constexpr double kRefNz1560 = 1.81579383132358;
constexpr double kRefNy1560 = 1.73389152803833;
constexpr double kRefNgZ1560 = 1.85247767126691;
constexpr double kRefNgY1560 = 1.7639493732251;
constexpr double kRefNgY780 = 1.81009030482407;
constexpr double kRefDkBare = -136053.752660094;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SellmeierModel quadratic(double a, double b) {
    return SellmeierModel("quad", Axis::Y, SellmeierForm::Quadratic, {a, b}, {0.2e-6, 5e-6});
}

AxisModels constant_models(double n) {
    AxisModels m;
    m.set(constant_model(n, Axis::Y));
    m.set(constant_model(n, Axis::Z));
    return m;
}

}  // namespace

TEST_CASE("refractive index of a constant model") {
    const auto m = constant_model(1.5);
    CHECK(refractive_index(m, 500e-9) == 1.5);
    CHECK(refractive_index(m, 1560e-9) == 1.5);
}

TEST_CASE("KTP indices match the independent evaluation") {
    const auto y = ktp_y_konig2004();
    const auto z = ktp_z_fradkin1999();
    const double ny780 = refractive_index(y, 780e-9);
    CHECK(ny780 >= 1.745);
    CHECK(ny780 <= 1.765);
    CHECK(rel(ny780, kRefNy780) < 1e-12);
    CHECK(rel(refractive_index(z, 1560e-9), kRefNz1560) < 1e-12);
    CHECK(rel(refractive_index(y, 1560e-9), kRefNy1560) < 1e-12);
}

TEST_CASE("out-of-range wavelength names the wavelength") {
    const auto y = ktp_y_konig2004();
    try {
        refractive_index(y, 5e-6);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(std::string(e.what()).find("5000 nm") != std::string::npos);
    }
    CHECK_THROWS_AS(refractive_index(y, 300e-9), RangeError);
}

TEST_CASE("embedded KTP models are monotone and finite on their range") {
    for (const auto& m : {ktp_y_konig2004(), ktp_z_fradkin1999()}) {
        const double lo = m.range().min_m;
        const double hi = m.range().max_m;
        double prev = refractive_index(m, lo);
        for (int i = 1; i <= 2000; ++i) {
            const double l = lo + (hi - lo) * i / 2000.0;
            const double n = refractive_index(m, l);
            REQUIRE(std::isfinite(n));
            CHECK(n > 1.0);
            CHECK(n < prev);  // normal dispersion, no pole inside the range
            prev = n;
        }
    }
}

TEST_CASE("group index") {
    SUBCASE("constant model") { CHECK(group_index(constant_model(1.5), 1e-6) == doctest::Approx(1.5).epsilon(1e-12)); }
    SUBCASE("quadratic model against the closed form a - b l^2") {
        const double a = 1.7;
        const double b = 0.013;
        const auto m = quadratic(a, b);
        for (double l_um : {0.5, 0.78, 1.0, 1.56, 3.0}) {
            const double expected = a - b * l_um * l_um;
            CHECK(rel(group_index(m, l_um * 1e-6), expected) < 1e-8);
        }
    }
    SUBCASE("KTP at 1560 nm is birefringent in group index") {
        const double ng_z = group_index(ktp_z_fradkin1999(), 1560e-9);
        const double ng_y = group_index(ktp_y_konig2004(), 1560e-9);
        CHECK(std::abs(ng_z - ng_y) > 0.05);
        CHECK(rel(ng_z, kRefNgZ1560) < 1e-8);
        CHECK(rel(ng_y, kRefNgY1560) < 1e-8);
        CHECK(rel(group_index(ktp_y_konig2004(), 780e-9), kRefNgY780) < 1e-8);
    }
    SUBCASE("finite difference converges at second order") {
        // Non-quadratic model so that the truncation error is visible.
        const SellmeierModel m("pole", Axis::Z, SellmeierForm::PoleIr, {2.1, 0.9, 0.05, -0.01},
                               {0.4e-6, 3.5e-6});
        const double l = 1.0e-6;
        const double exact = group_index(m, l, 1e-7);
        const double e1 = std::abs(group_index(m, l, 4e-3) - exact);
        const double e2 = std::abs(group_index(m, l, 2e-3) - exact);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("too close to the boundary") {
        const auto y = ktp_y_konig2004();
        CHECK_THROWS_AS(group_index(y, y.range().max_m), RangeError);
    }
}

TEST_CASE("phase mismatch") {
    SUBCASE("dispersionless degenerate triple has zero bare mismatch") {
        const auto models = constant_models(1.6);
        const auto waves = make_wave_triple(reference_crystal(), models, 780e-9, 1560e-9);
        const auto pm = phase_mismatch(reference_crystal(), waves);
        CHECK(std::abs(pm.bare) < 1e-9 * waves.k_p);
    }
    SUBCASE("KTP type-II 780 -> 1560 + 1560 matches the 46.1 um grating") {
        const auto crystal = reference_crystal();
        const auto waves = reference_waves(crystal, AxisModels::ktp());
        const auto pm = phase_mismatch(crystal, waves);
        const double grating = 2.0 * constants::kPi / 46.1e-6;
        CHECK(pm.grating == doctest::Approx(grating).epsilon(1e-12));
        CHECK(rel(pm.bare, kRefDkBare) < 1e-9);
        // The grating compensates the magnitude; the sign is fixed by n_z > n_y.
        CHECK(std::abs(std::abs(pm.bare) - grating) / grating < 0.05);
        CHECK(std::abs(pm.residual) / grating < 0.05);
    }
    SUBCASE("exchanging the a and b photons leaves the mismatch unchanged") {
        auto crystal = reference_crystal();
        const auto models = AxisModels::ktp();
        const auto w1 = make_wave_triple(crystal, models, 780e-9, 1500e-9);
        std::swap(crystal.a_axis, crystal.b_axis);
        const auto w2 = make_wave_triple(crystal, models, 780e-9, w1.lambda_b, w1.lambda_a);
        CHECK(phase_mismatch(crystal, w2).bare ==
              doctest::Approx(phase_mismatch(reference_crystal(), w1).bare).epsilon(1e-12));
    }
}

TEST_CASE("wave triple") {
    const auto crystal = reference_crystal();
    const auto models = AxisModels::ktp();
    const auto w = make_wave_triple(crystal, models, 780e-9, 1500e-9);
    CHECK(1.0 / w.lambda_p == doctest::Approx(1.0 / w.lambda_a + 1.0 / w.lambda_b).epsilon(1e-12));
    CHECK(w.k_p > 0.0);
    CHECK(w.k_a > 0.0);
    CHECK(w.k_b > 0.0);
    CHECK_THROWS_AS(make_wave_triple(crystal, models, 780e-9, 1560e-9, 1500e-9), DomainError);
    CHECK_NOTHROW(make_wave_triple(crystal, models, 780e-9, 1560e-9, 1560e-9));

    AxisModels only_y;
    only_y.set(ktp_y_konig2004());
    CHECK_THROWS_AS(make_wave_triple(crystal, only_y, 780e-9, 1560e-9), ConfigError);
}

TEST_CASE("crystal spec validation") {
    auto c = reference_crystal();
    CHECK_NOTHROW(c.validate());
    c.b_axis = c.a_axis;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = reference_crystal();
    c.length_m = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = reference_crystal();
    c.poling_period_m = -1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("Sellmeier JSON round trip and errors") {
    const auto z = ktp_z_fradkin1999();
    const auto back = sellmeier_from_json(sellmeier_to_json(z));
    CHECK(back.name() == z.name());
    CHECK(back.axis() == z.axis());
    CHECK(back.coefficients() == z.coefficients());
    CHECK(refractive_index(back, 1560e-9) == refractive_index(z, 1560e-9));

    const auto inline_model = nlohmann::json::parse(
        R"({"form": "quadratic", "axis": "Y", "coefficients": [1.7, 0.01], "range_m": [4e-7, 4e-6]})");
    CHECK(refractive_index(sellmeier_from_json(inline_model), 1e-6) ==
          doctest::Approx(1.71).epsilon(1e-14));

    CHECK_THROWS_AS(sellmeier_from_json(nlohmann::json::parse(R"({"form": "quadratic"})")),
                    ConfigError);
    CHECK_THROWS_AS(sellmeier_from_json(nlohmann::json::parse(
                        R"({"form": "pole_ir", "axis": "Y", "coefficients": [1, 2, 3], "range_m": [1e-7, 1e-6]})")),
                    ConfigError);
    CHECK_THROWS_AS(builtin_model("no_such_model"), ConfigError);
    CHECK_THROWS_AS(axis_from_string("Q"), ConfigError);
}
