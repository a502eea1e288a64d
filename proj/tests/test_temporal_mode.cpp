// Waveform and mode-matching checks: norms and normalization, detector-mode
// construction, overlap coefficients against closed forms, the moment map,
// and CSV persistence.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cvmdi/temporal_mode.hpp"
#include "doctest.h"

using namespace cvmdi;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

tm::TemporalMode odd_gaussian(double t_lo, double t_hi, std::size_t n) {
    tm::TemporalMode mode;
    mode.t0 = t_lo;
    mode.dt = (t_hi - t_lo) / static_cast<double>(n - 1);
    mode.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t_lo + mode.dt * static_cast<double>(k);
        mode.samples[k] = t * std::exp(-0.5 * t * t);
    }
    return tm::normalize(mode);
}

}  // namespace

TEST_CASE("rectangular pulse normalizes to height 1/sqrt(duration)") {
    const double duration = 4.0;
    const tm::TemporalMode rect = tm::rectangular_mode(0.0, duration, 1001);
    CHECK(tm::norm_squared(rect) == doctest::Approx(1.0).epsilon(1e-12));
    const double expected = 1.0 / std::sqrt(duration);
    for (const auto& s : rect.samples) {
        CHECK(s.real() == doctest::Approx(expected).epsilon(1e-12));
        CHECK(s.imag() == 0.0);
    }
}

TEST_CASE("normalize: idempotence, scale invariance, degenerate input") {
    const tm::TemporalMode unit = tm::gaussian_mode(0.0, 1.0, -8.0, 8.0, 801);
    const tm::TemporalMode again = tm::normalize(unit);
    for (std::size_t k = 0; k < unit.samples.size(); ++k) {
        CHECK(std::abs(again.samples[k] - unit.samples[k]) <= 1e-15);
    }

    tm::TemporalMode scaled = unit;
    for (auto& s : scaled.samples) {
        s *= 5.0;
    }
    const tm::TemporalMode back = tm::normalize(scaled);
    for (std::size_t k = 0; k < unit.samples.size(); ++k) {
        CHECK(std::abs(back.samples[k] - unit.samples[k]) <= 1e-14);
    }

    tm::TemporalMode zero;
    zero.t0 = 0.0;
    zero.dt = 0.1;
    zero.samples.assign(64, {0.0, 0.0});
    CHECK_THROWS_AS(tm::normalize(zero), std::invalid_argument);

    tm::TemporalMode bad_grid;
    bad_grid.t0 = 0.0;
    bad_grid.dt = -1.0;
    bad_grid.samples.assign(4, {1.0, 0.0});
    CHECK_THROWS_AS(tm::normalize(bad_grid), std::invalid_argument);

    tm::TemporalMode too_short;
    too_short.t0 = 0.0;
    too_short.dt = 0.1;
    too_short.samples.assign(1, {1.0, 0.0});
    CHECK_THROWS_AS(tm::norm_squared(too_short), std::invalid_argument);
}

TEST_CASE("detector mode construction") {
    const tm::TemporalMode lo = tm::gaussian_mode(0.0, 1.0, -8.0, 8.0, 801);

    SUBCASE("unit-norm LO with zero carrier is the identity") {
        const tm::TemporalMode xi = tm::detector_tm({lo, 0.0, 0.0});
        CHECK(xi.delta_omega == 0.0);
        for (std::size_t k = 0; k < lo.samples.size(); ++k) {
            CHECK(std::abs(xi.samples[k] - lo.samples[k]) <= 1e-12);
        }
    }

    SUBCASE("LO amplitude scaling is absorbed by the calibration factor") {
        tm::TemporalMode strong = lo;
        for (auto& s : strong.samples) {
            s *= 7.0;
        }
        const tm::TemporalMode xi_weak = tm::detector_tm({lo, 0.0, 0.0});
        const tm::TemporalMode xi_strong = tm::detector_tm({strong, 0.0, 0.0});
        for (std::size_t k = 0; k < lo.samples.size(); ++k) {
            CHECK(std::abs(xi_strong.samples[k] - xi_weak.samples[k]) <= 1e-12);
        }
    }

    SUBCASE("nonzero LO carrier shifts the carrier offset, not the envelope") {
        const tm::TemporalMode xi = tm::detector_tm({lo, 2.5, 0.0});
        CHECK(xi.delta_omega == doctest::Approx(2.5).epsilon(1e-15));
        for (std::size_t k = 0; k < lo.samples.size(); ++k) {
            CHECK(std::abs(std::abs(xi.samples[k]) - std::abs(lo.samples[k])) <= 1e-12);
        }
    }

    SUBCASE("an explicit calibration factor must actually normalize") {
        CHECK_THROWS_AS(tm::detector_tm({lo, 0.0, 3.0}), std::invalid_argument);
        tm::TemporalMode zero = lo;
        for (auto& s : zero.samples) {
            s = 0.0;
        }
        CHECK_THROWS_AS(tm::detector_tm({zero, 0.0, 0.0}), std::invalid_argument);
    }
}

TEST_CASE("mode_match: identical, orthogonal, and closed-form Gaussian pairs") {
    const tm::TemporalMode g1 = tm::gaussian_mode(0.0, 1.0, -12.0, 12.0, 4001);
    CHECK(tm::mode_match(g1, g1) == doctest::Approx(1.0).epsilon(1e-12));

    const tm::TemporalMode odd = odd_gaussian(-12.0, 12.0, 4001);
    CHECK(tm::mode_match(odd, g1) <= 1e-12);

    // Width-mismatched Gaussians: eta = 2 s1 s2 / (s1^2 + s2^2).
    const tm::TemporalMode g2 = tm::gaussian_mode(0.0, 2.0, -12.0, 12.0, 4001);
    CHECK(tm::mode_match(g1, g2) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("mode_match rejects non-normalized inputs instead of renormalizing") {
    const tm::TemporalMode g1 = tm::gaussian_mode(0.0, 1.0, -10.0, 10.0, 1001);
    tm::TemporalMode big = g1;
    for (auto& s : big.samples) {
        s *= 1.5;
    }
    CHECK_THROWS_AS(tm::mode_match(big, g1), std::invalid_argument);
    CHECK_THROWS_AS(tm::mode_match(g1, big), std::invalid_argument);
}

TEST_CASE("mode_match symmetry and phase invariance") {
    // Chirped (complex) envelope to make conjugation matter.
    tm::TemporalMode chirp = tm::gaussian_mode(0.0, 1.0, -10.0, 10.0, 2001);
    for (std::size_t k = 0; k < chirp.samples.size(); ++k) {
        const double t = chirp.t0 + chirp.dt * static_cast<double>(k);
        chirp.samples[k] *= std::exp(std::complex<double>(0.0, 0.3 * t * t));
    }
    chirp = tm::normalize(chirp);
    tm::TemporalMode other = tm::gaussian_mode(0.3, 1.4, -10.0, 10.0, 2001);
    other.delta_omega = 0.7;

    const double forward = tm::mode_match(chirp, other);
    const double backward = tm::mode_match(other, chirp);
    CHECK(forward == doctest::Approx(backward).epsilon(1e-12));

    tm::TemporalMode phased = chirp;
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, 1.234));
    for (auto& s : phased.samples) {
        s *= phase;
    }
    CHECK(tm::mode_match(phased, other) == doctest::Approx(forward).epsilon(1e-12));
}

TEST_CASE("carrier detuning reduces the Gaussian overlap monotonically") {
    const tm::TemporalMode det = tm::gaussian_mode(0.0, 1.0, -12.0, 12.0, 3001);
    double previous = 1.0;
    for (const double detuning : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        tm::TemporalMode sig = tm::gaussian_mode(0.0, 1.0, -12.0, 12.0, 3001, detuning);
        const double eta = tm::mode_match(sig, det);
        CHECK(eta < previous);
        previous = eta;
    }
    CHECK(previous > 0.0);
}

TEST_CASE("mode_match on different grids converges under refinement") {
    // Rectangle vs Gaussian has a genuine O(dt^2) quadrature signal.
    const tm::TemporalMode gauss_ref = tm::gaussian_mode(2.0, 1.0, -6.0, 10.0, 2049);
    const tm::TemporalMode rect_coarse = tm::rectangular_mode(0.0, 4.0, 129);
    const tm::TemporalMode rect_mid = tm::rectangular_mode(0.0, 4.0, 257);
    const tm::TemporalMode rect_fine = tm::rectangular_mode(0.0, 4.0, 513);
    const double eta_coarse = tm::mode_match(rect_coarse, gauss_ref);
    const double eta_mid = tm::mode_match(rect_mid, gauss_ref);
    const double eta_fine = tm::mode_match(rect_fine, gauss_ref);
    CHECK(std::abs(eta_fine - eta_mid) <= 4.0 * std::abs(eta_mid - eta_coarse) + 1e-12);
}

TEST_CASE("apply_mismatch: moment map") {
    const auto out = tm::apply_mismatch(2.0, 5.0, 0.95);
    CHECK(out.mean == doctest::Approx(1.9493588689617927).epsilon(1e-14));
    CHECK(out.variance == doctest::Approx(4.8).epsilon(1e-14));

    const auto ident = tm::apply_mismatch(1.5, 3.0, 1.0);
    CHECK(ident.mean == 1.5);
    CHECK(ident.variance == 3.0);

    const auto vacuum = tm::apply_mismatch(1.5, 3.0, 0.0);
    CHECK(vacuum.mean == 0.0);
    CHECK(vacuum.variance == 1.0);

    for (const double eta : {0.1, 0.3, 0.5, 0.77, 0.999}) {
        CHECK(tm::apply_mismatch(0.4, 1.0, eta).variance ==
              doctest::Approx(1.0).epsilon(1e-15));
    }

    CHECK_THROWS_AS(tm::apply_mismatch(0.0, 1.0, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(tm::apply_mismatch(0.0, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(tm::apply_mismatch(0.0, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("waveform CSV round trip and error reporting") {
    tm::TemporalMode mode = tm::gaussian_mode(0.5, 1.2, -6.0, 6.0, 257);
    for (std::size_t k = 0; k < mode.samples.size(); ++k) {
        const double t = mode.t0 + mode.dt * static_cast<double>(k);
        mode.samples[k] *= std::exp(std::complex<double>(0.0, 0.2 * t));
    }
    const auto path = temp_file("cvmdi_tm_roundtrip.csv");
    tm::save_waveform_csv(mode, path.string());
    const tm::TemporalMode loaded = tm::load_waveform_csv(path.string());
    REQUIRE(loaded.samples.size() == mode.samples.size());
    CHECK(loaded.t0 == doctest::Approx(mode.t0).epsilon(1e-15));
    CHECK(loaded.dt == doctest::Approx(mode.dt).epsilon(1e-12));
    for (std::size_t k = 0; k < mode.samples.size(); ++k) {
        CHECK(std::abs(loaded.samples[k] - mode.samples[k]) <= 1e-15);
    }
    std::remove(path.string().c_str());

    const auto bad_header = temp_file("cvmdi_tm_bad_header.csv");
    {
        std::ofstream out(bad_header);
        out << "time,real,imag\n0,1,0\n1,1,0\n";
    }
    CHECK_THROWS_WITH_AS(tm::load_waveform_csv(bad_header.string()),
                         doctest::Contains("header"), std::invalid_argument);
    std::remove(bad_header.string().c_str());

    const auto nonuniform = temp_file("cvmdi_tm_nonuniform.csv");
    {
        std::ofstream out(nonuniform);
        out << "t,re,im\n0,1,0\n1,1,0\n2.5,1,0\n";
    }
    CHECK_THROWS_WITH_AS(tm::load_waveform_csv(nonuniform.string()),
                         doctest::Contains("uniform"), std::invalid_argument);
    std::remove(nonuniform.string().c_str());

    const auto bad_row = temp_file("cvmdi_tm_bad_row.csv");
    {
        std::ofstream out(bad_row);
        out << "t,re,im\n0,1,0\n1,oops,0\n";
    }
    CHECK_THROWS_WITH_AS(tm::load_waveform_csv(bad_row.string()),
                         doctest::Contains("row 3"), std::invalid_argument);
    std::remove(bad_row.string().c_str());

    CHECK_THROWS_AS(tm::load_waveform_csv("/nonexistent/path/wave.csv"),
                    std::invalid_argument);
}
