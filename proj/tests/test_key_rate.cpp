// Asymptotic key-rate checks: zero crossings at independently computed
// maximum distances, internal consistency of the result diagnostics, clamping
// behavior, and the advantage of the noise-minimizing gains near threshold.

#include <cmath>

#include "cvmdi/key_rate.hpp"
#include "doctest.h"

using namespace cvmdi;
using protocol::ChannelParams;
using protocol::GainSettings;
using protocol::ModeMatchingSet;
using protocol::ProtocolParams;

namespace {

// Relay colocated with sender B: the whole span is the A -> relay fiber.
ChannelParams relay_at_b(double L_km) {
    ChannelParams ch;
    ch.L_AC = L_km;
    ch.L_BC = 0.0;
    ch.eps_A = ch.eps_B = 0.002;
    return ch;
}

keyrate::KeyRateResult rate_at(double L_km, double eta_m_B) {
    const ProtocolParams prot;  // V_A = V_B = 40, beta_R = 1
    return keyrate::asymptotic_key_rate(relay_at_b(L_km),
                                        ModeMatchingSet::symmetric(1.0, eta_m_B), prot);
}

}  // namespace

TEST_CASE("key rate crosses zero at the known maximum distances") {
    // Roots located by an independent bisection to ~1e-4 km; the rate must
    // change sign inside a +/- 0.05 km bracket around each.
    const double root_ideal = 87.9602355957;
    CHECK(rate_at(root_ideal - 0.05, 1.0).K_raw > 0.0);
    CHECK(rate_at(root_ideal + 0.05, 1.0).K_raw < 0.0);

    const double root_mismatched = 18.5043029785;
    CHECK(rate_at(root_mismatched - 0.05, 0.95).K_raw > 0.0);
    CHECK(rate_at(root_mismatched + 0.05, 0.95).K_raw < 0.0);
}

TEST_CASE("key rate is clamped at zero with the raw value preserved") {
    const auto dead = rate_at(200.0, 1.0);
    CHECK(dead.no_key);
    CHECK(dead.K == 0.0);
    CHECK(dead.K_raw < 0.0);

    const auto live = rate_at(10.0, 1.0);
    CHECK_FALSE(live.no_key);
    CHECK(live.K > 0.0);
    CHECK(live.K == live.K_raw);
}

TEST_CASE("raw rate equals beta_R * I - chi") {
    ProtocolParams prot;
    prot.beta_R = 0.95;
    const ChannelParams ch = relay_at_b(20.0);
    const auto matching = ModeMatchingSet::symmetric(0.98, 0.97);
    const auto r = keyrate::asymptotic_key_rate(ch, matching, prot);
    CHECK(std::abs(r.K_raw - (0.95 * r.I_AB - r.chi_BE)) <= 1e-14);
    CHECK(r.K == std::max(0.0, r.K_raw));
    CHECK(r.I_AB > 0.0);
    CHECK(r.chi_BE >= 0.0);
}

TEST_CASE("result diagnostics are internally consistent") {
    const ProtocolParams prot;
    const ChannelParams ch = relay_at_b(15.0);
    const auto matching = ModeMatchingSet::symmetric(1.0, 0.95);
    const auto r = keyrate::asymptotic_key_rate(ch, matching, prot);

    CHECK(r.regime == keyrate::Regime::asymptotic);

    // Gains default to the noise-minimizing ones.
    const GainSettings opt = protocol::optimal_gains(ch, matching, prot);
    CHECK(r.gains.g_x == opt.g_x);
    CHECK(r.gains.g_p == opt.g_p);

    // The stored equivalent channel matches a direct evaluation.
    const auto eq = protocol::equivalent_channel(ch, matching, prot, opt);
    CHECK(std::abs(r.eq.T_x - eq.T_x) <= 1e-15);
    CHECK(std::abs(r.eq.eps_x - eq.eps_x) <= 1e-14);

    // The stored matrix reproduces the covariance assembly, and the spectrum
    // entries are physical and sorted.
    const gauss::Mat4 cov = protocol::covariance_matrix(prot, eq);
    CHECK((r.cov - cov).cwiseAbs().maxCoeff() <= 1e-14 * prot.V_A);
    REQUIRE(r.spectrum.nu.size() == 2);
    CHECK(r.spectrum.nu[0] >= r.spectrum.nu[1]);
    CHECK(r.spectrum.nu[1] >= 1.0);
    CHECK(r.nu_conditional >= 1.0);

    // Finite-size fields stay at their inert defaults.
    CHECK(r.delta_n == 0.0);
    CHECK(r.n_key == 0.0);
}

TEST_CASE("link-parameter overload agrees with the fiber-length one") {
    const ProtocolParams prot;
    const ChannelParams ch = relay_at_b(30.0);
    const auto matching = ModeMatchingSet::symmetric(0.97, 0.99);
    const auto from_lengths = keyrate::asymptotic_key_rate(ch, matching, prot);
    const auto from_links =
        keyrate::asymptotic_key_rate(protocol::to_links(ch), matching, prot);
    CHECK(from_links.K_raw == doctest::Approx(from_lengths.K_raw).epsilon(1e-14));
    CHECK(from_links.I_AB == doctest::Approx(from_lengths.I_AB).epsilon(1e-14));
}

TEST_CASE("noise-minimizing gains beat detuned gains near threshold") {
    // Near the maximum distance the equivalent excess noise dominates, so a
    // 30% gain detuning (which revives the quadratic noise term) must destroy
    // the key while the optimal setting still delivers one.
    const ProtocolParams prot;
    const ChannelParams ch = relay_at_b(80.0);
    const auto matching = ModeMatchingSet::symmetric(1.0, 1.0);
    const GainSettings opt = protocol::optimal_gains(ch, matching, prot);
    const auto links = protocol::to_links(ch);

    const auto at_opt = keyrate::asymptotic_key_rate(links, matching, prot, opt);
    CHECK(at_opt.K > 0.0);

    for (const double detune : {0.7, 1.3}) {
        GainSettings off;
        off.g_x = detune * opt.g_x;
        off.g_p = detune * opt.g_p;
        const auto at_off = keyrate::asymptotic_key_rate(links, matching, prot, off);
        CHECK(at_off.K_raw < at_opt.K_raw);
        CHECK(at_off.no_key);
    }
}
