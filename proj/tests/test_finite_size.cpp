// Finite-size machinery: the Gaussian quantile, the privacy-amplification
// penalty, worst-case parameter estimates, collapse to the asymptotic rate for
// huge block sizes, and the expected monotonicities of the finite-size rate.

#include <cmath>
#include <limits>

#include "cvmdi/key_rate.hpp"
#include "doctest.h"

using namespace cvmdi;
using keyrate::FiniteSizeParams;
using protocol::ChannelParams;
using protocol::ModeMatchingSet;
using protocol::ProtocolParams;

namespace {

ChannelParams relay_at_b(double L_km) {
    ChannelParams ch;
    ch.L_AC = L_km;
    ch.L_BC = 0.0;
    ch.eps_A = ch.eps_B = 0.002;
    return ch;
}

}  // namespace

TEST_CASE("two-sided Gaussian quantile") {
    const double z10 = keyrate::two_sided_gaussian_quantile(1e-10);
    CHECK(z10 == doctest::Approx(6.46695108724051617).epsilon(1e-9));
    // Round trip through the defining tail probability.
    CHECK(std::erfc(z10 / std::sqrt(2.0)) == doctest::Approx(1e-10).epsilon(1e-9));
    // The familiar 95% two-sided value.
    CHECK(keyrate::two_sided_gaussian_quantile(0.05) ==
          doctest::Approx(1.959963985).epsilon(1e-6));
    // Monotone: rarer failures demand larger z.
    CHECK(keyrate::two_sided_gaussian_quantile(1e-12) > z10);
    CHECK_THROWS_AS(keyrate::two_sided_gaussian_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(keyrate::two_sided_gaussian_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(keyrate::two_sided_gaussian_quantile(-0.1), std::invalid_argument);
}

TEST_CASE("privacy-amplification penalty") {
    const FiniteSizeParams fs;  // eps_bar = eps_PA = 1e-10, dim_HX = 2
    CHECK(keyrate::finite_size_delta(5e7, fs) ==
          doctest::Approx(0.00579226093539737903).epsilon(1e-12));

    // Direct formula audit at another block size.
    const double n = 1e6;
    const double by_hand = 7.0 * std::sqrt(std::log2(2.0 / 1e-10) / n) +
                           (2.0 / n) * std::log2(1.0 / 1e-10);
    CHECK(keyrate::finite_size_delta(n, fs) == doctest::Approx(by_hand).epsilon(1e-15));

    // Decreasing in n, with the sqrt term dominating: quadrupling n halves it.
    CHECK(keyrate::finite_size_delta(1e8, fs) < keyrate::finite_size_delta(1e7, fs));
    const double ratio =
        keyrate::finite_size_delta(4e8, fs) / keyrate::finite_size_delta(1e8, fs);
    CHECK(ratio > 0.49);
    CHECK(ratio < 0.51);
}

TEST_CASE("finite-size parameter validation") {
    FiniteSizeParams fs;
    CHECK_NOTHROW(fs.validate());
    fs.m = fs.N;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
    fs = FiniteSizeParams{};
    fs.m = 0.0;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
    fs = FiniteSizeParams{};
    fs.eps_bar = 0.0;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
    fs = FiniteSizeParams{};
    fs.eps_PA = 1.0;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
    fs = FiniteSizeParams{};
    fs.eps_PE = -1e-3;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
    fs = FiniteSizeParams{};
    fs.dim_HX = 0;
    CHECK_THROWS_AS(fs.validate(), std::invalid_argument);
}

TEST_CASE("worst-case estimates bracket the true parameters") {
    const ProtocolParams prot;
    const ChannelParams ch = relay_at_b(40.0);
    const auto matching = ModeMatchingSet::symmetric(1.0, 1.0);
    const FiniteSizeParams fs;  // N = 1e8, m = 5e7
    const auto est = keyrate::worst_case_estimates(ch, matching, prot, fs);
    const auto links = protocol::to_links(ch);

    CHECK(est.z == doctest::Approx(6.46695108724051617).epsilon(1e-9));
    CHECK(est.tA_min > 0.0);
    CHECK(est.tA_min < std::sqrt(links.eta_A));
    CHECK(est.tB_min < std::sqrt(links.eta_B));
    CHECK(est.tB_max > std::sqrt(links.eta_B));
    CHECK(est.sigmaA2_max > 1.0 + links.eta_A * links.eps_A);
    CHECK(est.worst_links.eta_A < links.eta_A);
    CHECK(est.worst_links.eps_A > links.eps_A);

    // Gains are frozen at the true-parameter optimum.
    const auto opt = protocol::optimal_gains(ch, matching, prot);
    CHECK(est.gains.g_x == opt.g_x);
    CHECK(est.gains.g_p == opt.g_p);

    // The pessimistic matrix carries less correlation and more adversarial
    // information than the true one.
    const auto truth = keyrate::asymptotic_key_rate(ch, matching, prot);
    CHECK(est.gamma_f(0, 2) < truth.cov(0, 2));
    CHECK(gauss::holevo_bound_rr(est.gamma_f) > truth.chi_BE);
}

TEST_CASE("huge blocks collapse to the asymptotic rate") {
    const ProtocolParams prot;
    const ChannelParams ch = relay_at_b(10.0);
    const auto matching = ModeMatchingSet::symmetric(0.95, 0.95);
    FiniteSizeParams fs;
    fs.N = 2e14;
    fs.m = 1e14;
    const auto fin = keyrate::finite_size_key_rate(ch, matching, prot, fs);
    const auto asym = keyrate::asymptotic_key_rate(ch, matching, prot);
    // Half the signals go to estimation, so n/N = 1/2 and 2 K_fin -> K_asym.
    CHECK(std::abs(2.0 * fin.K - asym.K) <= 1e-4 * asym.K);
    CHECK(fin.regime == keyrate::Regime::finite_size);
    CHECK(fin.n_key == doctest::Approx(1e14));
    CHECK(fin.delta_n == doctest::Approx(keyrate::finite_size_delta(1e14, fs)));
}

TEST_CASE("finite-size rate never exceeds the asymptotic rate") {
    const ProtocolParams prot;
    const auto matching = ModeMatchingSet::symmetric(1.0, 0.97);
    const FiniteSizeParams fs;
    for (const double L : {5.0, 15.0, 25.0}) {
        const auto fin = keyrate::finite_size_key_rate(relay_at_b(L), matching, prot, fs);
        const auto asym = keyrate::asymptotic_key_rate(relay_at_b(L), matching, prot);
        CHECK(fin.K <= asym.K);
    }
}

TEST_CASE("finite-size rate monotonicities") {
    const ProtocolParams prot;
    const auto matching = ModeMatchingSet::symmetric(1.0, 1.0);
    const FiniteSizeParams fs;

    // Longer fiber, less key.
    const double k10 = keyrate::finite_size_key_rate(relay_at_b(10.0), matching, prot, fs).K;
    const double k20 = keyrate::finite_size_key_rate(relay_at_b(20.0), matching, prot, fs).K;
    const double k30 = keyrate::finite_size_key_rate(relay_at_b(30.0), matching, prot, fs).K;
    CHECK(k10 > k20);
    CHECK(k20 > k30);

    // Stricter estimation confidence, less key.
    FiniteSizeParams lax = fs;
    lax.eps_PE = 1e-6;
    const auto ch = relay_at_b(20.0);
    CHECK(keyrate::finite_size_key_rate(ch, matching, prot, lax).K >
          keyrate::finite_size_key_rate(ch, matching, prot, fs).K);

    // Worse receiver-side matching, less key.
    double prev = std::numeric_limits<double>::infinity();
    for (const double eta_b : {1.0, 0.99, 0.95}) {
        const double k = keyrate::finite_size_key_rate(
                             ch, ModeMatchingSet::symmetric(1.0, eta_b), prot, fs)
                             .K;
        CHECK(k < prev);
        prev = k;
    }
}

TEST_CASE("rate is more sensitive to receiver-side matching") {
    const ProtocolParams prot;
    const FiniteSizeParams fs;
    const ChannelParams ch = relay_at_b(10.0);
    const double h = 0.005;
    const auto k = [&](double ea, double eb) {
        return keyrate::finite_size_key_rate(ch, ModeMatchingSet::symmetric(ea, eb), prot, fs)
            .K;
    };
    const double dk_da = (k(0.97 + h, 1.0) - k(0.97 - h, 1.0)) / (2.0 * h);
    const double dk_db = (k(1.0, 0.97 + h) - k(1.0, 0.97 - h)) / (2.0 * h);
    CHECK(dk_da >= 0.0);
    CHECK(dk_db > dk_da);
}

TEST_CASE("upper-bound B-link variant") {
    const ProtocolParams prot;
    const auto matching = ModeMatchingSet::symmetric(1.0, 1.0);
    FiniteSizeParams lower;  // default
    FiniteSizeParams upper;
    upper.use_upper_tB = true;

    const ChannelParams ch = relay_at_b(40.0);
    const auto est_lo = keyrate::worst_case_estimates(ch, matching, prot, lower);
    const auto est_up = keyrate::worst_case_estimates(ch, matching, prot, upper);
    const auto links = protocol::to_links(ch);
    CHECK(est_lo.worst_links.eta_B < links.eta_B);
    CHECK(est_up.worst_links.eta_B > links.eta_B);
    CHECK(est_up.worst_links.eta_B > est_lo.worst_links.eta_B);

    // The two variants straddle L = 69 km: the default bound runs out of key
    // there while the upper-bound variant still delivers one.
    const ChannelParams edge = relay_at_b(69.0);
    const auto k_lo = keyrate::finite_size_key_rate(edge, matching, prot, lower);
    const auto k_up = keyrate::finite_size_key_rate(edge, matching, prot, upper);
    CHECK(k_lo.no_key);
    CHECK(k_up.K > 0.0);
}

TEST_CASE("estimation failure on starved samples") {
    const ProtocolParams prot;
    const auto matching = ModeMatchingSet::symmetric(1.0, 1.0);
    FiniteSizeParams fs;
    fs.N = 100.0;
    fs.m = 10.0;
    CHECK_THROWS_AS(
        keyrate::finite_size_key_rate(relay_at_b(60.0), matching, prot, fs),
        EstimationFailureError);
}
