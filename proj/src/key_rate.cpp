// Asymptotic and finite-size secret key rates with reverse reconciliation.
// The finite-size path fixes the displacement gains at the true-parameter
// optimum, rebuilds the channel from worst-case confidence bounds for the
// Holevo term, and subtracts the privacy-amplification penalty.

#include "cvmdi/key_rate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvmdi::keyrate {
namespace {

KeyRateResult assemble(const protocol::ProtocolParams& prot,
                       const protocol::GainSettings& gains,
                       const protocol::EquivalentOneWay& eq_true,
                       const gauss::Mat4& cov_for_chi, double beta_I_minus_penalties,
                       double I_AB, double chi, Regime regime) {
    KeyRateResult r;
    r.I_AB = I_AB;
    r.chi_BE = chi;
    r.K_raw = beta_I_minus_penalties;
    r.no_key = !(r.K_raw > 0.0);
    r.K = r.no_key ? 0.0 : r.K_raw;
    r.regime = regime;
    r.gains = gains;
    r.eq = eq_true;
    r.cov = cov_for_chi;
    r.spectrum = gauss::symplectic_eigenvalues(cov_for_chi);
    const gauss::Mat2 cond = gauss::condition_on_heterodyne(cov_for_chi, gauss::Party::B);
    r.nu_conditional = gauss::symplectic_eigenvalues(cond).nu[0];
    (void)prot;
    return r;
}

}  // namespace

KeyRateResult asymptotic_key_rate(const protocol::ChannelParams& channel,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol) {
    return asymptotic_key_rate(protocol::to_links(channel), matching, protocol);
}

KeyRateResult asymptotic_key_rate(const protocol::LinkParams& links,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol) {
    return asymptotic_key_rate(links, matching, protocol,
                               optimal_gains(links, matching, protocol));
}

KeyRateResult asymptotic_key_rate(const protocol::LinkParams& links,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol,
                                  const protocol::GainSettings& gains) {
    const protocol::EquivalentOneWay eq =
        protocol::equivalent_channel(links, matching, protocol, gains);
    const gauss::Mat4 cov = protocol::covariance_matrix(protocol, eq);
    const double i_ab = gauss::mutual_information(cov);
    const double chi = gauss::holevo_bound_rr(cov);
    return assemble(protocol, gains, eq, cov, protocol.beta_R * i_ab - chi, i_ab, chi,
                    Regime::asymptotic);
}

void FiniteSizeParams::validate() const {
    auto prob = [](double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; };
    if (!(std::isfinite(N) && N > 0.0)) {
        throw std::invalid_argument("FiniteSizeParams: N must be finite and > 0");
    }
    if (!(std::isfinite(m) && m > 0.0 && m < N)) {
        throw std::invalid_argument("FiniteSizeParams: need 0 < m < N");
    }
    if (!prob(eps_bar) || !prob(eps_PA) || !prob(eps_PE)) {
        throw std::invalid_argument(
            "FiniteSizeParams: eps_bar, eps_PA, eps_PE must lie in (0, 1)");
    }
    if (dim_HX < 1) {
        throw std::invalid_argument("FiniteSizeParams: dim_HX must be >= 1");
    }
}

double two_sided_gaussian_quantile(double eps) {
    if (!(std::isfinite(eps) && eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("two_sided_gaussian_quantile: eps must lie in (0, 1)");
    }
    // P(|Z| > z) = erfc(z / sqrt(2)) is strictly decreasing; bisect it.
    const double sqrt2 = std::sqrt(2.0);
    double lo = 0.0;
    double hi = 45.0;  // erfc(45/sqrt(2)) ~ 1e-441, below any representable eps
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / sqrt2) > eps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double finite_size_delta(double n, const FiniteSizeParams& fs) {
    fs.validate();
    if (!(std::isfinite(n) && n > 0.0)) {
        throw std::invalid_argument("finite_size_delta: n must be finite and > 0");
    }
    return (2.0 * fs.dim_HX + 3.0) * std::sqrt(std::log2(2.0 / fs.eps_bar) / n) +
           (2.0 / n) * std::log2(1.0 / fs.eps_PA);
}

FiniteSizeEstimates worst_case_estimates(const protocol::ChannelParams& channel,
                                         const protocol::ModeMatchingSet& matching,
                                         const protocol::ProtocolParams& protocol,
                                         const FiniteSizeParams& fs) {
    fs.validate();
    const protocol::LinkParams links = protocol::to_links(channel);
    FiniteSizeEstimates est;
    est.gains = protocol::optimal_gains(links, matching, protocol);
    est.z = two_sided_gaussian_quantile(fs.eps_PE);

    const double sigma2_scale = 1.0 + est.z * std::sqrt(2.0 / fs.m);
    auto bounds = [&](double eta, double eps, double v_mod, double& t_min, double& t_max,
                      double& sigma2_max) {
        const double sigma2 = 1.0 + eta * eps;
        const double half_width = est.z * std::sqrt(sigma2 / (fs.m * v_mod));
        t_min = std::sqrt(eta) - half_width;
        t_max = std::sqrt(eta) + half_width;
        sigma2_max = sigma2 * sigma2_scale;
    };
    double tA_max = 0.0;
    bounds(links.eta_A, links.eps_A, protocol.V_A - 1.0, est.tA_min, tA_max,
           est.sigmaA2_max);
    bounds(links.eta_B, links.eps_B, protocol.V_B - 1.0, est.tB_min, est.tB_max,
           est.sigmaB2_max);
    if (!(est.tA_min > 0.0) || !(est.tB_min > 0.0)) {
        throw EstimationFailureError(
            "worst_case_estimates: confidence interval for a link amplitude reaches 0 "
            "(m = " +
            std::to_string(fs.m) + " estimation samples is too few at this loss)");
    }

    est.worst_links = links;
    est.worst_links.eta_A = est.tA_min * est.tA_min;
    const double tB = fs.use_upper_tB ? est.tB_max : est.tB_min;
    est.worst_links.eta_B = tB * tB;
    est.worst_links.eps_A = (est.sigmaA2_max - 1.0) / est.worst_links.eta_A;
    est.worst_links.eps_B = (est.sigmaB2_max - 1.0) / est.worst_links.eta_B;

    const protocol::EquivalentOneWay eq_wc =
        protocol::equivalent_channel(est.worst_links, matching, protocol, est.gains);
    est.t_min = eq_wc.T_bar_x;
    est.tmin_epsmax = eq_wc.T_bar_x * eq_wc.eps_x;
    est.gamma_f = protocol::covariance_matrix(protocol, eq_wc);
    return est;
}

KeyRateResult finite_size_key_rate(const protocol::ChannelParams& channel,
                                   const protocol::ModeMatchingSet& matching,
                                   const protocol::ProtocolParams& protocol,
                                   const FiniteSizeParams& fs) {
    const FiniteSizeEstimates est = worst_case_estimates(channel, matching, protocol, fs);
    const protocol::LinkParams links = protocol::to_links(channel);
    const protocol::EquivalentOneWay eq_true =
        protocol::equivalent_channel(links, matching, protocol, est.gains);
    const gauss::Mat4 cov_true = protocol::covariance_matrix(protocol, eq_true);
    const double i_ab = gauss::mutual_information(cov_true);
    const double chi_f = gauss::holevo_bound_rr(est.gamma_f);

    const double n = fs.N - fs.m;
    const double delta = finite_size_delta(n, fs);
    const double k_raw = (n / fs.N) * (protocol.beta_R * i_ab - chi_f - delta);

    KeyRateResult r = assemble(protocol, est.gains, eq_true, est.gamma_f, k_raw, i_ab,
                               chi_f, Regime::finite_size);
    r.delta_n = delta;
    r.n_key = n;
    return r;
}

}  // namespace cvmdi::keyrate
