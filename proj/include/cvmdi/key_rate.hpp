#pragma once
// Secret key rates for the relay protocol with reverse reconciliation:
// asymptotic K = beta_R I(A:B) - chi(B:E), and the finite-size variant
// K = (n/N) [beta_R I - chi_f - Delta(n)] where chi_f is evaluated on the
// worst-case covariance matrix built from parameter-estimation confidence
// bounds and Delta(n) is the privacy-amplification penalty.

#include <optional>

#include "cvmdi/protocol.hpp"

namespace cvmdi::keyrate {

enum class Regime { asymptotic, finite_size };

struct KeyRateResult {
    double I_AB = 0.0;    // mutual information [bits/use]
    double chi_BE = 0.0;  // Holevo bound [bits/use]
    double K = 0.0;       // key rate, clamped at 0 [bits/use]
    double K_raw = 0.0;   // signed value before clamping
    bool no_key = false;  // true when K_raw <= 0
    Regime regime = Regime::asymptotic;
    protocol::GainSettings gains;   // displacement gains used
    protocol::EquivalentOneWay eq;  // equivalent channel at the true parameters
    gauss::Mat4 cov = gauss::Mat4::Identity();  // matrix chi was evaluated on
    gauss::SymplecticSpectrum spectrum;         // spectrum of cov
    double nu_conditional = 1.0;                // conditional symplectic eigenvalue
    // Finite-size diagnostics (meaningful when regime == finite_size):
    double delta_n = 0.0;  // privacy-amplification penalty [bits/use]
    double n_key = 0.0;    // signals left for key generation, n = N - m
};

// Asymptotic key rate with noise-minimizing gains (or explicit gains).
KeyRateResult asymptotic_key_rate(const protocol::ChannelParams& channel,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol);
KeyRateResult asymptotic_key_rate(const protocol::LinkParams& links,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol);
KeyRateResult asymptotic_key_rate(const protocol::LinkParams& links,
                                  const protocol::ModeMatchingSet& matching,
                                  const protocol::ProtocolParams& protocol,
                                  const protocol::GainSettings& gains);

struct FiniteSizeParams {
    double N = 1e8;         // total exchanged signals
    double m = 5e7;         // signals consumed by parameter estimation
    double eps_bar = 1e-10; // smoothing parameter
    double eps_PA = 1e-10;  // privacy-amplification failure probability
    double eps_PE = 1e-10;  // estimation failure probability (two-sided)
    int dim_HX = 2;         // raw-key alphabet dimension entering Delta(n)
    // The B-link amplitude bound direction: false = lower confidence bound
    // (default), true = the conservative upper-bound variant.
    bool use_upper_tB = false;
    void validate() const;  // 0 < m < N, epsilons in (0,1), dim_HX >= 1
};

// Worst-case channel estimates from m estimation samples per link. Per link,
// with sigma^2 = 1 + eta*eps and modulation variance V - 1:
//   t = sqrt(eta) -/+ z sqrt(sigma^2 / (m (V - 1))),
//   sigma^2_max = sigma^2 (1 + z sqrt(2/m)),
// where z is the two-sided Gaussian quantile for eps_PE. The worst-case link
// set (eta = t^2, eps = (sigma^2_max - 1)/t^2) is pushed through the
// equivalent-channel pipeline at the true-parameter gains to build gamma_f.
struct FiniteSizeEstimates {
    double tA_min = 0.0;
    double tB_min = 0.0;
    double tB_max = 0.0;
    double sigmaA2_max = 1.0;
    double sigmaB2_max = 1.0;
    double t_min = 0.0;        // worst-case bare equivalent transmittance (x sector)
    double tmin_epsmax = 0.0;  // worst-case equivalent noise product T_bar*eps (x sector)
    protocol::LinkParams worst_links;
    protocol::GainSettings gains;  // fixed true-parameter gains
    gauss::Mat4 gamma_f = gauss::Mat4::Identity();
    double z = 0.0;  // quantile used
};

// z such that P(|Z| > z) = eps for standard normal Z; eps in (0, 1).
double two_sided_gaussian_quantile(double eps);

// Delta(n) = (2 dim_HX + 3) sqrt(log2(2/eps_bar)/n) + (2/n) log2(1/eps_PA).
double finite_size_delta(double n, const FiniteSizeParams& fs);

FiniteSizeEstimates worst_case_estimates(const protocol::ChannelParams& channel,
                                         const protocol::ModeMatchingSet& matching,
                                         const protocol::ProtocolParams& protocol,
                                         const FiniteSizeParams& fs);

// I(A:B) from the true-parameter matrix, chi from gamma_f, penalty Delta(n),
// all scaled by n/N; clamped at 0 with the raw value preserved.
KeyRateResult finite_size_key_rate(const protocol::ChannelParams& channel,
                                   const protocol::ModeMatchingSet& matching,
                                   const protocol::ProtocolParams& protocol,
                                   const FiniteSizeParams& fs);

}  // namespace cvmdi::keyrate
