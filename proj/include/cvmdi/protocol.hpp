#pragma once
// Maps the two-sender relay topology (lossy noisy links into an untrusted
// 50:50 relay with per-quadrature mode-matching coefficients and displacement
// gains) onto the equivalent one-way Gaussian channel, and assembles the
// two-mode covariance matrix of the retained sender mode and the displaced
// receiver mode.
//
// Conventions: quadrature ordering (x_A, p_A, x_B, p_B); the x sector is fed
// by the relay's difference output with coefficients (eta_A1, eta_B1), the p
// sector by the sum output with (eta_A2, eta_B2). Excess noise is referred to
// the detected temporal mode, so it is not scaled by the matching
// coefficients; the orthogonal waveform remainder enters as vacuum.

#include "cvmdi/gaussian.hpp"

namespace cvmdi::protocol {

// Residual homodyne detection noise at the relay, in shot-noise units per
// measured quadrature. The nonzero default is the calibrated effective noise
// floor of the modeled detectors; set eps_det = 0 for fully ideal readout.
inline constexpr double k_default_relay_detection_noise = 4.64e-5;

struct ChannelParams {
    double alpha = 0.2;  // fiber loss [dB/km]
    double L_AC = 0.0;   // sender-A -> relay length [km]
    double L_BC = 0.0;   // sender-B -> relay length [km]
    double eps_A = 0.0;  // excess noise on the A link [SNU]
    double eps_B = 0.0;  // excess noise on the B link [SNU]
    double eps_det = k_default_relay_detection_noise;  // relay readout noise [SNU]
    void validate() const;
};

// Link-level parameters after resolving fiber lengths to transmittances.
// eta_B may exceed 1 when it carries a statistical upper bound; physicality
// of the final state is enforced where the covariance matrix is assembled.
struct LinkParams {
    double eta_A = 1.0;
    double eta_B = 1.0;
    double eps_A = 0.0;
    double eps_B = 0.0;
    double eps_det = k_default_relay_detection_noise;
    void validate() const;
};
LinkParams to_links(const ChannelParams& channel);

struct ModeMatchingSet {
    double eta_A1 = 1.0;  // sender A, x sector (difference output)
    double eta_A2 = 1.0;  // sender A, p sector (sum output)
    double eta_B1 = 1.0;  // sender B, x sector
    double eta_B2 = 1.0;  // sender B, p sector
    ModeMatchingSet() = default;
    ModeMatchingSet(double a1, double a2, double b1, double b2)
        : eta_A1(a1), eta_A2(a2), eta_B1(b1), eta_B2(b2) {}
    // Convenience for the common per-sender symmetric assumption.
    static ModeMatchingSet symmetric(double eta_A, double eta_B) {
        return ModeMatchingSet(eta_A, eta_A, eta_B, eta_B);
    }
    void validate() const;  // each coefficient in [0, 1]
};

struct ProtocolParams {
    double V_A = 40.0;    // modulation + vacuum variance of sender A [SNU], > 1
    double V_B = 40.0;    // same for sender B
    double beta_R = 1.0;  // reconciliation efficiency, in (0, 1]
    void validate() const;
};

struct GainSettings {
    double g_x = 1.0;  // displacement gain applied to the x relay outcome
    double g_p = 1.0;  // displacement gain applied to the p relay outcome
    void validate() const;  // finite, >= 0 (0 means no displacement)
};

// Equivalent one-way channel per quadrature sector. T includes the sender-A
// matching coefficient; T_bar is the bare value multiplying the equivalent
// excess noise. T may exceed 1 (the relay-at-sender-A layout does), so the
// only bounds are positivity and finiteness.
struct EquivalentOneWay {
    double T_x = 1.0;
    double T_p = 1.0;
    double eps_x = 0.0;      // equivalent excess noise [SNU], >= 0
    double eps_p = 0.0;
    double T_bar_x = 1.0;    // T_x / eta_A1
    double T_bar_p = 1.0;    // T_p / eta_A2
    bool noise_clamped = false;  // negative floating-point residue clamped to 0
    void validate() const;
};

// 10^(-alpha L / 10); validates alpha > 0, L >= 0.
double transmittance(double alpha_db_per_km, double L_km);

// Noise-minimizing displacement gains:
// g_x = sqrt(2 (V_B - 1) / (eta_B1 eta_B (V_B + 1))), g_p with eta_B2.
// Throws when a matching coefficient (or eta_B) is 0: the gain diverges.
GainSettings optimal_gains(const ChannelParams& channel, const ModeMatchingSet& matching,
                           const ProtocolParams& protocol);
GainSettings optimal_gains(const LinkParams& links, const ModeMatchingSet& matching,
                           const ProtocolParams& protocol);

// Conversion between the prepare-and-measure gain k_B and the
// entanglement-based displacement gain: g = k_B sqrt((V_B - 1)/(V_B + 1)).
double pm_eb_gain(double k_B, double V_B);

// Equivalent one-way channel at arbitrary gains. Per sector:
//   T     = eta_A1 * (eta_A / 2) * g^2,
//   eps'  = eps_A + [eta_B (eps_B - 2 eta_B1) + 2 + 2 eps_det] / eta_A
//           + (sqrt(2) sqrt(V_B-1)/g - sqrt(eta_B1 eta_B) sqrt(V_B+1))^2 / eta_A.
// The square term vanishes at the optimal gains. eta_A = 0 (infinite loss) is
// rejected; negative floating-point residue in eps' clamps to 0 with a flag.
EquivalentOneWay equivalent_channel(const ChannelParams& channel, const ModeMatchingSet& matching,
                                    const ProtocolParams& protocol, const GainSettings& gains);
EquivalentOneWay equivalent_channel(const LinkParams& links, const ModeMatchingSet& matching,
                                    const ProtocolParams& protocol, const GainSettings& gains);

// Covariance matrix of (retained sender mode, displaced receiver mode):
//   diag blocks V_A I and diag(c, d), off-diagonal diag(a, b) with
//   a = sqrt(T_x (V_A^2 - 1)), b = -sqrt(T_p (V_A^2 - 1)),
//   c = T_x (V_A - 1) + 1 + T_bar_x eps'_x, d likewise for p.
// Physicality is validated; failure raises UnphysicalStateError with a
// parameter dump.
gauss::Mat4 covariance_matrix(const ProtocolParams& protocol, const EquivalentOneWay& eq);

}  // namespace cvmdi::protocol
