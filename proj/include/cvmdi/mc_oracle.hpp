#pragma once
// Monte-Carlo cross-check of the analytic covariance model by direct
// quadrature propagation: two-mode squeezed sources, lossy noisy links,
// projection onto the detector temporal mode (signal fraction sqrt(eta_m),
// orthogonal-remainder vacuum), 50:50 relay interference with noisy homodyne
// readout, and displacement of the kept receiver mode. All relations are
// linear, so Gaussian sampling reproduces the exact statistics.

#include <cstdint>
#include <string>

#include "cvmdi/protocol.hpp"

namespace cvmdi::mc {

struct CovEstimate {
    gauss::Mat4 cov = gauss::Mat4::Zero();  // sample covariance of (x_A, p_A, x_B', p_B')
    gauss::Mat4 se = gauss::Mat4::Zero();   // standard error of each entry
    double cond_var_x = 0.0;     // sample Var(x_A | receiver x-heterodyne outcome)
    double cond_var_x_se = 0.0;  // its standard error, approx cond_var * sqrt(2/shots)
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

// Samples the protocol shot by shot and returns the sample covariance of the
// retained sender mode and the displaced receiver mode, with standard errors
// se_ij = sqrt((C_ii C_jj + C_ij^2) / shots). Shots are processed in fixed
// 65536-shot chunks whose seeds derive deterministically from `seed`, and the
// chunk partials merge in index order: the result is bit-identical for a
// fixed seed regardless of worker count. workers = 0 uses all hardware
// threads. Requires shots >= 10^4 (below that the errors are meaningless).
CovEstimate propagate(const protocol::ChannelParams& channel,
                      const protocol::ModeMatchingSet& matching,
                      const protocol::ProtocolParams& protocol,
                      const protocol::GainSettings& gains,
                      std::uint64_t shots, std::uint64_t seed,
                      unsigned workers = 0);

struct OracleReport {
    gauss::Mat4 z = gauss::Mat4::Zero();  // per-entry z-scores
    double max_abs_z = 0.0;
    bool pass = false;  // all |z| <= 4
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::string text;  // printable comparison table naming failing entries
};

OracleReport oracle_report(const gauss::Mat4& analytic, const CovEstimate& estimate);

}  // namespace cvmdi::mc
