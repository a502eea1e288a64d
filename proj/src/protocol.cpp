// Reduction of the two-sender relay topology to an equivalent one-way
// Gaussian channel and assembly of the resulting two-mode covariance matrix.

#include "cvmdi/protocol.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cvmdi::protocol {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw std::invalid_argument(message);
    }
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void ChannelParams::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "ChannelParams: alpha must be > 0 dB/km");
    require(finite_nonneg(L_AC), "ChannelParams: L_AC must be finite and >= 0 km");
    require(finite_nonneg(L_BC), "ChannelParams: L_BC must be finite and >= 0 km");
    require(finite_nonneg(eps_A), "ChannelParams: eps_A must be finite and >= 0");
    require(finite_nonneg(eps_B), "ChannelParams: eps_B must be finite and >= 0");
    require(finite_nonneg(eps_det), "ChannelParams: eps_det must be finite and >= 0");
}

void LinkParams::validate() const {
    require(std::isfinite(eta_A) && eta_A >= 0.0 && eta_A <= 1.0,
            "LinkParams: eta_A must lie in [0, 1]");
    // eta_B may exceed 1: the finite-size upper transmittance bound does.
    require(finite_nonneg(eta_B), "LinkParams: eta_B must be finite and >= 0");
    require(finite_nonneg(eps_A), "LinkParams: eps_A must be finite and >= 0");
    require(finite_nonneg(eps_B), "LinkParams: eps_B must be finite and >= 0");
    require(finite_nonneg(eps_det), "LinkParams: eps_det must be finite and >= 0");
}

LinkParams to_links(const ChannelParams& channel) {
    channel.validate();
    LinkParams links;
    links.eta_A = transmittance(channel.alpha, channel.L_AC);
    links.eta_B = transmittance(channel.alpha, channel.L_BC);
    links.eps_A = channel.eps_A;
    links.eps_B = channel.eps_B;
    links.eps_det = channel.eps_det;
    return links;
}

void ModeMatchingSet::validate() const {
    auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    require(in_unit(eta_A1), "ModeMatchingSet: eta_A1 must lie in [0, 1]");
    require(in_unit(eta_A2), "ModeMatchingSet: eta_A2 must lie in [0, 1]");
    require(in_unit(eta_B1), "ModeMatchingSet: eta_B1 must lie in [0, 1]");
    require(in_unit(eta_B2), "ModeMatchingSet: eta_B2 must lie in [0, 1]");
}

void ProtocolParams::validate() const {
    require(std::isfinite(V_A) && V_A > 1.0, "ProtocolParams: V_A must be > 1 SNU");
    require(std::isfinite(V_B) && V_B > 1.0, "ProtocolParams: V_B must be > 1 SNU");
    require(std::isfinite(beta_R) && beta_R > 0.0 && beta_R <= 1.0,
            "ProtocolParams: beta_R must lie in (0, 1]");
}

void GainSettings::validate() const {
    require(finite_nonneg(g_x), "GainSettings: g_x must be finite and >= 0");
    require(finite_nonneg(g_p), "GainSettings: g_p must be finite and >= 0");
}

void EquivalentOneWay::validate() const {
    require(std::isfinite(T_x) && T_x > 0.0, "EquivalentOneWay: T_x must be finite and > 0");
    require(std::isfinite(T_p) && T_p > 0.0, "EquivalentOneWay: T_p must be finite and > 0");
    require(finite_nonneg(eps_x), "EquivalentOneWay: eps_x must be finite and >= 0");
    require(finite_nonneg(eps_p), "EquivalentOneWay: eps_p must be finite and >= 0");
    require(std::isfinite(T_bar_x) && T_bar_x > 0.0,
            "EquivalentOneWay: T_bar_x must be finite and > 0");
    require(std::isfinite(T_bar_p) && T_bar_p > 0.0,
            "EquivalentOneWay: T_bar_p must be finite and > 0");
}

double transmittance(double alpha_db_per_km, double L_km) {
    require(std::isfinite(alpha_db_per_km) && alpha_db_per_km > 0.0,
            "transmittance: alpha must be > 0 dB/km");
    require(finite_nonneg(L_km), "transmittance: distance must be finite and >= 0 km");
    return std::pow(10.0, -alpha_db_per_km * L_km / 10.0);
}

GainSettings optimal_gains(const ChannelParams& channel, const ModeMatchingSet& matching,
                           const ProtocolParams& protocol) {
    return optimal_gains(to_links(channel), matching, protocol);
}

GainSettings optimal_gains(const LinkParams& links, const ModeMatchingSet& matching,
                           const ProtocolParams& protocol) {
    links.validate();
    matching.validate();
    protocol.validate();
    const double ratio = (protocol.V_B - 1.0) / (protocol.V_B + 1.0);
    GainSettings g;
    auto one = [&](double em_b, const char* sector) {
        const double denom = em_b * links.eta_B;
        if (!(denom > 0.0)) {
            throw std::invalid_argument(std::string("optimal_gains: divergent gain in the ") +
                                        sector +
                                        " sector (matching coefficient or link "
                                        "transmittance is 0)");
        }
        return std::sqrt(2.0 * ratio / denom);
    };
    g.g_x = one(matching.eta_B1, "x");
    g.g_p = one(matching.eta_B2, "p");
    return g;
}

double pm_eb_gain(double k_B, double V_B) {
    require(std::isfinite(V_B) && V_B > 1.0, "pm_eb_gain: V_B must be > 1 SNU");
    require(std::isfinite(k_B) && k_B >= 0.0, "pm_eb_gain: k_B must be finite and >= 0");
    return k_B * std::sqrt((V_B - 1.0) / (V_B + 1.0));
}

EquivalentOneWay equivalent_channel(const ChannelParams& channel,
                                    const ModeMatchingSet& matching,
                                    const ProtocolParams& protocol, const GainSettings& gains) {
    return equivalent_channel(to_links(channel), matching, protocol, gains);
}

EquivalentOneWay equivalent_channel(const LinkParams& links, const ModeMatchingSet& matching,
                                    const ProtocolParams& protocol, const GainSettings& gains) {
    links.validate();
    matching.validate();
    protocol.validate();
    gains.validate();
    require(links.eta_A > 0.0,
            "equivalent_channel: eta_A = 0 means infinite loss on the A link");
    require(gains.g_x > 0.0 && gains.g_p > 0.0,
            "equivalent_channel: displacement gains must be positive to form the "
            "equivalent channel");

    EquivalentOneWay eq;
    bool clamped = false;
    auto one = [&](double em_a, double em_b, double g, double& t, double& t_bar,
                   double& eps) {
        t_bar = links.eta_A * g * g / 2.0;
        t = em_a * t_bar;
        const double bracket =
            links.eta_B * (links.eps_B - 2.0 * em_b) + 2.0 + 2.0 * links.eps_det;
        const double root = std::sqrt(2.0) * std::sqrt(protocol.V_B - 1.0) / g -
                            std::sqrt(em_b * links.eta_B) * std::sqrt(protocol.V_B + 1.0);
        eps = links.eps_A + (bracket + root * root) / links.eta_A;
        if (eps < 0.0) {
            eps = 0.0;
            clamped = true;
        }
    };
    one(matching.eta_A1, matching.eta_B1, gains.g_x, eq.T_x, eq.T_bar_x, eq.eps_x);
    one(matching.eta_A2, matching.eta_B2, gains.g_p, eq.T_p, eq.T_bar_p, eq.eps_p);
    eq.noise_clamped = clamped;
    eq.validate();
    return eq;
}

gauss::Mat4 covariance_matrix(const ProtocolParams& protocol, const EquivalentOneWay& eq) {
    protocol.validate();
    eq.validate();
    const double k2 = protocol.V_A * protocol.V_A - 1.0;
    const double a = std::sqrt(eq.T_x * k2);
    const double b = -std::sqrt(eq.T_p * k2);
    const double c = eq.T_x * (protocol.V_A - 1.0) + 1.0 + eq.T_bar_x * eq.eps_x;
    const double d = eq.T_p * (protocol.V_A - 1.0) + 1.0 + eq.T_bar_p * eq.eps_p;
    gauss::Mat4 gamma = gauss::Mat4::Zero();
    gamma(0, 0) = gamma(1, 1) = protocol.V_A;
    gamma(2, 2) = c;
    gamma(3, 3) = d;
    gamma(0, 2) = gamma(2, 0) = a;
    gamma(1, 3) = gamma(3, 1) = b;
    if (!gauss::is_physical(gamma)) {
        std::ostringstream msg;
        msg << "covariance_matrix: assembled state is unphysical (V_A=" << protocol.V_A
            << ", T_x=" << eq.T_x << ", T_p=" << eq.T_p << ", eps_x=" << eq.eps_x
            << ", eps_p=" << eq.eps_p << ")";
        throw UnphysicalStateError(msg.str());
    }
    return gamma;
}

}  // namespace cvmdi::protocol
