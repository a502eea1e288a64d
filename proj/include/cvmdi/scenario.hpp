#pragma once
// Scenario configuration: one JSON file fully determines one experiment
// (topology, channel, protocol, mode matching - numeric or waveform-derived -
// finite-size parameters, sweep/grid ranges). Loading resolves waveforms to
// numeric matching coefficients and validates everything up front; a stable
// hash of the resolved configuration is embedded in every CSV for provenance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvmdi/key_rate.hpp"

namespace cvmdi::experiments {

enum class Topology {
    symmetric,         // relay midway: L_AC = L_BC = L/2, sweeps total L
    charlie_at_alice,  // relay at sender A: L_AC = 0, sweeps L_BC
    charlie_at_bob,    // relay at sender B: L_BC = 0, sweeps L_AC
    explicit_legs,     // both legs given explicitly; distance sweeps disabled
};

std::string to_string(Topology t);

struct SweepSpec {
    double from_km = 0.0;
    double to_km = 60.0;
    double step_km = 0.1;
};

struct GridSpec {
    double eta_min = 0.9;
    double eta_max = 1.0;
    int points = 101;  // per axis
};

struct OracleSpec {
    std::uint64_t shots = 1000000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = hardware concurrency
};

// Waveform-derived matching: signal and LO waveform files plus carriers.
// Resolved to numbers at load time; kept for provenance in the config hash.
struct WaveformMatching {
    std::string signal_A;
    std::string signal_B;
    std::string lo;
    double omega_lo = 0.0;
    double delta_omega_A = 0.0;
    double delta_omega_B = 0.0;
};

struct Scenario {
    Topology topology = Topology::symmetric;
    double distance_km = 0.0;  // total or single-leg distance, by topology
    protocol::ChannelParams channel;  // L_AC/L_BC meaningful for explicit_legs only
    protocol::ModeMatchingSet matching;
    protocol::ProtocolParams protocol;
    std::optional<keyrate::FiniteSizeParams> finite_size;
    std::optional<WaveformMatching> waveforms;
    SweepSpec sweep;
    GridSpec grid;
    OracleSpec mc;
    std::vector<double> noise_curve_eta_B = {1.0, 0.99, 0.95, 0.9};
    void validate() const;
};

// Channel parameters with the fiber legs resolved for the given distance
// according to the topology. explicit_legs ignores L and uses the stored legs.
protocol::ChannelParams channel_at(const Scenario& s, double L_km);
protocol::ChannelParams channel_at(const Scenario& s);  // at s.distance_km

// Parse and validate a scenario file. Unknown keys, missing required fields,
// type mismatches, and out-of-range values throw std::invalid_argument with
// the offending field path in the message. Waveform paths resolve relative to
// the config file's directory.
Scenario load_scenario(const std::string& path);

// Canonical JSON of the resolved configuration (text) and its FNV-1a 64-bit
// hash (16 hex digits) used as the CSV provenance comment.
std::string canonical_config(const Scenario& s);
std::string config_hash(const Scenario& s);

}  // namespace cvmdi::experiments
