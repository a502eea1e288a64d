#pragma once
// Experiment drivers over scenarios: distance sweeps, maximum-distance
// bisection, the (eta_A, eta_B) matching grid at fixed distance, and
// equivalent-excess-noise curves. All evaluations are pure; grid and sweep
// points run in parallel with output rows in deterministic order. Every CSV
// starts with "# config=<hash>" binding it to the resolved configuration.

#include <iosfwd>
#include <vector>

#include "cvmdi/scenario.hpp"

namespace cvmdi::experiments {

struct SweepRow {
    double L_km = 0.0;
    keyrate::KeyRateResult asymptotic;
    std::optional<keyrate::KeyRateResult> finite;  // present when requested
};

// Key rate vs distance over the scenario's sweep range. Finite-size columns
// are produced when the scenario carries FiniteSizeParams or when
// force_finite_size is set (then defaults apply if the section is absent).
std::vector<SweepRow> sweep_distance(const Scenario& s, bool force_finite_size = false);

// Largest distance with positive (unclamped) key rate, bisected to 1e-4 km.
// Uses the finite-size rate when the scenario carries FiniteSizeParams.
// Throws NoKeyError when the rate is already non-positive at zero distance.
double max_distance(const Scenario& s);

struct GridPoint {
    double eta_A = 1.0;  // per-sender symmetric matching coefficient
    double eta_B = 1.0;
    double K = 0.0;
};

// Key rate over the symmetric matching grid at the scenario's fixed distance.
std::vector<GridPoint> grid_sweep(const Scenario& s);

struct NoiseCurveRow {
    double L_km = 0.0;
    std::vector<double> eps_x;  // one value per configured eta_B coefficient
};

// Equivalent excess noise (x sector, optimal gains) vs distance, one column
// per eta_B matching coefficient in the scenario's noise_curve_eta_B list.
std::vector<NoiseCurveRow> excess_noise_curve(const Scenario& s);

void write_sweep_csv(std::ostream& out, const Scenario& s, const std::vector<SweepRow>& rows);
void write_grid_csv(std::ostream& out, const Scenario& s, const std::vector<GridPoint>& rows);
void write_noise_csv(std::ostream& out, const Scenario& s, const std::vector<NoiseCurveRow>& rows);
void write_max_distance_csv(std::ostream& out, const Scenario& s, double km);

}  // namespace cvmdi::experiments
