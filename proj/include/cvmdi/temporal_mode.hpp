#pragma once
// Complex temporal waveforms of optical modes and their projection onto the
// mode measured by a homodyne detector. The detector's local oscillator
// defines which temporal mode is read out; the squared overlap
// eta_m = |<detector|signal>|^2 of the (unit-norm) waveforms quantifies how
// much of the signal lands in the measured mode. The orthogonal remainder
// behaves as vacuum, which is what apply_mismatch encodes at moment level.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace cvmdi::tm {

// Uniformly sampled complex envelope. The physical waveform is
// samples[k] * exp(-i * delta_omega * t_k) with t_k = t0 + k*dt, i.e. the
// envelope is stored in baseband and the carrier offset is kept symbolic so
// coarse grids stay valid for large detunings.
struct TemporalMode {
    double t0 = 0.0;                            // time of the first sample [s]
    double dt = 0.0;                            // sample spacing [s], > 0
    std::vector<std::complex<double>> samples;  // complex envelope
    double delta_omega = 0.0;                   // carrier offset [rad/s]
};

// A homodyne detector: local-oscillator envelope, its carrier frequency, and
// the calibration factor that normalizes the measured mode. sigma_cal <= 0
// means "derive from the LO energy", which is the usual calibrated case.
struct DetectorMode {
    TemporalMode lo;
    double omega_lo = 0.0;   // LO carrier angular frequency [rad/s]
    double sigma_cal = 0.0;  // explicit rescale factor; <= 0 -> sqrt(LO energy)
};

// First and second moment of one quadrature in shot-noise units.
struct QuadratureMoments {
    double mean = 0.0;
    double variance = 1.0;
};

// \int |xi(t)|^2 dt by the trapezoid rule.
double norm_squared(const TemporalMode& mode);

// Scale samples to unit L2 norm; relative phases unchanged. Throws
// std::invalid_argument on a degenerate (zero-energy) waveform or bad grid.
TemporalMode normalize(const TemporalMode& mode);

// The mode measured by the detector: LO envelope divided by the calibration
// factor, carrier offset increased by omega_lo (the measured mode rotates
// with the LO). The result must come out unit-norm; an explicit sigma_cal
// that does not normalize the LO is rejected.
TemporalMode detector_tm(const DetectorMode& det);

// eta_m = |\int conj(Xi(t)) xi(t) dt|^2 for two unit-norm modes, including
// the carrier beat factor exp(-i*(dw_signal - dw_detector)*t). Both inputs
// must already be normalized within 1e-6 (no silent renormalization). The
// waveforms are resampled onto the finer of the two grids by linear
// interpolation (zero outside support) and integrated by the trapezoid rule;
// the result is clamped to [0, 1].
double mode_match(const TemporalMode& signal, const TemporalMode& detector);

// Moment map of the projection onto the detected mode:
// mean -> sqrt(eta_m) * mean, variance -> eta_m * variance + (1 - eta_m).
QuadratureMoments apply_mismatch(double mean_in, double var_in, double eta_m);

// Built-in waveform families, returned normalized on the requested grid.
TemporalMode gaussian_mode(double t_center, double sigma, double t_lo, double t_hi,
                           std::size_t n, double delta_omega = 0.0);
TemporalMode raised_cosine_mode(double t_center, double width, double t_lo, double t_hi,
                                std::size_t n, double delta_omega = 0.0);
TemporalMode rectangular_mode(double t_start, double duration, std::size_t n,
                              double delta_omega = 0.0);

// CSV persistence with header "t,re,im" (seconds, dimensionless amplitude).
// The time column must be uniform within 1e-6 relative tolerance. The carrier
// offset is not stored in the file; callers set it separately.
TemporalMode load_waveform_csv(const std::string& path);
void save_waveform_csv(const TemporalMode& mode, const std::string& path);

}  // namespace cvmdi::tm
