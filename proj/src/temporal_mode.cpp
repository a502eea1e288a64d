// Waveform arithmetic on uniformly sampled complex envelopes: trapezoid
// norms, overlap integrals with carrier beat factors, built-in pulse shapes,
// and CSV persistence.

#include "cvmdi/temporal_mode.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cvmdi::tm {
namespace {

constexpr double k_norm_tol = 1e-6;  // accepted |norm^2 - 1| for "unit-norm" inputs

void check_grid(const TemporalMode& mode) {
    if (!(mode.dt > 0.0) || !std::isfinite(mode.dt)) {
        throw std::invalid_argument("temporal mode: dt must be positive and finite");
    }
    if (mode.samples.size() < 2) {
        throw std::invalid_argument("temporal mode: need at least 2 samples");
    }
    if (!std::isfinite(mode.t0)) {
        throw std::invalid_argument("temporal mode: t0 must be finite");
    }
}

double end_time(const TemporalMode& mode) {
    return mode.t0 + mode.dt * static_cast<double>(mode.samples.size() - 1);
}

// Linear interpolation of the baseband envelope; zero outside the support.
std::complex<double> sample_at(const TemporalMode& mode, double t) {
    const double u = (t - mode.t0) / mode.dt;
    if (u < 0.0 || u > static_cast<double>(mode.samples.size() - 1)) {
        return {0.0, 0.0};
    }
    const auto lo = static_cast<std::size_t>(u);
    if (lo + 1 >= mode.samples.size()) {
        return mode.samples.back();
    }
    const double w = u - static_cast<double>(lo);
    return (1.0 - w) * mode.samples[lo] + w * mode.samples[lo + 1];
}

bool same_grid(const TemporalMode& a, const TemporalMode& b) {
    return a.samples.size() == b.samples.size() && a.t0 == b.t0 && a.dt == b.dt;
}

// Trapezoid integral of f(t_k) over a uniform grid given point values.
std::complex<double> trapezoid(const std::vector<std::complex<double>>& values, double dt) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        acc += values[k] + values[k + 1];
    }
    return acc * (0.5 * dt);
}

}  // namespace

double norm_squared(const TemporalMode& mode) {
    check_grid(mode);
    // |exp(-i*dw*t)| = 1, so the carrier never contributes to the norm.
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < mode.samples.size(); ++k) {
        acc += std::norm(mode.samples[k]) + std::norm(mode.samples[k + 1]);
    }
    return 0.5 * mode.dt * acc;
}

TemporalMode normalize(const TemporalMode& mode) {
    const double n2 = norm_squared(mode);
    if (!(n2 > 1e-30) || !std::isfinite(n2)) {
        throw std::invalid_argument("normalize: degenerate waveform (zero energy)");
    }
    TemporalMode out = mode;
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& s : out.samples) {
        s *= scale;
    }
    return out;
}

TemporalMode detector_tm(const DetectorMode& det) {
    check_grid(det.lo);
    const double energy = norm_squared(det.lo);
    if (!(energy > 1e-30) || !std::isfinite(energy)) {
        throw std::invalid_argument("detector_tm: degenerate local-oscillator waveform");
    }
    const double sigma = det.sigma_cal > 0.0 ? det.sigma_cal : std::sqrt(energy);
    TemporalMode out = det.lo;
    for (auto& s : out.samples) {
        s /= sigma;
    }
    out.delta_omega = det.lo.delta_omega + det.omega_lo;
    const double n2 = norm_squared(out);
    if (std::abs(n2 - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "detector_tm: sigma_cal does not normalize the local oscillator (|Xi|^2 = " +
            std::to_string(n2) + ")");
    }
    return out;
}

double mode_match(const TemporalMode& signal, const TemporalMode& detector) {
    check_grid(signal);
    check_grid(detector);
    const double ns = norm_squared(signal);
    const double nd = norm_squared(detector);
    if (std::abs(ns - 1.0) > k_norm_tol) {
        throw std::invalid_argument("mode_match: signal is not unit-norm (|xi|^2 = " +
                                    std::to_string(ns) + "); call normalize() first");
    }
    if (std::abs(nd - 1.0) > k_norm_tol) {
        throw std::invalid_argument("mode_match: detector mode is not unit-norm (|Xi|^2 = " +
                                    std::to_string(nd) + "); call normalize() first");
    }

    const double beat = signal.delta_omega - detector.delta_omega;
    std::complex<double> overlap;
    if (same_grid(signal, detector)) {
        std::vector<std::complex<double>> vals(signal.samples.size());
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double t = signal.t0 + signal.dt * static_cast<double>(k);
            vals[k] = std::conj(detector.samples[k]) * signal.samples[k] *
                      std::exp(std::complex<double>(0.0, -beat * t));
        }
        overlap = trapezoid(vals, signal.dt);
    } else {
        // Common grid: union of supports, finer of the two spacings. The
        // integrand vanishes wherever either factor has no support.
        const double dt = std::min(signal.dt, detector.dt);
        const double t_lo = std::min(signal.t0, detector.t0);
        const double t_hi = std::max(end_time(signal), end_time(detector));
        const auto n = static_cast<std::size_t>(std::ceil((t_hi - t_lo) / dt - 1e-12)) + 1;
        std::vector<std::complex<double>> vals(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = t_lo + dt * static_cast<double>(k);
            vals[k] = std::conj(sample_at(detector, t)) * sample_at(signal, t) *
                      std::exp(std::complex<double>(0.0, -beat * t));
        }
        overlap = trapezoid(vals, dt);
    }
    return std::clamp(std::norm(overlap), 0.0, 1.0);
}

QuadratureMoments apply_mismatch(double mean_in, double var_in, double eta_m) {
    if (!(eta_m >= 0.0 && eta_m <= 1.0)) {
        throw std::invalid_argument("apply_mismatch: eta_m must lie in [0, 1], got " +
                                    std::to_string(eta_m));
    }
    if (!(var_in >= 0.0) || !std::isfinite(var_in)) {
        throw std::invalid_argument("apply_mismatch: variance must be finite and >= 0");
    }
    return {std::sqrt(eta_m) * mean_in, eta_m * var_in + (1.0 - eta_m)};
}

TemporalMode gaussian_mode(double t_center, double sigma, double t_lo, double t_hi,
                           std::size_t n, double delta_omega) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_mode: sigma must be positive");
    }
    if (n < 2 || !(t_hi > t_lo)) {
        throw std::invalid_argument("gaussian_mode: need t_hi > t_lo and n >= 2");
    }
    TemporalMode out;
    out.t0 = t_lo;
    out.dt = (t_hi - t_lo) / static_cast<double>(n - 1);
    out.delta_omega = delta_omega;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t_lo + out.dt * static_cast<double>(k);
        const double u = (t - t_center) / sigma;
        out.samples[k] = std::exp(-0.5 * u * u);
    }
    return normalize(out);
}

TemporalMode raised_cosine_mode(double t_center, double width, double t_lo, double t_hi,
                                std::size_t n, double delta_omega) {
    if (!(width > 0.0)) {
        throw std::invalid_argument("raised_cosine_mode: width must be positive");
    }
    if (n < 2 || !(t_hi > t_lo)) {
        throw std::invalid_argument("raised_cosine_mode: need t_hi > t_lo and n >= 2");
    }
    TemporalMode out;
    out.t0 = t_lo;
    out.dt = (t_hi - t_lo) / static_cast<double>(n - 1);
    out.delta_omega = delta_omega;
    out.samples.resize(n);
    const double pi = std::acos(-1.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t_lo + out.dt * static_cast<double>(k);
        const double u = (t - t_center) / width;
        out.samples[k] = std::abs(u) <= 0.5 ? 0.5 * (1.0 + std::cos(2.0 * pi * u)) : 0.0;
    }
    return normalize(out);
}

TemporalMode rectangular_mode(double t_start, double duration, std::size_t n,
                              double delta_omega) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("rectangular_mode: duration must be positive");
    }
    if (n < 2) {
        throw std::invalid_argument("rectangular_mode: need n >= 2");
    }
    TemporalMode out;
    out.t0 = t_start;
    out.dt = duration / static_cast<double>(n - 1);
    out.delta_omega = delta_omega;
    out.samples.assign(n, {1.0, 0.0});
    return normalize(out);
}

TemporalMode load_waveform_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("waveform csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("waveform csv: '" + path + "' is empty");
    }
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(),
                               [](unsigned char c) { return std::isspace(c) != 0; }),
                s.end());
        return s;
    };
    if (strip(line) != "t,re,im") {
        throw std::invalid_argument("waveform csv: '" + path +
                                    "' must start with header 't,re,im'");
    }
    std::vector<double> t;
    std::vector<std::complex<double>> samples;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) {
            continue;
        }
        std::istringstream ss(line);
        double tv = 0.0;
        double re = 0.0;
        double im = 0.0;
        char c1 = 0;
        char c2 = 0;
        if (!(ss >> tv >> c1 >> re >> c2 >> im) || c1 != ',' || c2 != ',') {
            throw std::invalid_argument("waveform csv: '" + path + "' row " +
                                        std::to_string(row) + " is not 't,re,im'");
        }
        t.push_back(tv);
        samples.emplace_back(re, im);
    }
    if (samples.size() < 2) {
        throw std::invalid_argument("waveform csv: '" + path + "' needs at least 2 rows");
    }
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) {
        throw std::invalid_argument("waveform csv: '" + path +
                                    "' time column must be strictly increasing");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double step = t[k] - t[k - 1];
        if (std::abs(step - dt) > 1e-6 * std::max(std::abs(dt), 1e-300)) {
            throw std::invalid_argument("waveform csv: '" + path + "' row " +
                                        std::to_string(k + 2) +
                                        ": time step deviates from uniform spacing");
        }
    }
    TemporalMode out;
    out.t0 = t.front();
    out.dt = dt;
    out.samples = std::move(samples);
    return out;
}

void save_waveform_csv(const TemporalMode& mode, const std::string& path) {
    check_grid(mode);
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("waveform csv: cannot write '" + path + "'");
    }
    out << "t,re,im\n";
    out.precision(17);
    for (std::size_t k = 0; k < mode.samples.size(); ++k) {
        const double t = mode.t0 + mode.dt * static_cast<double>(k);
        out << t << ',' << mode.samples[k].real() << ',' << mode.samples[k].imag() << '\n';
    }
    if (!out) {
        throw std::runtime_error("waveform csv: write to '" + path + "' failed");
    }
}

}  // namespace cvmdi::tm
