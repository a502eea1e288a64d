// Experiment drivers: distance sweeps, maximum-distance bisection, matching
// grids, and equivalent-excess-noise curves, plus their CSV writers.

#include "cvmdi/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cvmdi::experiments {
namespace {

// Inclusive arithmetic range with a tolerance on the final point so that
// `to` lands in the list despite accumulated floating-point error.
std::vector<double> range_points(double from, double to, double step) {
    std::vector<double> pts;
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9));
    pts.reserve(count + 1);
    for (std::size_t i = 0; i <= count; ++i) {
        pts.push_back(from + step * static_cast<double>(i));
    }
    return pts;
}

void require_sweepable(const Scenario& s, const char* what) {
    if (s.topology == Topology::explicit_legs) {
        throw std::invalid_argument(std::string(what) +
                                    ": the 'explicit' layout fixes both fiber legs; "
                                    "distance sweeps need a swept layout");
    }
}

// Runs fn(i) for i in [0, n) on a small thread pool with deterministic
// per-index output slots.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(hw, n > 0 ? n : 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

double raw_rate_at(const Scenario& s, double L_km) {
    const protocol::ChannelParams ch = channel_at(s, L_km);
    if (s.finite_size) {
        return keyrate::finite_size_key_rate(ch, s.matching, s.protocol, *s.finite_size)
            .K_raw;
    }
    return keyrate::asymptotic_key_rate(ch, s.matching, s.protocol).K_raw;
}

}  // namespace

std::vector<SweepRow> sweep_distance(const Scenario& s, bool force_finite_size) {
    s.validate();
    require_sweepable(s, "sweep_distance");
    const bool with_finite = force_finite_size || s.finite_size.has_value();
    const keyrate::FiniteSizeParams fs =
        s.finite_size.value_or(keyrate::FiniteSizeParams{});

    const std::vector<double> pts =
        range_points(s.sweep.from_km, s.sweep.to_km, s.sweep.step_km);
    std::vector<SweepRow> rows(pts.size());
    // Exceptions must escape the worker threads intact; capture the first one.
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    parallel_for(pts.size(), [&](std::size_t i) {
        if (failed.load()) {
            return;
        }
        try {
            SweepRow& row = rows[i];
            row.L_km = pts[i];
            const protocol::ChannelParams ch = channel_at(s, pts[i]);
            row.asymptotic = keyrate::asymptotic_key_rate(ch, s.matching, s.protocol);
            if (with_finite) {
                row.finite =
                    keyrate::finite_size_key_rate(ch, s.matching, s.protocol, fs);
            }
        } catch (...) {
            if (!failed.exchange(true)) {
                error = std::current_exception();
            }
        }
    });
    if (failed.load()) {
        std::rethrow_exception(error);
    }
    return rows;
}

double max_distance(const Scenario& s) {
    s.validate();
    require_sweepable(s, "max_distance");
    if (!(raw_rate_at(s, 0.0) > 0.0)) {
        throw NoKeyError("max_distance: no positive key rate even at zero distance");
    }
    // Grow an upper bracket, then bisect the sign change down to 1e-4 km.
    double lo = 0.0;
    double hi = 1.0;
    while (raw_rate_at(s, hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 16384.0) {
            throw std::runtime_error(
                "max_distance: key rate still positive beyond 16384 km; "
                "parameters describe an effectively lossless setup");
        }
    }
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (raw_rate_at(s, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<GridPoint> grid_sweep(const Scenario& s) {
    s.validate();
    const protocol::ChannelParams ch = channel_at(s);
    const int n = s.grid.points;
    const double span = s.grid.eta_max - s.grid.eta_min;
    const double step = n > 1 ? span / static_cast<double>(n - 1) : 0.0;
    auto eta_at = [&](int k) { return s.grid.eta_min + step * static_cast<double>(k); };

    std::vector<GridPoint> rows(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    parallel_for(rows.size(), [&](std::size_t i) {
        if (failed.load()) {
            return;
        }
        try {
            const int ia = static_cast<int>(i) / n;
            const int ib = static_cast<int>(i) % n;
            GridPoint& pt = rows[i];
            pt.eta_A = eta_at(ia);
            pt.eta_B = eta_at(ib);
            const auto matching = protocol::ModeMatchingSet::symmetric(pt.eta_A, pt.eta_B);
            if (s.finite_size) {
                pt.K = keyrate::finite_size_key_rate(ch, matching, s.protocol,
                                                     *s.finite_size)
                           .K;
            } else {
                pt.K = keyrate::asymptotic_key_rate(ch, matching, s.protocol).K;
            }
        } catch (...) {
            if (!failed.exchange(true)) {
                error = std::current_exception();
            }
        }
    });
    if (failed.load()) {
        std::rethrow_exception(error);
    }
    return rows;
}

std::vector<NoiseCurveRow> excess_noise_curve(const Scenario& s) {
    s.validate();
    require_sweepable(s, "excess_noise_curve");
    const std::vector<double> pts =
        range_points(s.sweep.from_km, s.sweep.to_km, s.sweep.step_km);
    std::vector<NoiseCurveRow> rows(pts.size());
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    parallel_for(pts.size(), [&](std::size_t i) {
        if (failed.load()) {
            return;
        }
        try {
            NoiseCurveRow& row = rows[i];
            row.L_km = pts[i];
            row.eps_x.reserve(s.noise_curve_eta_B.size());
            const protocol::ChannelParams ch = channel_at(s, pts[i]);
            for (const double eta_b : s.noise_curve_eta_B) {
                protocol::ModeMatchingSet matching = s.matching;
                matching.eta_B1 = eta_b;
                matching.eta_B2 = eta_b;
                const auto gains = protocol::optimal_gains(ch, matching, s.protocol);
                const auto eq =
                    protocol::equivalent_channel(ch, matching, s.protocol, gains);
                row.eps_x.push_back(eq.eps_x);
            }
        } catch (...) {
            if (!failed.exchange(true)) {
                error = std::current_exception();
            }
        }
    });
    if (failed.load()) {
        std::rethrow_exception(error);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const Scenario& s,
                     const std::vector<SweepRow>& rows) {
    out << "# config=" << config_hash(s) << "\n";
    const bool with_finite = !rows.empty() && rows.front().finite.has_value();
    out << "L_km,K,K_raw,I_AB,chi_BE,T_x,T_p,eps_x,eps_p";
    if (with_finite) {
        out << ",K_fin,K_fin_raw,delta_n";
    }
    out << "\n";
    out.precision(12);
    for (const auto& row : rows) {
        const auto& a = row.asymptotic;
        out << row.L_km << ',' << a.K << ',' << a.K_raw << ',' << a.I_AB << ','
            << a.chi_BE << ',' << a.eq.T_x << ',' << a.eq.T_p << ',' << a.eq.eps_x << ','
            << a.eq.eps_p;
        if (with_finite) {
            out << ',' << row.finite->K << ',' << row.finite->K_raw << ','
                << row.finite->delta_n;
        }
        out << "\n";
    }
}

void write_grid_csv(std::ostream& out, const Scenario& s,
                    const std::vector<GridPoint>& rows) {
    out << "# config=" << config_hash(s) << "\n";
    out << "eta_A,eta_B,K\n";
    out.precision(12);
    for (const auto& pt : rows) {
        out << pt.eta_A << ',' << pt.eta_B << ',' << pt.K << "\n";
    }
}

void write_noise_csv(std::ostream& out, const Scenario& s,
                     const std::vector<NoiseCurveRow>& rows) {
    out << "# config=" << config_hash(s) << "\n";
    out << "L_km";
    out.precision(12);
    for (const double eta_b : s.noise_curve_eta_B) {
        out << ",eps_x@etaB=" << eta_b;
    }
    out << "\n";
    for (const auto& row : rows) {
        out << row.L_km;
        for (const double v : row.eps_x) {
            out << ',' << v;
        }
        out << "\n";
    }
}

void write_max_distance_csv(std::ostream& out, const Scenario& s, double km) {
    out << "# config=" << config_hash(s) << "\n";
    out << "max_distance_km\n";
    out.precision(12);
    out << km << "\n";
}

}  // namespace cvmdi::experiments
