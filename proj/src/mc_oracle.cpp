// Shot-by-shot Monte-Carlo propagation through the relay protocol. Each shot
// draws the two two-mode-squeezed sources, applies per-link loss, detector
// temporal-mode projection (matched fraction + orthogonal vacuum remainder)
// and excess noise, interferes the arriving modes at the 50:50 relay with
// noisy homodyne readout, and displaces the kept receiver mode. Chunked
// deterministic seeding keeps results bit-identical for any worker count.

#include "cvmdi/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cvmdi::mc {
namespace {

constexpr std::uint64_t k_chunk_shots = 65536;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Standard normals from a dedicated engine via Box-Muller, independent of any
// library distribution implementation so streams are stable across toolchains.
class NormalSource {
  public:
    explicit NormalSource(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // (0, 1] uniforms: the +1 keeps log() away from 0.
        const double u1 =
            (static_cast<double>(eng_() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
        const double u2 =
            (static_cast<double>(eng_() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Raw accumulators of one chunk: second moments of (x_A, p_A, x_B', p_B') and
// of the receiver's heterodyne-style regression variable h = x_B' + vacuum.
struct ChunkSums {
    double n = 0.0;
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    double q[10] = {0.0};  // upper triangle of outer products, row-major
    double hs = 0.0;
    double hq = 0.0;
    double xh = 0.0;  // sum of x_A * h

    void merge(const ChunkSums& o) {
        n += o.n;
        for (int i = 0; i < 4; ++i) s[i] += o.s[i];
        for (int i = 0; i < 10; ++i) q[i] += o.q[i];
        hs += o.hs;
        hq += o.hq;
        xh += o.xh;
    }
};

struct ShotCoefficients {
    double sqrt_VA = 0.0, kA_over = 0.0, inv_sqrt_VA = 0.0;
    double sqrt_VB = 0.0, kB_over = 0.0, inv_sqrt_VB = 0.0;
    // Per sector: matched signal, orthogonal remainder, loss vacuum, excess.
    double cA[2] = {0.0, 0.0}, pA[2] = {0.0, 0.0}, eA = 0.0, nA = 0.0;
    double cB[2] = {0.0, 0.0}, pB[2] = {0.0, 0.0}, eB = 0.0, nB = 0.0;
    double sD = 0.0;  // relay readout noise amplitude
    double g_x = 0.0, g_p = 0.0;
};

ShotCoefficients make_coefficients(const protocol::LinkParams& links,
                                   const protocol::ModeMatchingSet& matching,
                                   const protocol::ProtocolParams& prot,
                                   const protocol::GainSettings& gains) {
    ShotCoefficients c;
    c.sqrt_VA = std::sqrt(prot.V_A);
    c.kA_over = std::sqrt(prot.V_A * prot.V_A - 1.0) / c.sqrt_VA;
    c.inv_sqrt_VA = 1.0 / c.sqrt_VA;
    c.sqrt_VB = std::sqrt(prot.V_B);
    c.kB_over = std::sqrt(prot.V_B * prot.V_B - 1.0) / c.sqrt_VB;
    c.inv_sqrt_VB = 1.0 / c.sqrt_VB;
    const double em_a[2] = {matching.eta_A1, matching.eta_A2};
    const double em_b[2] = {matching.eta_B1, matching.eta_B2};
    for (int s = 0; s < 2; ++s) {
        c.cA[s] = std::sqrt(links.eta_A * em_a[s]);
        c.pA[s] = std::sqrt(links.eta_A * (1.0 - em_a[s]));
        c.cB[s] = std::sqrt(links.eta_B * em_b[s]);
        c.pB[s] = std::sqrt(links.eta_B * (1.0 - em_b[s]));
    }
    c.eA = std::sqrt(1.0 - links.eta_A);
    c.nA = std::sqrt(links.eta_A * links.eps_A);
    c.eB = std::sqrt(std::max(1.0 - links.eta_B, 0.0));
    c.nB = std::sqrt(links.eta_B * links.eps_B);
    c.sD = std::sqrt(links.eps_det);
    c.g_x = gains.g_x;
    c.g_p = gains.g_p;
    return c;
}

ChunkSums run_chunk(const ShotCoefficients& c, std::uint64_t shots, std::uint64_t seed) {
    NormalSource rng(seed);
    ChunkSums sums;
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        // x sector (relay difference output, matched with eta_A1 / eta_B1).
        const double u1 = rng();
        const double u2 = rng();
        const double v1 = rng();
        const double v2 = rng();
        const double xA1 = c.sqrt_VA * u1;
        const double xA2 = c.kA_over * u1 + c.inv_sqrt_VA * u2;
        const double xB1 = c.sqrt_VB * v1;
        const double xB2 = c.kB_over * v1 + c.inv_sqrt_VB * v2;
        const double xA2d =
            c.cA[0] * xA2 + c.pA[0] * rng() + c.eA * rng() + c.nA * rng();
        const double xB2d =
            c.cB[0] * xB2 + c.pB[0] * rng() + c.eB * rng() + c.nB * rng();
        const double x_relay = (xA2d - xB2d) / std::sqrt(2.0) + c.sD * rng();
        const double xBp = xB1 + c.g_x * x_relay;
        const double h = xBp + rng();  // heterodyne adds one vacuum unit

        // p sector (relay sum output, matched with eta_A2 / eta_B2).
        const double u3 = rng();
        const double u4 = rng();
        const double v3 = rng();
        const double v4 = rng();
        const double pA1 = c.sqrt_VA * u3;
        const double pA2 = -c.kA_over * u3 + c.inv_sqrt_VA * u4;
        const double pB1 = c.sqrt_VB * v3;
        const double pB2 = -c.kB_over * v3 + c.inv_sqrt_VB * v4;
        const double pA2d =
            c.cA[1] * pA2 + c.pA[1] * rng() + c.eA * rng() + c.nA * rng();
        const double pB2d =
            c.cB[1] * pB2 + c.pB[1] * rng() + c.eB * rng() + c.nB * rng();
        const double p_relay = (pA2d + pB2d) / std::sqrt(2.0) + c.sD * rng();
        const double pBp = pB1 + c.g_p * p_relay;

        const double rec[4] = {xA1, pA1, xBp, pBp};
        sums.n += 1.0;
        int qi = 0;
        for (int i = 0; i < 4; ++i) {
            sums.s[i] += rec[i];
            for (int j = i; j < 4; ++j) {
                sums.q[qi++] += rec[i] * rec[j];
            }
        }
        sums.hs += h;
        sums.hq += h * h;
        sums.xh += xA1 * h;
    }
    return sums;
}

}  // namespace

CovEstimate propagate(const protocol::ChannelParams& channel,
                      const protocol::ModeMatchingSet& matching,
                      const protocol::ProtocolParams& protocol,
                      const protocol::GainSettings& gains, std::uint64_t shots,
                      std::uint64_t seed, unsigned workers) {
    if (shots < 10000) {
        throw std::invalid_argument("propagate: need at least 10^4 shots, got " +
                                    std::to_string(shots));
    }
    const protocol::LinkParams links = protocol::to_links(channel);
    matching.validate();
    protocol.validate();
    gains.validate();
    if (links.eta_B > 1.0) {
        throw std::invalid_argument("propagate: eta_B > 1 cannot be sampled physically");
    }
    const ShotCoefficients coeff = make_coefficients(links, matching, protocol, gains);

    const std::uint64_t n_chunks = (shots + k_chunk_shots - 1) / k_chunk_shots;
    std::vector<ChunkSums> partials(n_chunks);
    unsigned n_workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : workers;
    n_workers = static_cast<unsigned>(
        std::min<std::uint64_t>(n_workers, n_chunks));

    std::atomic<std::uint64_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::uint64_t idx = next.fetch_add(1);
            if (idx >= n_chunks) {
                return;
            }
            const std::uint64_t begin = idx * k_chunk_shots;
            const std::uint64_t count = std::min(k_chunk_shots, shots - begin);
            const std::uint64_t chunk_seed =
                splitmix64(seed + (idx + 1) * 0x9E3779B97F4A7C15ULL);
            partials[idx] = run_chunk(coeff, count, chunk_seed);
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    ChunkSums total;  // merged in chunk-index order: deterministic reduction
    for (const auto& part : partials) {
        total.merge(part);
    }

    CovEstimate est;
    est.shots = shots;
    est.seed = seed;
    const double n = total.n;
    double mean[4];
    for (int i = 0; i < 4; ++i) {
        mean[i] = total.s[i] / n;
    }
    int qi = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            const double cov = (total.q[qi++] - n * mean[i] * mean[j]) / (n - 1.0);
            est.cov(i, j) = cov;
            est.cov(j, i) = cov;
        }
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            est.se(i, j) = std::sqrt(
                (est.cov(i, i) * est.cov(j, j) + est.cov(i, j) * est.cov(i, j)) / n);
        }
    }
    const double h_mean = total.hs / n;
    const double h_var = (total.hq - n * h_mean * h_mean) / (n - 1.0);
    const double xh_cov = (total.xh - n * mean[0] * h_mean) / (n - 1.0);
    est.cond_var_x = est.cov(0, 0) - xh_cov * xh_cov / h_var;
    est.cond_var_x_se = est.cond_var_x * std::sqrt(2.0 / n);
    return est;
}

OracleReport oracle_report(const gauss::Mat4& analytic, const CovEstimate& estimate) {
    OracleReport rep;
    rep.shots = estimate.shots;
    rep.seed = estimate.seed;
    std::ostringstream out;
    out << "monte-carlo covariance check: shots=" << estimate.shots
        << " seed=" << estimate.seed << "\n";
    out << " entry        analytic        estimate              se         z\n";
    out.setf(std::ios::fixed);
    std::string failing;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double diff = estimate.cov(i, j) - analytic(i, j);
            const double se = estimate.se(i, j);
            double z = 0.0;
            if (se > 0.0) {
                z = diff / se;
            } else if (diff != 0.0) {
                z = std::numeric_limits<double>::infinity();
            }
            rep.z(i, j) = z;
            if (std::abs(z) > rep.max_abs_z) {
                rep.max_abs_z = std::abs(z);
            }
            if (j >= i) {
                out.precision(9);
                out << " (" << i << "," << j << ")  " << std::setw(14) << analytic(i, j)
                    << "  " << std::setw(14) << estimate.cov(i, j) << "  " << std::setw(14)
                    << se << "  ";
                out.precision(2);
                out << std::setw(8) << z << "\n";
                if (std::abs(z) > 4.0) {
                    failing += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
                }
            }
        }
    }
    rep.pass = rep.max_abs_z <= 4.0;
    out.precision(2);
    out << " worst |z| = " << rep.max_abs_z << "; "
        << (rep.pass ? "PASS" : "FAIL") << " (threshold 4)\n";
    if (!failing.empty()) {
        out << " entries beyond threshold:" << failing << "\n";
    }
    rep.text = out.str();
    return rep;
}

}  // namespace cvmdi::mc
