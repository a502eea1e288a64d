// Two-mode Gaussian-state computations: symplectic spectra via a stable
// Williamson route, the bosonic entropy function, heterodyne conditioning,
// mutual information for diagonal-block states, and the
// reverse-reconciliation Holevo bound.

#include "cvmdi/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvmdi::gauss {
namespace {

void check_symmetric(const Mat4& gamma, const char* who) {
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument(std::string(who) + ": covariance matrix is not symmetric");
    }
}

// Raw symplectic eigenvalue pair (nu1 >= nu2) via the block invariants
// Delta = det A + det B + 2 det C and det gamma, without any physicality
// policy applied. Loses ~half the working precision when nu1 ~ nu2 (the
// discriminant cancels); used only as the fallback for indefinite input.
std::pair<double, double> invariant_pair(const Mat4& gamma) {
    const Mat2 a = gamma.block<2, 2>(0, 0);
    const Mat2 b = gamma.block<2, 2>(2, 2);
    const Mat2 c = gamma.block<2, 2>(0, 2);
    const double delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
    const double det = gamma.determinant();
    const double disc = std::max(delta * delta - 4.0 * det, 0.0);
    const double nu1_sq = 0.5 * (delta + std::sqrt(disc));
    const double nu1 = std::sqrt(std::max(nu1_sq, 0.0));
    // nu2 = sqrt(det)/nu1 avoids the cancellation in (delta - sqrt(disc))/2.
    const double nu2 = nu1 > 0.0 ? std::sqrt(std::max(det, 0.0)) / nu1 : 0.0;
    return {nu1, nu2};
}

// Raw symplectic eigenvalue pair (nu1 >= nu2). Positive-definite input goes
// through the Williamson route: gamma = L L^T, then the eigenvalues of the
// antisymmetric M = L^T Omega L are +/- i nu, so the nu are the singular
// values of M (each appearing twice). Weyl's inequality makes singular values
// perfectly conditioned even when repeated, so the result stays accurate to
// ~machine precision for the degenerate spectrum {1, 1} of a pure state,
// where the invariant formula loses half its digits (and a general
// eigensolver can still split the pair by ~sqrt(eps)). Indefinite input (no
// Cholesky factor) falls back to the invariant formula, whose accuracy is
// irrelevant there: those values only feed rejection paths.
std::pair<double, double> raw_symplectic_pair(const Mat4& gamma) {
    Eigen::LLT<Mat4> llt(gamma);
    if (llt.info() != Eigen::Success) {
        return invariant_pair(gamma);
    }
    const Mat4 l = llt.matrixL();
    const Mat4 m = l.transpose() * two_mode_symplectic_form() * l;
    Eigen::JacobiSVD<Mat4> svd(m);
    // Singular values arrive sorted descending as {nu1, nu1, nu2, nu2}.
    return {svd.singularValues()(0), svd.singularValues()(2)};
}

double apply_clamp_policy(double nu, const char* who) {
    if (nu >= 1.0) {
        return nu;
    }
    if (nu >= 1.0 - k_unphysical_tol) {
        return 1.0;
    }
    throw UnphysicalStateError(std::string(who) + ": symplectic eigenvalue " +
                               std::to_string(nu) + " is below 1");
}

}  // namespace

Mat4 two_mode_symplectic_form() {
    Mat4 omega = Mat4::Zero();
    omega(0, 1) = 1.0;
    omega(1, 0) = -1.0;
    omega(2, 3) = 1.0;
    omega(3, 2) = -1.0;
    return omega;
}

bool is_physical(const Mat4& gamma, double tol) {
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Mat4> solver(gamma);
    if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() < -tol * scale) {
        return false;
    }
    const auto [nu1, nu2] = raw_symplectic_pair(gamma);
    return nu2 >= 1.0 - tol && nu1 >= 1.0 - tol;
}

SymplecticSpectrum symplectic_eigenvalues(const Mat4& gamma) {
    check_symmetric(gamma, "symplectic_eigenvalues");
    const auto [nu1, nu2] = raw_symplectic_pair(gamma);
    SymplecticSpectrum out;
    out.nu.push_back(apply_clamp_policy(nu1, "symplectic_eigenvalues"));
    out.nu.push_back(apply_clamp_policy(nu2, "symplectic_eigenvalues"));
    return out;
}

SymplecticSpectrum symplectic_eigenvalues(const Mat2& gamma) {
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("symplectic_eigenvalues: covariance matrix is not symmetric");
    }
    const double nu = std::sqrt(std::max(gamma.determinant(), 0.0));
    SymplecticSpectrum out;
    out.nu.push_back(apply_clamp_policy(nu, "symplectic_eigenvalues"));
    return out;
}

double entropy_g(double nu) {
    if (!std::isfinite(nu)) {
        throw std::invalid_argument("entropy_g: eigenvalue must be finite");
    }
    if (nu < 1.0 - k_physical_tol) {
        throw std::invalid_argument("entropy_g: eigenvalue " + std::to_string(nu) +
                                    " is below 1");
    }
    if (nu <= 1.0) {
        return 0.0;
    }
    const double up = 0.5 * (nu + 1.0);
    const double dn = 0.5 * (nu - 1.0);
    return up * std::log2(up) - dn * std::log2(dn);
}

Mat2 condition_on_heterodyne(const Mat4& gamma, Party measured) {
    check_symmetric(gamma, "condition_on_heterodyne");
    const bool meas_b = measured == Party::B;
    const Mat2 rest = meas_b ? gamma.block<2, 2>(0, 0).eval() : gamma.block<2, 2>(2, 2).eval();
    const Mat2 meas = meas_b ? gamma.block<2, 2>(2, 2).eval() : gamma.block<2, 2>(0, 0).eval();
    const Mat2 cross = meas_b ? gamma.block<2, 2>(0, 2).eval()
                              : Mat2(gamma.block<2, 2>(0, 2).transpose());
    const Mat2 denom = meas + Mat2::Identity();
    // denom is (measured block + vacuum); it is positive definite for any
    // physical state, so a failed inversion signals a bad input.
    const double det = denom.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw UnphysicalStateError("condition_on_heterodyne: measured block + I is singular");
    }
    return rest - cross * denom.inverse() * cross.transpose();
}

double mutual_information(const Mat4& gamma) {
    check_symmetric(gamma, "mutual_information");
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            if ((r + c) % 2 == 1 && std::abs(gamma(r, c)) > 1e-9 * scale) {
                throw std::invalid_argument(
                    "mutual_information: x and p sectors are coupled; expected all 2x2 "
                    "blocks diagonal");
            }
        }
    }
    double bits = 0.0;
    for (int q = 0; q < 2; ++q) {  // q = 0 -> x sector, q = 1 -> p sector
        const double v = gamma(q, q);
        const double w = gamma(2 + q, 2 + q);
        const double cross = gamma(q, 2 + q);
        const double denom = (v + 1.0) - cross * cross / (w + 1.0);
        if (!(denom > 0.0)) {
            throw UnphysicalStateError(
                "mutual_information: conditional variance is not positive");
        }
        bits += 0.5 * std::log2((v + 1.0) / denom);
    }
    return bits;
}

double holevo_bound_rr(const Mat4& gamma) {
    const SymplecticSpectrum joint = symplectic_eigenvalues(gamma);
    const Mat2 cond = condition_on_heterodyne(gamma, Party::B);
    const SymplecticSpectrum after = symplectic_eigenvalues(cond);
    double chi = entropy_g(joint.nu[0]) + entropy_g(joint.nu[1]) - entropy_g(after.nu[0]);
    if (chi < 0.0) {
        if (chi < -k_unphysical_tol) {
            throw UnphysicalStateError("holevo_bound_rr: bound came out " +
                                       std::to_string(chi) + " < 0");
        }
        chi = 0.0;
    }
    return chi;
}

}  // namespace cvmdi::gauss
