#pragma once
// Gaussian-state linear algebra for one- and two-mode bosonic states in the
// (x1, p1, x2, p2) quadrature ordering with vacuum variance 1 (shot-noise
// units). Provides symplectic eigenvalues, the bosonic entropy function,
// heterodyne conditioning, heterodyne-heterodyne mutual information, and the
// reverse-reconciliation Holevo bound.

#include <Eigen/Dense>
#include <vector>

#include "cvmdi/errors.hpp"

namespace cvmdi::gauss {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

enum class Party { A, B };

// Symplectic eigenvalues, sorted descending; length 2 for a two-mode state,
// 1 for one mode. Each value >= 1 up to the clamping policy below.
struct SymplecticSpectrum {
    std::vector<double> nu;
};

// Numerical physicality policy: eigenvalues in [1 - k_unphysical_tol, 1) are
// treated as floating-point shortfall on pure states and clamp to 1; values
// below that bound are rejected. Physicality validation of constructed
// matrices uses the tighter k_physical_tol.
inline constexpr double k_physical_tol = 1e-9;
inline constexpr double k_unphysical_tol = 1e-6;

// Symplectic form for the (x1, p1, x2, p2) ordering: 2x2 blocks [[0,1],[-1,0]].
Mat4 two_mode_symplectic_form();

// True iff gamma is symmetric, positive semidefinite (within tol), and every
// symplectic eigenvalue is >= 1 - tol. Never throws on unphysical values.
bool is_physical(const Mat4& gamma, double tol = k_physical_tol);

// Symplectic eigenvalues (moduli of the eigenvalues of i*Omega*gamma),
// descending. Positive-definite input uses the Cholesky-based Williamson
// route, which stays accurate to machine precision even for the degenerate
// spectrum of a pure state. Values in [1 - 1e-6, 1) clamp to 1; smaller
// values raise UnphysicalStateError naming the offending eigenvalue.
SymplecticSpectrum symplectic_eigenvalues(const Mat4& gamma);

// One-mode version: nu = sqrt(det gamma), same clamp policy.
SymplecticSpectrum symplectic_eigenvalues(const Mat2& gamma);

// Bosonic entropy of one thermal symplectic eigenvalue [bits]:
// g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2).
// Values in [1 - 1e-9, 1] return 0; below that, std::invalid_argument.
double entropy_g(double nu);

// Covariance of the retained mode after the measured party heterodynes:
// gamma_rest - C (gamma_meas + I)^{-1} C^T.
Mat2 condition_on_heterodyne(const Mat4& gamma, Party measured);

// Mutual information [bits/use] of double-heterodyne outcomes for a two-mode
// state whose x and p sectors are uncoupled (all four 2x2 blocks diagonal):
// per sector, I = (1/2) log2[(V+1) / (V+1 - cross^2/(W+1))].
double mutual_information(const Mat4& gamma);

// Holevo bound chi(B:E) under reverse reconciliation with heterodyne on mode
// 2 and an eavesdropper purifying the state: S(12) - S(1|heterodyne on 2).
// Tiny negative floating-point residue clamps to 0.
double holevo_bound_rr(const Mat4& gamma);

}  // namespace cvmdi::gauss
