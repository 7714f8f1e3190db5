#pragma once

#include <span>
#include <vector>

#include <em/types.hpp>

namespace em {

/// Thin SVD A = u * diag(singular_values) * v.adjoint(),
/// singular values nonincreasing.
struct SvdResult {
    Mat     u;
    RealVec singular_values;
    Mat     v;
};

SvdResult svd(const Mat& a);

/// Moore-Penrose pseudoinverse with relative singular-value thresholding:
/// singular values s_i <= threshold * s_1 are dropped. threshold 0 keeps
/// every nonzero singular value. All singular values dropped -> zero matrix.
Mat pinv_thresholded(const Mat& a, Real threshold);

/// Eigenvalues of a square matrix, order unspecified.
Vec eig(const Mat& a);

/// Minimum-norm least-squares solution of A x ~= b.
Vec lstsq(const Mat& a, const Vec& b);

/// Roots of c[0] + c[1] x + ... + c[d] x^d via the companion matrix.
/// Trailing (leading-degree) coefficients below 1e-14 * max|c| are trimmed;
/// a zero or constant polynomial is an error.
std::vector<Complex> poly_roots(std::span<const Complex> coeffs);

/// Largest singular value.
Real spectral_norm(const Mat& a);

/// s_1 / s_min; +infinity when s_min is exactly zero.
Real condition_number(const Mat& a);

// relative threshold used by lstsq and other internal pseudoinverses
inline constexpr Real kLstsqThreshold = 1e-12;

} // namespace em
