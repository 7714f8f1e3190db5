#include <em/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace em {

namespace {

void require_finite(const Mat& a, const char* who) {
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
    if (a.rows() < 1 || a.cols() < 1)
        throw std::invalid_argument(std::string(who) + ": empty matrix");
}

} // namespace

SvdResult svd(const Mat& a) {
    require_finite(a, "svd");
    // BDCSVD falls back to Jacobi for small sizes; both are deterministic.
    Eigen::BDCSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw std::runtime_error("svd: factorization did not converge");
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Mat pinv_thresholded(const Mat& a, Real threshold) {
    if (threshold < 0)
        throw std::invalid_argument("pinv_thresholded: negative threshold");
    SvdResult f = svd(a);
    const Real s1  = f.singular_values.size() ? f.singular_values(0) : 0.0;
    const Real cut = threshold * s1;
    RealVec inv = RealVec::Zero(f.singular_values.size());
    for (Index i = 0; i < f.singular_values.size(); ++i) {
        const Real s = f.singular_values(i);
        if (s > cut && s > 0) inv(i) = 1.0 / s;
    }
    return f.v * inv.asDiagonal() * f.u.adjoint();
}

Vec eig(const Mat& a) {
    require_finite(a, "eig");
    if (a.rows() != a.cols())
        throw std::invalid_argument("eig: matrix not square");
    Eigen::ComplexEigenSolver<Mat> dec(a, /*computeEigenvectors=*/false);
    if (dec.info() != Eigen::Success)
        throw std::runtime_error("eig: eigenvalue iteration did not converge");
    return dec.eigenvalues();
}

Vec lstsq(const Mat& a, const Vec& b) {
    if (a.rows() != b.size())
        throw std::invalid_argument("lstsq: dimension mismatch");
    return pinv_thresholded(a, kLstsqThreshold) * b;
}

std::vector<Complex> poly_roots(std::span<const Complex> coeffs) {
    Real maxc = 0;
    for (const Complex& c : coeffs) maxc = std::max(maxc, std::abs(c));
    if (maxc == 0)
        throw std::invalid_argument("poly_roots: zero polynomial");

    Index deg = static_cast<Index>(coeffs.size()) - 1;
    while (deg > 0 && std::abs(coeffs[deg]) <= 1e-14 * maxc) --deg;
    if (deg < 1)
        throw std::invalid_argument("poly_roots: degree below 1 after trimming");

    Mat companion = Mat::Zero(deg, deg);
    for (Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (Index i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[i] / coeffs[deg];
    Vec ev = eig(companion);
    return {ev.data(), ev.data() + ev.size()};
}

Real spectral_norm(const Mat& a) {
    Eigen::BDCSVD<Mat> dec(a);
    return dec.singularValues().size() ? dec.singularValues()(0) : 0.0;
}

Real condition_number(const Mat& a) {
    Eigen::BDCSVD<Mat> dec(a);
    const auto& s = dec.singularValues();
    if (!s.size()) return std::numeric_limits<Real>::infinity();
    const Real smin = s(s.size() - 1);
    // numerical rank deficiency reports the infinity sentinel
    const Real floor = std::numeric_limits<Real>::epsilon() * s(0) *
                       static_cast<Real>(std::max(a.rows(), a.cols()));
    if (smin <= floor) return std::numeric_limits<Real>::infinity();
    return s(0) / smin;
}

} // namespace em
