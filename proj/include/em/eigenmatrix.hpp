#pragma once

#include <array>
#include <span>

#include <em/domains.hpp>
#include <em/kernels.hpp>
#include <em/types.hpp>

namespace em {

/// Relative singular-value thresholds tried when building M, scanned from the
/// smallest; the first one whose M satisfies the norm bound wins.
inline constexpr std::array<Real, 13> kThresholdLadder = {
    1e-14, 1e-12, 1e-10, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1, 3e-1};

/// The data-driven matrix M = Ghat * Lambda * pinv(Ghat) with
/// M ghat(phi(a_t)) ~= a_t ghat(phi(a_t)) on the probe grid, plus build
/// metadata. Lambda holds the reference-domain nodes, so Prony/ESPRIT
/// eigenvalues land in reference coordinates and are mapped by phi afterward.
struct Eigenmatrix {
    Mat       m;
    ProbeGrid grid;
    Real      threshold_used = 0;  // relative to s_1 of Ghat
    Index     rank_kept      = 0;  // singular values above the threshold
    Real      norm_m         = 0;  // spectral norm of M
    Real      cond_ghat      = 0;  // s_1 / s_min of Ghat (+inf sentinel)
    Real      norm_bound     = 0;

    Index size() const { return m.rows(); }
};

Eigenmatrix build(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                  const DomainMap& m, Index n_a, Real norm_bound);

/// max over reference-domain test points t of || M ghat(phi(t)) - t ghat(phi(t)) ||_2.
/// ghat is unit-norm, so this is a relative residual. Parallel over test points;
/// the _serial variant is the reference implementation.
Real residual_diagnostic(const Eigenmatrix& e, const Kernel& k, const SampleSet& s,
                         const DomainMap& m, std::span<const Complex> test_points);
Real residual_diagnostic_serial(const Eigenmatrix& e, const Kernel& k, const SampleSet& s,
                                const DomainMap& m, std::span<const Complex> test_points);

/// Condition number of Ghat for a candidate probe-grid size.
Real condition_check(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                     const DomainMap& m, Index n_a);

/// Largest n_a <= requested whose Ghat condition number stays below cond_limit;
/// falls back to the smallest grid when none qualifies.
Index choose_probe_count(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                         const DomainMap& m, Index requested, Real cond_limit = 1e7);

} // namespace em
