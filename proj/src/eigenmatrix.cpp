#include <em/eigenmatrix.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <em/numerics.hpp>
#include <em/parallel.hpp>

namespace em {

namespace {

Mat probe_columns(const Kernel& k, const SampleSet& s, const DomainMap& m,
                  const ProbeGrid& grid) {
    std::vector<Complex> xs(grid.nodes.size());
    for (size_t t = 0; t < grid.nodes.size(); ++t)
        xs[t] = map_forward(m, grid.nodes[t]);
    // assemble_normalized throws on a zero column (kernel degenerate at phi(a_t))
    return assemble_normalized_matrix(k, s, xs);
}

} // namespace

Eigenmatrix build(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                  const DomainMap& m, Index n_a, Real norm_bound) {
    if (n_a < 1)
        throw std::invalid_argument("eigenmatrix build: n_a must be at least 1");
    if (!(norm_bound > 0))
        throw std::invalid_argument("eigenmatrix build: norm bound must be positive");

    Eigenmatrix e;
    e.grid       = probe_grid(d, n_a);
    e.norm_bound = norm_bound;

    const Mat ghat = probe_columns(k, s, m, e.grid);
    if (!ghat.allFinite())
        throw std::runtime_error("eigenmatrix build: Ghat has non-finite entries");

    const SvdResult f  = svd(ghat);
    const RealVec&  sv = f.singular_values;
    const Real      s1 = sv.size() ? sv(0) : 0.0;
    e.cond_ghat        = (sv(sv.size() - 1) > 0) ? s1 / sv(sv.size() - 1)
                                                 : std::numeric_limits<Real>::infinity();

    Mat lambda_nodes(n_a, 1);
    for (Index t = 0; t < n_a; ++t) lambda_nodes(t, 0) = e.grid.nodes[static_cast<size_t>(t)];
    const Mat gl = ghat * lambda_nodes.col(0).asDiagonal();

    Real best_norm = std::numeric_limits<Real>::infinity();
    for (Real threshold : kThresholdLadder) {
        // pseudoinverse from the one SVD of Ghat; identical to
        // pinv_thresholded(ghat, threshold)
        const Real cut = threshold * s1;
        Index kept = 0;
        RealVec inv = RealVec::Zero(sv.size());
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > cut && sv(i) > 0) { inv(i) = 1.0 / sv(i); ++kept; }
        Mat candidate = gl * (f.v * inv.asDiagonal() * f.u.adjoint());
        const Real nm = spectral_norm(candidate);
        best_norm = std::min(best_norm, nm);
        if (nm <= norm_bound) {
            e.m              = std::move(candidate);
            e.threshold_used = threshold;
            e.rank_kept      = kept;
            e.norm_m         = nm;
            return e;
        }
    }
    std::ostringstream os;
    os << "eigenmatrix build: no ladder threshold achieves ||M|| <= " << norm_bound
       << " (best achievable " << best_norm << ")";
    throw std::runtime_error(os.str());
}

namespace {

template <bool Parallel>
Real residual_impl(const Eigenmatrix& e, const Kernel& k, const SampleSet& s,
                   const DomainMap& m, std::span<const Complex> pts) {
    if (pts.empty()) return 0.0;
    std::vector<Real> res(pts.size(), 0.0);
    auto one = [&](Index i) {
        const Complex t  = pts[static_cast<size_t>(i)];
        const Vec     gh = assemble_normalized(k, s, map_forward(m, t));
        res[static_cast<size_t>(i)] = (e.m * gh - t * gh).norm();
    };
    if constexpr (Parallel)
        parallel_for(static_cast<Index>(pts.size()), one);
    else
        for (Index i = 0; i < static_cast<Index>(pts.size()); ++i) one(i);
    Real worst = 0.0;
    for (Real r : res) worst = std::max(worst, r);
    return worst;
}

} // namespace

Real residual_diagnostic(const Eigenmatrix& e, const Kernel& k, const SampleSet& s,
                         const DomainMap& m, std::span<const Complex> pts) {
    return residual_impl<true>(e, k, s, m, pts);
}

Real residual_diagnostic_serial(const Eigenmatrix& e, const Kernel& k, const SampleSet& s,
                                const DomainMap& m, std::span<const Complex> pts) {
    return residual_impl<false>(e, k, s, m, pts);
}

Real condition_check(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                     const DomainMap& m, Index n_a) {
    const Mat ghat = probe_columns(k, s, m, probe_grid(d, n_a));
    return condition_number(ghat);
}

Index choose_probe_count(const Kernel& k, const SampleSet& s, ReferenceDomain d,
                         const DomainMap& m, Index requested, Real cond_limit) {
    if (requested < 1)
        throw std::invalid_argument("choose_probe_count: requested must be at least 1");
    for (Index n_a = requested; n_a > 1; --n_a) {
        if (condition_check(k, s, d, m, n_a) < cond_limit) return n_a;
    }
    return 1;
}

} // namespace em
