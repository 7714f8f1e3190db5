#include <em/recovery.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <em/numerics.hpp>

namespace em {

const char* to_string(Estimator e) {
    return e == Estimator::prony ? "prony" : "esprit";
}

Estimator estimator_from_string(std::string_view name) {
    if (name == "prony")  return Estimator::prony;
    if (name == "esprit") return Estimator::esprit;
    throw std::invalid_argument("unknown estimator: " + std::string(name));
}

Mat krylov(const Eigenmatrix& e, const Observations& u, Index ell) {
    if (ell < 1)
        throw std::invalid_argument("krylov: ell must be at least 1");
    if (u.size() != e.size())
        throw std::invalid_argument("krylov: observation length does not match eigenmatrix");
    Mat k(e.size(), ell + 1);
    k.col(0) = u.values;
    for (Index t = 1; t <= ell; ++t) k.col(t) = e.m * k.col(t - 1);
    return k;
}

namespace {

// Project raw reference-coordinate eigenvalues into the domain. Far-outside
// values (|t| > 2 disk, |Re t| > 2 interval) are reported as spurious but
// still projected: a boundary spike can be pulled back by refinement, while
// a dropped one leaves the model a spike short for good.
void place(const std::vector<Complex>& raw, ReferenceDomain d, LocationEstimate& out) {
    for (const Complex& t : raw) {
        const bool far_out = (d == ReferenceDomain::disk) ? std::abs(t) > 2.0
                                                          : std::abs(t.real()) > 2.0;
        if (far_out) out.discarded.push_back(t);
        out.locations.push_back(project_to_domain(d, t));
    }
}

} // namespace

LocationEstimate prony_locations(const Eigenmatrix& e, const Observations& u, Index n_x) {
    if (n_x < 1)
        throw std::invalid_argument("prony_locations: n_x must be at least 1");
    if (e.size() <= n_x)
        throw std::invalid_argument("prony_locations: need n_s > n_x");

    const Mat kry = krylov(e, u, n_x);
    const SvdResult f = svd(kry);
    // least-squares null vector: right singular vector of the smallest singular value
    const Vec p = f.v.col(f.v.cols() - 1);

    LocationEstimate est;
    Real maxc = 0;
    for (Index i = 0; i < p.size(); ++i) maxc = std::max(maxc, std::abs(p(i)));
    if (maxc == 0 || std::abs(p(p.size() - 1)) <= 1e-14 * maxc)
        est.degree_deficient = true;

    std::vector<Complex> roots;
    try {
        roots = poly_roots(std::span<const Complex>(p.data(), static_cast<size_t>(p.size())));
    } catch (const std::invalid_argument&) {
        est.degree_deficient = true;
        return est;  // zero/constant polynomial: no locations to report
    }
    place(roots, e.grid.domain, est);
    return est;
}

LocationEstimate esprit_locations(const Eigenmatrix& e, const Observations& u,
                                  Index n_x, Index ell) {
    if (n_x < 1)
        throw std::invalid_argument("esprit_locations: n_x must be at least 1");
    if (ell <= n_x)
        throw std::invalid_argument("esprit_locations: requires ell > n_x");
    if (e.size() < n_x)
        throw std::invalid_argument("esprit_locations: need n_s >= n_x");

    const Mat kry = krylov(e, u, ell);
    const SvdResult f = svd(kry);

    LocationEstimate est;
    const Real s1 = f.singular_values(0);
    if (s1 <= 0 || f.singular_values(n_x - 1) / s1 < 1e-13)
        est.rank_deficient = true;

    // V* truncated to the top n_x right singular directions
    const Mat vstar = f.v.leftCols(n_x).adjoint();              // n_x x (ell+1)
    const Mat z0    = vstar.leftCols(ell);                      // drop last column
    const Mat z1    = vstar.rightCols(ell);                     // drop first column
    const Vec ev    = eig(z1 * pinv_thresholded(z0, kLstsqThreshold));

    place({ev.data(), ev.data() + ev.size()}, e.grid.domain, est);
    return est;
}

Index default_esprit_window(Index n_x, Index n_s) {
    return std::min(n_x + 1, n_s - 1);
}

WeightSolution recover_weights(const Kernel& k, const SampleSet& s,
                               const Observations& u, std::span<const Complex> locations) {
    if (static_cast<Index>(locations.size()) > s.size())
        throw std::invalid_argument("recover_weights: more spikes than samples");
    if (u.size() != s.size())
        throw std::invalid_argument("recover_weights: observation/sample mismatch");
    WeightSolution w;
    if (locations.empty()) return w;

    const Mat a = assemble_matrix(k, s, locations);
    if (condition_number(a) > 1e12) w.rank_deficient = true;
    const Vec x = lstsq(a, u.values);
    w.weights.assign(x.data(), x.data() + x.size());
    return w;
}

Real objective_value(const Kernel& k, const SampleSet& s, const Observations& u,
                     const SpikeModel& model) {
    if (model.size() == 0) return u.values.squaredNorm();
    const Mat a = assemble_matrix(k, s, model.locations);
    Vec w(model.size());
    for (Index i = 0; i < model.size(); ++i) w(i) = model.weights[static_cast<size_t>(i)];
    return (a * w - u.values).squaredNorm();
}

} // namespace em
