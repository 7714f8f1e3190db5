#pragma once

#include <em/domains.hpp>
#include <em/recovery.hpp>

namespace em {

struct RefineOptions {
    Index max_iterations     = 200;
    Real  gradient_tolerance = 1e-10;
    Real  step_tolerance     = 1e-12;
    Real  damping_init       = 1e-3;
};

struct RefineResult {
    SpikeModel model;
    Real       objective   = 0;
    Index      iterations  = 0;
    bool       no_progress = false;  // no accepted step; init returned unchanged
};

/// Damped Gauss-Newton on the spike locations with the weights eliminated by
/// an exact least-squares solve at every iterate (variable projection; the
/// Jacobian is projected onto the orthogonal complement of the collocation
/// range). Interval domains optimize over the real part only; disk domains
/// over both components. Iterates leaving X are projected back.
RefineResult refine(const Kernel& k, const SampleSet& s, const Observations& u,
                    const SpikeModel& init, ReferenceDomain d, const DomainMap& m,
                    const RefineOptions& opts = {});

struct ModelOrderResult {
    Index          n_x = 0;
    RecoveryResult best;
    bool           converged = false;  // objective reached the noise-level bar
    bool           zero_data = false;
};

/// Residual-threshold sweep n = 1..n_max: the smallest n whose refined
/// objective is within (noise_factor * sigma * ||u||)^2 wins; otherwise the
/// argmin objective is returned flagged not-converged. Candidates are
/// independent and evaluated in parallel.
ModelOrderResult select_model_order(const Kernel& k, const SampleSet& s,
                                    const Observations& u, const Eigenmatrix& e,
                                    const DomainMap& m, Real sigma_estimate,
                                    Index n_max, Estimator estimator,
                                    const RefineOptions& opts = {},
                                    Real noise_factor = 2.0);

} // namespace em
