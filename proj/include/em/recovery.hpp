#pragma once

#include <span>
#include <string>
#include <vector>

#include <em/eigenmatrix.hpp>
#include <em/kernels.hpp>
#include <em/types.hpp>

namespace em {

/// Noisy observation vector u~ at the sample locations.
struct Observations {
    Vec values;

    Index size() const { return values.size(); }
};

/// f(x) = sum_k w_k delta(x - x_k)
struct SpikeModel {
    std::vector<Complex> locations;
    std::vector<Complex> weights;

    Index size() const { return static_cast<Index>(locations.size()); }
};

enum class Estimator { prony, esprit };
const char* to_string(Estimator e);
Estimator   estimator_from_string(std::string_view name);

/// Location estimate in reference coordinates, after projection to the domain.
/// Far-outside eigenvalues (|t| > 2 on the disk, |Re t| > 2 on the interval)
/// are discarded and reported instead of being projected.
struct LocationEstimate {
    std::vector<Complex> locations;
    std::vector<Complex> discarded;
    bool degree_deficient = false;  // Prony leading coefficient vanished
    bool rank_deficient   = false;  // ESPRIT s_{n_x}/s_1 below 1e-13
};

/// [u, Mu, ..., M^ell u] via repeated matrix-vector products.
Mat krylov(const Eigenmatrix& e, const Observations& u, Index ell);

/// Null-vector Prony: smallest right singular vector of krylov(e, u, n_x),
/// spike locations are the roots of that polynomial.
LocationEstimate prony_locations(const Eigenmatrix& e, const Observations& u, Index n_x);

/// ESPRIT: rank-n_x truncated SVD of krylov(e, u, ell), Z0/Z1 drop the last /
/// first column of V*, locations are the eigenvalues of Z1 pinv(Z0).
LocationEstimate esprit_locations(const Eigenmatrix& e, const Observations& u,
                                  Index n_x, Index ell);

/// ell used when a config does not pin one: the minimal admissible window.
Index default_esprit_window(Index n_x, Index n_s);

struct WeightSolution {
    std::vector<Complex> weights;
    bool rank_deficient = false;
};

/// Least-squares weights for fixed locations (in X coordinates).
WeightSolution recover_weights(const Kernel& k, const SampleSet& s,
                               const Observations& u, std::span<const Complex> locations);

/// sum_j | sum_k G(s_j, x_k) w_k - u~_j |^2
Real objective_value(const Kernel& k, const SampleSet& s, const Observations& u,
                     const SpikeModel& model);

/// One full recovery (estimate -> weights -> refine happens in the harness).
struct RecoveryResult {
    SpikeModel raw;
    SpikeModel refined;
    Real residual_raw     = 0;
    Real residual_refined = 0;
    Estimator method      = Estimator::esprit;
    // eigenmatrix metadata snapshot
    Real  em_threshold = 0;
    Real  em_norm      = 0;
    Real  em_cond      = 0;
    Index em_rank      = 0;
    Index n_a_used     = 0;
    bool  estimate_degenerate = false;  // estimator flagged rank/degree trouble
    bool  refine_no_progress  = false;
};

} // namespace em
