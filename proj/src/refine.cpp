#include <em/refine.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include <em/numerics.hpp>
#include <em/parallel.hpp>

namespace em {

namespace {

struct Workpoint {
    Vec  weights;   // exact LS weights at the current locations
    Vec  residual;  // A w - u
    Mat  a;         // collocation matrix
    Mat  a_pinv;
    Real objective = 0;
};

Workpoint solve_weights(const Kernel& k, const SampleSet& s, const Vec& u,
                        const std::vector<Complex>& locs) {
    Workpoint w;
    w.a         = assemble_matrix_serial(k, s, locs);
    w.a_pinv    = pinv_thresholded(w.a, kLstsqThreshold);
    w.weights   = w.a_pinv * u;
    w.residual  = w.a * w.weights - u;
    w.objective = w.residual.squaredNorm();
    return w;
}

std::vector<Complex> project_locations(const std::vector<Complex>& locs,
                                       ReferenceDomain d, const DomainMap& m) {
    std::vector<Complex> out(locs.size());
    for (size_t i = 0; i < locs.size(); ++i)
        out[i] = map_forward(m, project_to_domain(d, map_inverse(m, locs[i])));
    return out;
}

} // namespace

RefineResult refine(const Kernel& k, const SampleSet& s, const Observations& u,
                    const SpikeModel& init, ReferenceDomain d, const DomainMap& m,
                    const RefineOptions& opts) {
    if (init.size() == 0)
        return {init, u.values.squaredNorm(), 0, true};
    if (init.size() > s.size())
        throw std::invalid_argument("refine: more spikes than samples");
    if (init.locations.size() != init.weights.size())
        throw std::invalid_argument("refine: locations/weights length mismatch");

    const Index nx          = init.size();
    const bool  real_params = (d == ReferenceDomain::interval);

    std::vector<Complex> x = project_locations(init.locations, d, m);
    Workpoint            w = solve_weights(k, s, u.values, x);

    Real  lambda        = opts.damping_init;
    bool  ever_accepted = false;
    Index it            = 0;

    for (; it < opts.max_iterations; ++it) {
        // variable-projection Jacobian: columns dG/dx_k * w_k with the
        // collocation range projected out (the residual is orthogonal to it)
        Mat j(s.size(), nx);
        for (Index c = 0; c < nx; ++c) {
            for (Index r = 0; r < s.size(); ++r)
                j(r, c) = kernel_x_derivative(k, s.locations[static_cast<size_t>(r)],
                                              x[static_cast<size_t>(c)]) *
                          w.weights(c);
        }
        j -= w.a * (w.a_pinv * j);

        const Real scale = std::max(w.objective, Real(1e-30));
        bool accepted = false;
        Real step     = 0;

        if (real_params) {
            const Eigen::MatrixXd h = (j.adjoint() * j).real();
            const Eigen::VectorXd g = (j.adjoint() * w.residual).real();
            if (g.norm() <= opts.gradient_tolerance * scale) break;
            for (int tries = 0; tries < 40 && !accepted; ++tries) {
                Eigen::MatrixXd damped = h;
                damped.diagonal().array() += lambda;
                const Eigen::VectorXd delta = damped.ldlt().solve(-g);
                std::vector<Complex> xt(x);
                for (Index i = 0; i < nx; ++i) xt[static_cast<size_t>(i)] += delta(i);
                xt = project_locations(xt, d, m);
                Workpoint trial = solve_weights(k, s, u.values, xt);
                if (trial.objective <= w.objective) {
                    step = 0;
                    for (Index i = 0; i < nx; ++i)
                        step = std::max(step, std::abs(xt[static_cast<size_t>(i)] -
                                                       x[static_cast<size_t>(i)]));
                    x = std::move(xt);
                    w = std::move(trial);
                    lambda   = std::max(lambda * 0.3, Real(1e-14));
                    accepted = ever_accepted = true;
                } else {
                    lambda *= 10;
                    if (lambda > 1e12) break;
                }
            }
        } else {
            const Mat h = j.adjoint() * j;
            const Vec g = j.adjoint() * w.residual;
            if (g.norm() <= opts.gradient_tolerance * scale) break;
            for (int tries = 0; tries < 40 && !accepted; ++tries) {
                Mat damped = h;
                damped.diagonal().array() += Complex(lambda, 0);
                const Vec delta = damped.ldlt().solve(-g);
                std::vector<Complex> xt(x);
                for (Index i = 0; i < nx; ++i) xt[static_cast<size_t>(i)] += delta(i);
                xt = project_locations(xt, d, m);
                Workpoint trial = solve_weights(k, s, u.values, xt);
                if (trial.objective <= w.objective) {
                    step = 0;
                    for (Index i = 0; i < nx; ++i)
                        step = std::max(step, std::abs(xt[static_cast<size_t>(i)] -
                                                       x[static_cast<size_t>(i)]));
                    x = std::move(xt);
                    w = std::move(trial);
                    lambda   = std::max(lambda * 0.3, Real(1e-14));
                    accepted = ever_accepted = true;
                } else {
                    lambda *= 10;
                    if (lambda > 1e12) break;
                }
            }
        }

        if (!accepted || step <= opts.step_tolerance) { if (accepted) ++it; break; }
    }

    RefineResult out;
    if (!ever_accepted) {
        // no progress from the initial point; report it unchanged
        out.model       = {x, std::vector<Complex>(w.weights.data(), w.weights.data() + nx)};
        out.objective   = w.objective;
        out.no_progress = true;
        out.iterations  = it;
        return out;
    }
    out.model.locations = x;
    out.model.weights.assign(w.weights.data(), w.weights.data() + nx);
    // recompute from scratch so the reported value cannot go stale
    out.objective  = objective_value(k, s, u, out.model);
    out.iterations = it;
    return out;
}

ModelOrderResult select_model_order(const Kernel& k, const SampleSet& s,
                                    const Observations& u, const Eigenmatrix& e,
                                    const DomainMap& m, Real sigma_estimate,
                                    Index n_max, Estimator estimator,
                                    const RefineOptions& opts, Real noise_factor) {
    if (n_max < 1)
        throw std::invalid_argument("select_model_order: n_max must be at least 1");
    if (n_max > s.size() / 2)
        throw std::invalid_argument("select_model_order: n_max must be <= n_s/2");

    const Real unorm = u.values.norm();
    ModelOrderResult out;
    if (unorm == 0) {
        // degenerate zero data: one spike of weight zero, objective already zero
        out.n_x       = 1;
        out.zero_data = true;
        out.converged = true;
        LocationEstimate le = (estimator == Estimator::prony)
                                  ? prony_locations(e, u, 1)
                                  : esprit_locations(e, u, 1,
                                        default_esprit_window(1, e.size()));
        SpikeModel raw;
        for (const Complex& t : le.locations) {
            raw.locations.push_back(map_forward(m, t));
            raw.weights.push_back({0, 0});
        }
        out.best.raw = out.best.refined = raw;
        out.best.method = estimator;
        return out;
    }

    // the relative noise scale is floored so that noiseless data still
    // terminates at the true order instead of the argmin fallback
    const Real bar = std::pow(std::max(noise_factor * sigma_estimate, Real(1e-12)) * unorm, 2);

    struct Candidate {
        RecoveryResult rec;
        Real           objective = std::numeric_limits<Real>::infinity();
        bool           ok        = false;
    };
    std::vector<Candidate> cand(static_cast<size_t>(n_max));

    // candidates are independent; run them concurrently, pick deterministically
    parallel_for(n_max, [&](Index idx) {
        const Index n = idx + 1;
        Candidate&  c = cand[static_cast<size_t>(idx)];
        try {
            LocationEstimate le = (estimator == Estimator::prony)
                                      ? prony_locations(e, u, n)
                                      : esprit_locations(e, u, n,
                                            default_esprit_window(n, e.size()));
            SpikeModel raw;
            for (const Complex& t : le.locations) raw.locations.push_back(map_forward(m, t));
            WeightSolution ws = recover_weights(k, s, u, raw.locations);
            raw.weights = ws.weights;

            RecoveryResult rec;
            rec.raw          = raw;
            rec.method       = estimator;
            rec.residual_raw = objective_value(k, s, u, raw);
            RefineResult rr  = refine(k, s, u, raw, e.grid.domain, m, opts);
            rec.refined           = rr.model;
            rec.residual_refined  = rr.objective;
            rec.refine_no_progress = rr.no_progress;
            rec.estimate_degenerate = le.degree_deficient || le.rank_deficient;
            c.rec       = std::move(rec);
            c.objective = c.rec.residual_refined;
            c.ok        = true;
        } catch (...) {
            c.ok = false;
        }
    });

    Index best_n  = 0;
    Real  best_ob = std::numeric_limits<Real>::infinity();
    for (Index n = 1; n <= n_max; ++n) {
        const Candidate& c = cand[static_cast<size_t>(n - 1)];
        if (!c.ok) continue;
        if (c.objective <= bar) {
            out.n_x       = n;
            out.best      = c.rec;
            out.converged = true;
            return out;
        }
        if (c.objective < best_ob) { best_ob = c.objective; best_n = n; }
    }
    if (best_n == 0)
        throw std::runtime_error("select_model_order: every candidate failed");
    out.n_x       = best_n;
    out.best      = cand[static_cast<size_t>(best_n - 1)].rec;
    out.converged = false;
    return out;
}

} // namespace em
