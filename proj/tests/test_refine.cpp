#include <doctest.h>

#include <cmath>

#include <em/harness.hpp>
#include <em/refine.hpp>

#include "oracles.hpp"

using namespace em;

TEST_CASE("analytic x-derivatives match central finite differences") {
    Rng rng(77);
    const std::vector<Kernel> families = {Kernel::cauchy(), Kernel::power(),
                                          Kernel::fourier(), Kernel::laplace(),
                                          Kernel::lorentzian(4.0)};
    for (const Kernel& k : families) {
        int checked = 0;
        while (checked < 50) {
            Complex s, x;
            switch (k.family) {
                case KernelFamily::cauchy:
                    s = {rng.uniform(1.3, 2.2), rng.uniform(-1, 1)};
                    x = {rng.uniform(-0.8, 0.8), rng.uniform(-0.4, 0.4)};
                    break;
                case KernelFamily::power:
                    s = {rng.uniform(0, 6), 0};
                    x = {rng.uniform(0.3, 1.2), rng.uniform(0.1, 0.8)};
                    break;
                case KernelFamily::fourier:
                    s = {rng.uniform(-5, 5), 0};
                    x = {rng.uniform(-0.9, 0.9), 0};
                    break;
                case KernelFamily::laplace:
                    s = {rng.uniform(0, 6), 0};
                    x = {rng.uniform(0.2, 2.0), 0};
                    break;
                case KernelFamily::lorentzian:
                    s = {rng.uniform(-5, 5), 0};
                    x = {rng.uniform(-0.9, 0.9), 0};
                    break;
            }
            const Complex analytic = kernel_x_derivative(k, s, x);
            const Complex numeric  = oracle::central_diff(
                [&](Complex xx) { return eval_kernel(k, s, xx); }, x);
            const Real scale = std::max(std::abs(analytic), Real(1e-8));
            CHECK(std::abs(analytic - numeric) <= 1e-6 * scale);
            ++checked;
        }
    }
}

namespace {

struct FourierSetup {
    SampleSet    samples = generate_samples({SampleSpec::Kind::interval, -5, 5, 128}, 31);
    Kernel       kernel  = Kernel::fourier();
    SpikeModel   truth{{{-0.62, 0}, {0.11, 0}, {0.55, 0}},
                       {{1, 0}, {1, 0}, {1, 0}}};
    Observations u;

    FourierSetup() { u = synthesize(kernel, samples, truth); }
};

} // namespace

TEST_CASE("refine at the truth is a fixed point") {
    FourierSetup f;
    const RefineResult r = refine(f.kernel, f.samples, f.u, f.truth,
                                  ReferenceDomain::interval, DomainMap::identity());
    CHECK(r.objective <= 1e-20 * f.u.values.squaredNorm());
    for (size_t i = 0; i < f.truth.locations.size(); ++i)
        CHECK(std::abs(r.model.locations[i] - f.truth.locations[i]) <= 1e-10);
}

TEST_CASE("refine recovers the truth from a small perturbation") {
    FourierSetup f;
    SpikeModel init = f.truth;
    for (size_t i = 0; i < init.locations.size(); ++i)
        init.locations[i] += Complex((i % 2 == 0) ? 1e-3 : -1e-3, 0);
    const RefineResult r = refine(f.kernel, f.samples, f.u, init,
                                  ReferenceDomain::interval, DomainMap::identity());
    for (size_t i = 0; i < f.truth.locations.size(); ++i)
        CHECK(std::abs(r.model.locations[i] - f.truth.locations[i]) <= 1e-8);
}

TEST_CASE("refine never increases the objective") {
    FourierSetup f;
    const Observations noisy = add_noise(f.u, {1e-2, 17});
    SpikeModel init = f.truth;
    for (auto& x : init.locations) x += Complex(0.05, 0);
    Vec w0(3);
    const Mat a = assemble_matrix(f.kernel, f.samples, init.locations);
    w0 = lstsq(a, noisy.values);
    init.weights.assign(w0.data(), w0.data() + 3);
    const Real f0 = objective_value(f.kernel, f.samples, noisy, init);

    const RefineResult r = refine(f.kernel, f.samples, noisy, init,
                                  ReferenceDomain::interval, DomainMap::identity());
    CHECK(r.objective <= f0 + 1e-12);
    // reported objective matches an independent recomputation
    CHECK(r.objective ==
          doctest::Approx(objective_value(f.kernel, f.samples, noisy, r.model))
              .epsilon(1e-12));
}

TEST_CASE("refine on the disk polishes complex locations") {
    const SampleSet s = generate_samples({SampleSpec::Kind::annulus, 1.2, 2.2, 40}, 3);
    const SpikeModel truth{{{0.45, 0.35}, {-0.5, 0.2}}, {{1, 0}, {1, 0}}};
    const Observations u = synthesize(Kernel::cauchy(), s, truth);
    SpikeModel init = truth;
    init.locations[0] += Complex(2e-3, -1e-3);
    init.locations[1] += Complex(-1e-3, 2e-3);
    const RefineResult r = refine(Kernel::cauchy(), s, u, init, ReferenceDomain::disk,
                                  DomainMap::identity());
    CHECK(oracle::set_distance(r.model.locations, truth.locations) <= 1e-8);
}

TEST_CASE("refine handles an empty model") {
    FourierSetup f;
    const RefineResult r = refine(f.kernel, f.samples, f.u, SpikeModel{},
                                  ReferenceDomain::interval, DomainMap::identity());
    CHECK(r.no_progress);
    CHECK(r.objective == doctest::Approx(f.u.values.squaredNorm()));
}

TEST_CASE("select_model_order finds three spikes") {
    FourierSetup f;
    const Index n_a = choose_probe_count(f.kernel, f.samples, ReferenceDomain::interval,
                                         DomainMap::identity(), 32);
    const Eigenmatrix e = build(f.kernel, f.samples, ReferenceDomain::interval,
                                DomainMap::identity(), n_a, 3.0);

    SUBCASE("noiseless data terminates at the true order") {
        const ModelOrderResult r =
            select_model_order(f.kernel, f.samples, f.u, e, DomainMap::identity(), 0.0, 8,
                               Estimator::esprit);
        CHECK(r.n_x == 3);
        CHECK(r.converged);
    }
    SUBCASE("sigma = 1e-3 recovers the order in most seeds") {
        int hits = 0;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            const Observations noisy = add_noise(f.u, {1e-3, 1000 + seed});
            const ModelOrderResult r =
                select_model_order(f.kernel, f.samples, noisy, e, DomainMap::identity(),
                                   1e-3, 8, Estimator::esprit);
            hits += (r.n_x == 3);
        }
        CHECK(hits >= 4);
    }
    SUBCASE("zero data returns a single zero-weight spike") {
        Observations zero{Vec::Zero(f.samples.size())};
        const ModelOrderResult r =
            select_model_order(f.kernel, f.samples, zero, e, DomainMap::identity(), 0.0, 8,
                               Estimator::esprit);
        CHECK(r.n_x == 1);
        CHECK(r.zero_data);
        for (const Complex& w : r.best.refined.weights) CHECK(std::abs(w) == 0.0);
    }
}

TEST_CASE("select_model_order validates n_max") {
    FourierSetup f;
    const Eigenmatrix e = build(f.kernel, f.samples, ReferenceDomain::interval,
                                DomainMap::identity(), 16, 3.0);
    CHECK_THROWS_AS(select_model_order(f.kernel, f.samples, f.u, e, DomainMap::identity(),
                                       0.0, 100, Estimator::esprit),
                    std::invalid_argument);
}
