#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <em/harness.hpp>

#include "oracles.hpp"

using namespace em;

TEST_CASE("synthesize is the exact forward model") {
    const SampleSet s(std::vector<Complex>{{2, 0}, {3, 1}, {-1, 2}});
    const SpikeModel one{{{0.4, 0.1}}, {{1, 0}}};
    const Observations u = synthesize(Kernel::cauchy(), s, one);
    for (Index j = 0; j < 3; ++j)
        CHECK(std::abs(u.values(j) -
                       eval_kernel(Kernel::cauchy(), s.locations[static_cast<size_t>(j)],
                                   {0.4, 0.1})) < 1e-15);

    // two spikes = sum of the single-spike syntheses
    const SpikeModel two{{{0.4, 0.1}, {-0.2, 0.3}}, {{1, 0}, {2, 0}}};
    const SpikeModel second{{{-0.2, 0.3}}, {{2, 0}}};
    const Observations u2 = synthesize(Kernel::cauchy(), s, two);
    const Observations us = synthesize(Kernel::cauchy(), s, second);
    CHECK((u2.values - (u.values + us.values)).norm() <= 1e-14 * u2.values.norm());
}

TEST_CASE("matsubara grid and spectral synthesis") {
    const SampleSet s = generate_samples({SampleSpec::Kind::matsubara, 100.0, 0.0, 256}, 0);
    REQUIRE(s.size() == 256);
    const Real top = (2.0 * 128 - 1) * 3.141592653589793 / 100.0;
    CHECK(s.locations.front().imag() == doctest::Approx(-top));
    CHECK(s.locations.back().imag() == doctest::Approx(top));
    for (Index j = 1; j < 256; ++j)
        CHECK(s.locations[static_cast<size_t>(j)].imag() >
              s.locations[static_cast<size_t>(j - 1)].imag());

    // u(-s) = conj(u(s)) for real spikes with real weights
    const SpikeModel truth{{{-0.5, 0}, {0.3, 0}}, {{1, 0}, {1, 0}}};
    const Observations u = synthesize(Kernel::cauchy(), s, truth);
    for (Index j = 0; j < 256; ++j) {
        CHECK(std::isfinite(u.values(j).real()));
        const Index mirror = 255 - j;  // s_mirror = -s_j on this grid
        CHECK(std::abs(u.values(mirror) - std::conj(u.values(j))) <= 1e-12);
    }
}

TEST_CASE("add_noise") {
    Observations u{oracle::random_vector(32, 3)};

    SUBCASE("sigma zero is exact") {
        const Observations v = add_noise(u, {0.0, 123});
        CHECK((v.values - u.values).norm() == 0.0);
    }
    SUBCASE("fixed seed twice gives identical vectors") {
        const Observations a = add_noise(u, {1e-2, 42});
        const Observations b = add_noise(u, {1e-2, 42});
        CHECK((a.values - b.values).norm() == 0.0);
        const Observations c = add_noise(u, {1e-2, 43});
        CHECK((c.values - a.values).norm() > 0.0);
    }
    SUBCASE("noise moments over 1e5 entries") {
        Observations ones{Vec::Ones(100000)};
        const Real sigma = 1e-2;
        const Observations noisy = add_noise(ones, {sigma, 7});
        Real mean = 0;
        for (Index j = 0; j < noisy.values.size(); ++j)
            mean += (noisy.values(j).real() - 1.0) / sigma;
        mean /= static_cast<Real>(noisy.values.size());
        Real var = 0;
        for (Index j = 0; j < noisy.values.size(); ++j) {
            const Real z = (noisy.values(j).real() - 1.0) / sigma;
            var += (z - mean) * (z - mean);
        }
        var /= static_cast<Real>(noisy.values.size() - 1);
        CHECK(mean > -0.02);
        CHECK(mean < 0.02);
        CHECK(var > 0.98);
        CHECK(var < 1.02);
    }
}

TEST_CASE("generate_samples") {
    SUBCASE("annulus moduli stay in band, deterministic per seed") {
        const SampleSet a = generate_samples({SampleSpec::Kind::annulus, 1.2, 2.2, 40}, 9);
        const SampleSet b = generate_samples({SampleSpec::Kind::annulus, 1.2, 2.2, 40}, 9);
        REQUIRE(a.size() == 40);
        for (Index j = 0; j < 40; ++j) {
            const Real r = std::abs(a.locations[static_cast<size_t>(j)]);
            CHECK(r >= 1.2);
            CHECK(r <= 2.2);
            CHECK(a.locations[static_cast<size_t>(j)] == b.locations[static_cast<size_t>(j)]);
        }
    }
    SUBCASE("interval bounds") {
        const SampleSet s = generate_samples({SampleSpec::Kind::interval, 0.0, 10.0, 100}, 4);
        for (const Complex& z : s.locations) {
            CHECK(z.imag() == 0.0);
            CHECK(z.real() >= 0.0);
            CHECK(z.real() <= 10.0);
        }
    }
}

TEST_CASE("spike layouts") {
    SUBCASE("easy layouts keep the advertised separation") {
        for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
            const SpikeModel m = spike_layout("fourier", ReferenceDomain::interval,
                                              DomainMap::identity(), "easy", 5, seed);
            REQUIRE(m.size() == 5);
            for (size_t i = 0; i < 5; ++i)
                for (size_t j = i + 1; j < 5; ++j)
                    CHECK(std::abs(m.locations[i] - m.locations[j]) >= 0.3);
            for (const Complex& w : m.weights) CHECK(w == Complex(1, 0));
        }
    }
    SUBCASE("hard fourier layout has exactly one pair at 0.1") {
        const SpikeModel m = spike_layout("fourier", ReferenceDomain::interval,
                                          DomainMap::identity(), "hard", 5, 11);
        int close_pairs = 0;
        for (size_t i = 0; i < 5; ++i)
            for (size_t j = i + 1; j < 5; ++j)
                if (std::abs(std::abs(m.locations[i] - m.locations[j]) - 0.1) <= 1e-12)
                    ++close_pairs;
        CHECK(close_pairs == 1);
    }
    SUBCASE("hard laplace layout pair sits at 0.25 inside X") {
        const DomainMap map = DomainMap::affine({1.1, 0}, {1.0, 0});
        const SpikeModel m = spike_layout("laplace", ReferenceDomain::interval, map,
                                          "hard", 5, 12);
        Real closest = 10;
        for (size_t i = 0; i < 5; ++i)
            for (size_t j = i + 1; j < 5; ++j)
                closest = std::min(closest, std::abs(m.locations[i] - m.locations[j]));
        CHECK(closest == doctest::Approx(0.25).epsilon(1e-12));
        for (const Complex& x : m.locations) {
            CHECK(x.real() >= 0.1);
            CHECK(x.real() <= 2.1);
        }
    }
    SUBCASE("disk layouts stay in the annulus band") {
        const SpikeModel m = spike_layout("rational", ReferenceDomain::disk,
                                          DomainMap::identity(), "easy", 5, 13);
        for (const Complex& x : m.locations) {
            CHECK(std::abs(x) >= 0.55);
            CHECK(std::abs(x) <= 0.90);
        }
    }
}

TEST_CASE("match_and_score") {
    const SpikeModel truth{{{0.1, 0}, {0.5, 0}, {-0.4, 0}},
                           {{1, 0}, {1, 0}, {1, 0}}};
    SUBCASE("identical and permuted models score zero") {
        CHECK(match_and_score(truth, truth, 2.0).location_error == 0.0);
        SpikeModel perm{{{-0.4, 0}, {0.5, 0}, {0.1, 0}}, {{1, 0}, {1, 0}, {1, 0}}};
        const Score sc = match_and_score(truth, perm, 2.0);
        CHECK(sc.location_error == 0.0);
        CHECK(sc.weight_error == 0.0);
    }
    SUBCASE("single offset shows up as the max matched distance") {
        SpikeModel est = truth;
        est.locations[1] += Complex(0.01, 0);
        const Score sc = match_and_score(truth, est, 2.0);
        CHECK(sc.location_error == doctest::Approx(0.01));
        CHECK(sc.weight_error == 0.0);
    }
    SUBCASE("count mismatch adds one diameter per unmatched spike") {
        SpikeModel est = truth;
        est.locations.pop_back();
        est.weights.pop_back();
        const Score sc = match_and_score(truth, est, 2.0);
        CHECK(sc.location_error >= 2.0);
    }
    SUBCASE("symmetric in its arguments for equal counts") {
        SpikeModel est = truth;
        est.locations[0] += Complex(0.03, 0.01);
        est.locations[2] -= Complex(0.02, 0);
        const Score ab = match_and_score(truth, est, 2.0);
        const Score ba = match_and_score(est, truth, 2.0);
        CHECK(ab.location_error == doctest::Approx(ba.location_error));
    }
    SUBCASE("assignment path beyond the brute-force cutoff") {
        SpikeModel big, est;
        for (int i = 0; i < 10; ++i) {
            big.locations.emplace_back(0.17 * i - 0.8, 0);
            big.weights.emplace_back(1, 0);
        }
        est = big;
        std::rotate(est.locations.begin(), est.locations.begin() + 3, est.locations.end());
        std::rotate(est.weights.begin(), est.weights.begin() + 3, est.weights.end());
        est.locations[4] += Complex(0.004, 0);
        const Score sc = match_and_score(big, est, 2.0);
        CHECK(sc.location_error == doctest::Approx(0.004));
    }
}

TEST_CASE("scenario configs round trip through json") {
    for (const char* name : {"rational", "spectral", "fourier", "laplace", "deconv"}) {
        ExperimentConfig cfg = scenario_config(name);
        cfg.master_seed = 99;
        cfg.noise.sigma = 3.14e-4;
        const ordered_json j = config_to_json(cfg);
        const ExperimentConfig back = config_from_json(j);
        CHECK(config_to_json(back) == j);
    }
    // custom config with explicit truth
    ExperimentConfig cfg = scenario_config("fourier");
    cfg.scenario = "custom";
    cfg.truth = SpikeModel{{{0.25, 0}, {-0.5, 0}}, {{1, 0}, {2, 0.5}}};
    const ordered_json j = config_to_json(cfg);
    const ExperimentConfig back = config_from_json(j);
    REQUIRE(back.truth.has_value());
    CHECK(back.truth->locations == cfg.truth->locations);
    CHECK(config_to_json(back) == j);
}

TEST_CASE("unknown scenario is a config error") {
    CHECK_THROWS_AS(scenario_config("zeta"), std::invalid_argument);
}

TEST_CASE("run_experiment end to end") {
    ExperimentConfig cfg = scenario_config("fourier");
    cfg.noise.sigma = 1e-4;
    cfg.master_seed = 7;
    cfg.trials = 5;

    const ExperimentReport report = run_experiment(cfg);
    REQUIRE(report.rows.size() == 5);
    CHECK(report.failed_trials == 0);
    for (const TrialRow& row : report.rows) {
        CHECK(row.ok);
        CHECK(row.location_error_refined <= 1e-3);
        CHECK(row.residual_refined <= row.residual_raw + 1e-9);
        CHECK(row.em_norm <= 3.0 + 1e-9);
    }

    SUBCASE("bit-identical reports on repeat") {
        const ExperimentReport again = run_experiment(cfg);
        CHECK(report_to_json(report).dump() == report_to_json(again).dump());
    }
    SUBCASE("rational noiseless single trial is machine exact") {
        ExperimentConfig rc = scenario_config("rational");
        rc.noise.sigma = 0;
        rc.trials = 1;
        rc.master_seed = 7;
        const ExperimentReport r = run_experiment(rc);
        REQUIRE(r.rows.size() == 1);
        CHECK(r.rows[0].ok);
        CHECK(r.rows[0].location_error_refined <= 1e-8);
    }
    SUBCASE("laplace rows stay well formed at sigma 1e-5") {
        ExperimentConfig lc = scenario_config("laplace");
        lc.noise.sigma = 1e-5;
        lc.trials = 3;
        lc.master_seed = 7;
        const ExperimentReport r = run_experiment(lc);
        REQUIRE(r.rows.size() == 3);
        for (const TrialRow& row : r.rows) {
            CHECK(row.ok);
            CHECK(std::isfinite(row.location_error_refined));
            CHECK(row.residual_refined <= row.residual_raw + 1e-9);
        }
    }
}

TEST_CASE("report files and csv data round trips") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "em_harness_test";
    fs::remove_all(dir);

    ExperimentConfig cfg = scenario_config("fourier");
    cfg.noise.sigma = 1e-3;
    cfg.trials = 2;
    cfg.master_seed = 3;
    const ExperimentReport report = run_experiment(cfg);

    write_report_files(report, dir.string(), "json");
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "trial_0_spikes.csv"));
    CHECK(fs::exists(dir / "trial_1_spikes.csv"));
    write_report_files(report, dir.string(), "csv");
    CHECK(fs::exists(dir / "report.csv"));

    // spike tables carry the three series
    std::ifstream f(dir / "trial_0_spikes.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "x_re,x_im,w_re,w_im,series");
    int exact = 0, raw = 0, refined = 0;
    while (std::getline(f, line)) {
        exact   += line.find("exact") != std::string::npos;
        raw     += line.find(",raw") != std::string::npos;
        refined += line.find("refined") != std::string::npos;
    }
    CHECK(exact == 5);
    CHECK(raw >= 1);
    CHECK(refined >= 1);

    // observation csv: write from a synthesized set, read back
    const SampleSet s(std::vector<Complex>{{1.5, 0.2}, {2.5, -0.4}, {3.5, 1.0}});
    const Observations u = synthesize(Kernel::cauchy(), s, {{{0.3, 0}}, {{1, 0}}});
    const fs::path data = dir / "obs.csv";
    {
        std::ofstream out(data);
        out.precision(17);
        out << "s_re,s_im,u_re,u_im\n";
        for (Index j = 0; j < 3; ++j)
            out << s.locations[static_cast<size_t>(j)].real() << ','
                << s.locations[static_cast<size_t>(j)].imag() << ','
                << u.values(j).real() << ',' << u.values(j).imag() << '\n';
    }
    SampleSet s2;
    Observations u2;
    read_observation_csv(data.string(), s2, u2);
    REQUIRE(s2.size() == 3);
    CHECK((u2.values - u.values).norm() <= 1e-12 * u.values.norm());

    std::ofstream bad(dir / "bad.csv");
    bad << "wrong,header\n";
    bad.close();
    SampleSet s3;
    Observations u3;
    CHECK_THROWS_AS(read_observation_csv((dir / "bad.csv").string(), s3, u3),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("derive_seed separates streams and indices") {
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
    CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
    CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
    CHECK(derive_seed(5, 3, 7) == derive_seed(5, 3, 7));
}
