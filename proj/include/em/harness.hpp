#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <em/eigenmatrix.hpp>
#include <em/recovery.hpp>
#include <em/refine.hpp>
#include <em/rng.hpp>

namespace em {

using ordered_json = nlohmann::ordered_json;

struct NoiseSpec {
    Real     sigma = 0;
    uint64_t seed  = 0;
};

/// Sample-location generator description.
struct SampleSpec {
    enum class Kind { annulus, interval, matsubara };
    Kind  kind  = Kind::interval;
    Real  a     = -1;  // annulus: r_min | interval: lo | matsubara: beta
    Real  b     = 1;   // annulus: r_max | interval: hi | matsubara: unused
    Index count = 64;  // matsubara: 2N (positive and negative frequencies)
};

const char*      to_string(SampleSpec::Kind k);
SampleSpec::Kind sample_kind_from_string(std::string_view name);

struct ExperimentConfig {
    std::string     scenario = "custom";  // rational|spectral|fourier|laplace|deconv|custom
    Kernel          kernel;
    ReferenceDomain domain = ReferenceDomain::interval;
    DomainMap       map;
    SampleSpec      samples;
    std::string     difficulty = "easy";  // easy|hard
    std::optional<SpikeModel> truth;      // explicit ground truth overrides the layout
    Index           n_x = 5;
    NoiseSpec       noise;
    Index           n_a             = 32;
    bool            auto_shrink_n_a = true;
    Real            norm_bound      = 3.0;
    Estimator       estimator       = Estimator::esprit;
    Index           ell             = 0;  // 0: default_esprit_window
    RefineOptions   refine;
    Index           trials      = 5;
    uint64_t        master_seed = 0;
    bool            parallel_trials = true;
};

/// Paper-scenario defaults (kernel, domain, map, samples, noise column values
/// are set per figure caption; sigma here is the middle column).
ExperimentConfig scenario_config(const std::string& name);

struct TrialRow {
    Index       trial = 0;
    uint64_t    sample_seed = 0, noise_seed = 0;
    Real        sigma = 0;
    bool        ok = false;
    std::string error;
    Real        location_error_raw = 0, location_error_refined = 0;
    Real        weight_error_raw = 0, weight_error_refined = 0;
    Real        residual_raw = 0, residual_refined = 0;
    Real        em_threshold = 0, em_norm = 0, em_cond = 0;
    Index       em_rank = 0, n_a_used = 0;
    SpikeModel  truth, raw, refined;
};

struct Aggregate {
    Real mean = 0, median = 0, max = 0;
};

struct ExperimentReport {
    ExperimentConfig                config;
    std::vector<TrialRow>           rows;
    std::map<std::string, Aggregate> aggregates;  // over successful rows
    Index                           failed_trials = 0;
};

/// u_j = sum_k G(s_j, x_k) w_k (exact forward model). Parallel over samples.
Observations synthesize(const Kernel& k, const SampleSet& s, const SpikeModel& truth);
Observations synthesize_serial(const Kernel& k, const SampleSet& s, const SpikeModel& truth);

/// u~_j = u_j (1 + sigma Z_j), Z_j i.i.d. real standard normal from the seeded
/// deterministic generator. Same spec, same output, bit for bit.
Observations add_noise(const Observations& u, const NoiseSpec& n);

SampleSet generate_samples(const SampleSpec& spec, uint64_t seed);

/// Deterministic spike layouts in X coordinates, weights all one.
/// easy: pairwise reference-domain separation >= 0.3; hard: one pair moved to
/// the scenario's close separation (0.25 for laplace, 0.1 otherwise).
SpikeModel spike_layout(const std::string& scenario, ReferenceDomain d, const DomainMap& m,
                        const std::string& difficulty, Index n_x, uint64_t seed);

struct Score {
    Real location_error = 0;
    Real weight_error   = 0;
};

/// Optimal one-to-one assignment by total location distance (brute force for
/// n <= 8, shortest-augmenting-path assignment otherwise); max matched errors,
/// plus one domain-diameter penalty per unmatched spike.
Score match_and_score(const SpikeModel& truth, const SpikeModel& estimate,
                      Real domain_diameter);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// One-shot recovery used by the CLI `recover` subcommand.
RecoveryResult run_recovery(const Kernel& k, const SampleSet& s, const Observations& u,
                            ReferenceDomain d, const DomainMap& m, Index n_x,
                            Index n_a, bool auto_shrink, Real norm_bound,
                            Estimator estimator, Index ell, const RefineOptions& opts);

// --- serialization ---------------------------------------------------------

ordered_json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const ordered_json& j);

ordered_json report_to_json(const ExperimentReport& report);
std::string  report_to_csv(const ExperimentReport& report);

ordered_json eigenmatrix_to_json(const Eigenmatrix& e);

/// report.json / report.csv / per-trial spike tables (x_re, x_im, w_re, w_im,
/// series in {exact, raw, refined}) under out_dir.
void write_report_files(const ExperimentReport& report, const std::string& out_dir,
                        const std::string& format);

/// CSV with header s_re,s_im,u_re,u_im -> sample set + observations.
void read_observation_csv(const std::string& path, SampleSet& samples, Observations& u);

} // namespace em
