// emx: unstructured sparse recovery via the eigenmatrix construction.
//
// Subcommands:
//   experiment  - run a named scenario (or a JSON config) and emit reports
//   recover     - one-shot recovery from a CSV data file
//   eigenmatrix - build M for a scenario's sample set and print diagnostics
//   grid        - emit probe grids or generated sample sets

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <em/harness.hpp>
#include <em/numerics.hpp>
#include <em/parallel.hpp>
#include <em/rng.hpp>

namespace {

using namespace em;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNumericalFailure = 2;

struct CommonOpts {
    std::string scenario = "fourier";
    std::string difficulty = "easy";
    double      sigma = -1;           // <0: keep scenario default
    uint64_t    seed = 0;
    long long   trials = 5;
    std::string estimator = "esprit";
    long long   n_x = 5;
    long long   ell = 0;
    long long   n_a = 32;
    double      norm_bound = 3.0;
    std::string out = "out";
    std::string format = "json";
    std::string config_path;
    bool        no_auto_n_a = false;
    bool        serial = false;
    // refine knobs
    long long max_iterations = 200;
    double    gradient_tolerance = 1e-10;
    double    step_tolerance = 1e-12;
    double    damping_init = 1e-3;
};

void add_refine_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--max-iterations", o.max_iterations, "refine: Gauss-Newton iteration cap");
    cmd->add_option("--gradient-tolerance", o.gradient_tolerance, "refine: gradient stop");
    cmd->add_option("--step-tolerance", o.step_tolerance, "refine: step-size stop");
    cmd->add_option("--damping-init", o.damping_init, "refine: initial damping");
}

RefineOptions refine_opts(const CommonOpts& o) {
    RefineOptions r;
    r.max_iterations     = o.max_iterations;
    r.gradient_tolerance = o.gradient_tolerance;
    r.step_tolerance     = o.step_tolerance;
    r.damping_init       = o.damping_init;
    return r;
}

ExperimentConfig make_config(const CommonOpts& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) throw std::invalid_argument("cannot open config: " + o.config_path);
        ordered_json j = ordered_json::parse(f);
        cfg = config_from_json(j);
    } else {
        cfg = scenario_config(o.scenario);
    }
    if (o.sigma >= 0) cfg.noise.sigma = o.sigma;
    cfg.difficulty      = o.difficulty;
    cfg.master_seed     = o.seed;
    cfg.trials          = o.trials;
    cfg.estimator       = estimator_from_string(o.estimator);
    cfg.n_x             = o.n_x;
    cfg.ell             = o.ell;
    cfg.n_a             = o.n_a;
    cfg.norm_bound      = o.norm_bound;
    cfg.auto_shrink_n_a = !o.no_auto_n_a;
    cfg.refine          = refine_opts(o);
    if (o.serial) cfg.parallel_trials = false;
    return cfg;
}

int cmd_experiment(const CommonOpts& o) {
    ExperimentConfig cfg = make_config(o);
    ExperimentReport report = run_experiment(cfg);
    write_report_files(report, o.out, o.format);
    std::cout << "scenario " << cfg.scenario << " (" << cfg.difficulty << "), sigma "
              << cfg.noise.sigma << ", " << report.rows.size() << " trials, "
              << report.failed_trials << " failed\n";
    for (const auto& [name, agg] : report.aggregates)
        std::cout << "  " << name << ": mean " << agg.mean << " median " << agg.median
                  << " max " << agg.max << '\n';
    std::cout << "wrote " << o.out << "/report." << o.format << '\n';
    if (report.failed_trials == static_cast<Index>(report.rows.size()))
        return kExitNumericalFailure;
    return kExitOk;
}

int cmd_recover(const CommonOpts& o, const std::string& data_path,
                const std::string& kernel_name, double gamma,
                const std::string& domain_name, double center_re, double center_im,
                double scale_re, double scale_im, long long n_max, double sigma_est) {
    SampleSet samples;
    Observations u;
    read_observation_csv(data_path, samples, u);

    const KernelFamily fam = kernel_family_from_string(kernel_name);
    const Kernel kernel =
        fam == KernelFamily::lorentzian ? Kernel::lorentzian(gamma) : Kernel{fam, 0.0};
    const ReferenceDomain domain = domain_from_string(domain_name);
    const Complex center(center_re, center_im), scale(scale_re, scale_im);
    const DomainMap map = (center == Complex(0, 0) && scale == Complex(1, 0))
                              ? DomainMap::identity()
                              : DomainMap::affine(center, scale);

    RecoveryResult rec;
    if (n_max > 0) {
        const Index n_a_used = o.no_auto_n_a
                                   ? o.n_a
                                   : choose_probe_count(kernel, samples, domain, map, o.n_a);
        const Eigenmatrix e = build(kernel, samples, domain, map, n_a_used, o.norm_bound);
        ModelOrderResult mo =
            select_model_order(kernel, samples, u, e, map, sigma_est, n_max,
                               estimator_from_string(o.estimator), refine_opts(o));
        rec = mo.best;
        rec.n_a_used = n_a_used;
        std::cout << "selected model order " << mo.n_x
                  << (mo.converged ? "" : " (not converged to noise level)") << '\n';
    } else {
        rec = run_recovery(kernel, samples, u, domain, map, o.n_x, o.n_a, !o.no_auto_n_a,
                           o.norm_bound, estimator_from_string(o.estimator), o.ell,
                           refine_opts(o));
    }

    namespace fs = std::filesystem;
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / "spikes.csv");
    f << "x_re,x_im,w_re,w_im,series\n";
    auto dump = [&](const SpikeModel& m, const char* series) {
        for (size_t i = 0; i < m.locations.size(); ++i)
            f << m.locations[i].real() << ',' << m.locations[i].imag() << ','
              << m.weights[i].real() << ',' << m.weights[i].imag() << ',' << series << '\n';
    };
    dump(rec.raw, "raw");
    dump(rec.refined, "refined");

    std::cout << "eigenmatrix: n_a " << rec.n_a_used << ", threshold " << rec.em_threshold
              << ", rank " << rec.em_rank << ", ||M|| " << rec.em_norm << ", cond(Ghat) "
              << rec.em_cond << '\n'
              << "residual raw " << rec.residual_raw << " -> refined "
              << rec.residual_refined << '\n'
              << "refined spikes:\n";
    for (size_t i = 0; i < rec.refined.locations.size(); ++i)
        std::cout << "  x = (" << rec.refined.locations[i].real() << ", "
                  << rec.refined.locations[i].imag() << ")  w = ("
                  << rec.refined.weights[i].real() << ", " << rec.refined.weights[i].imag()
                  << ")\n";
    std::cout << "wrote " << o.out << "/spikes.csv\n";
    return kExitOk;
}

int cmd_eigenmatrix(const CommonOpts& o) {
    ExperimentConfig cfg = make_config(o);
    const SampleSet samples =
        generate_samples(cfg.samples, derive_seed(cfg.master_seed, 1, 0));
    const Index n_a_used =
        cfg.auto_shrink_n_a
            ? choose_probe_count(cfg.kernel, samples, cfg.domain, cfg.map, cfg.n_a)
            : cfg.n_a;
    const Eigenmatrix e =
        build(cfg.kernel, samples, cfg.domain, cfg.map, n_a_used, cfg.norm_bound);

    // interior residual diagnostic on a seeded point cloud
    Rng rng(derive_seed(cfg.master_seed, 3, 0));
    std::vector<Complex> pts;
    for (int i = 0; i < 100; ++i) {
        if (cfg.domain == ReferenceDomain::disk) {
            const double r = 0.9 * std::sqrt(rng.uniform01());
            const double th = rng.uniform(0.0, 2.0 * 3.141592653589793);
            pts.emplace_back(r * std::cos(th), r * std::sin(th));
        } else {
            pts.emplace_back(rng.uniform(-0.9, 0.9), 0.0);
        }
    }
    const Real res = residual_diagnostic(e, cfg.kernel, samples, cfg.map, pts);

    namespace fs = std::filesystem;
    fs::create_directories(o.out);
    {
        std::ofstream f(fs::path(o.out) / "eigenmatrix.json");
        ordered_json j = eigenmatrix_to_json(e);
        j["interior_residual"] = res;
        f << j.dump(2) << '\n';
    }
    std::cout << "n_s " << e.size() << ", n_a " << n_a_used << " (requested " << cfg.n_a
              << "), threshold " << e.threshold_used << ", rank " << e.rank_kept
              << ", ||M|| " << e.norm_m << ", cond(Ghat) " << e.cond_ghat
              << ", interior residual " << res << '\n'
              << "wrote " << o.out << "/eigenmatrix.json\n";
    return kExitOk;
}

int cmd_grid(const CommonOpts& o, const std::string& kind, const std::string& domain_name) {
    namespace fs = std::filesystem;
    fs::create_directories(o.out);
    std::vector<Complex> pts;
    std::string file;
    if (kind == "probe") {
        const ProbeGrid g = probe_grid(domain_from_string(domain_name), o.n_a);
        pts  = g.nodes;
        file = "probe_grid.csv";
    } else if (kind == "samples") {
        const ExperimentConfig cfg = scenario_config(o.scenario);
        const SampleSet s = generate_samples(cfg.samples, derive_seed(o.seed, 1, 0));
        pts  = s.locations;
        file = "samples.csv";
    } else {
        throw std::invalid_argument("grid kind must be probe or samples");
    }
    std::ofstream f(fs::path(o.out) / file);
    f << "re,im\n";
    for (const Complex& p : pts) f << p.real() << ',' << p.imag() << '\n';
    std::cout << "wrote " << o.out << '/' << file << " (" << pts.size() << " points)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eigenmatrix-based unstructured sparse recovery"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* experiment = app.add_subcommand("experiment", "run a scenario experiment");
    experiment->add_option("--scenario", o.scenario,
                           "rational|spectral|fourier|laplace|deconv");
    experiment->add_option("--config", o.config_path, "JSON config file (overrides scenario)");
    experiment->add_option("--difficulty", o.difficulty, "easy|hard");
    experiment->add_option("--sigma", o.sigma, "noise magnitude");
    experiment->add_option("--seed", o.seed, "master seed");
    experiment->add_option("--trials", o.trials, "number of trials");
    experiment->add_option("--estimator", o.estimator, "prony|esprit");
    experiment->add_option("--n-x", o.n_x, "number of spikes");
    experiment->add_option("--ell", o.ell, "ESPRIT window (0 = default n_x+1)");
    experiment->add_option("--n-a", o.n_a, "probe grid size");
    experiment->add_option("--norm-bound", o.norm_bound, "eigenmatrix norm bound");
    experiment->add_flag("--no-auto-n-a", o.no_auto_n_a, "disable condition-based n_a shrink");
    experiment->add_flag("--serial", o.serial, "run trials serially");
    experiment->add_option("--out", o.out, "output directory");
    experiment->add_option("--format", o.format, "json|csv");
    add_refine_flags(experiment, o);

    std::string data_path, kernel_name = "cauchy", domain_name = "interval";
    double gamma = 4.0, center_re = 0, center_im = 0, scale_re = 1, scale_im = 0,
           sigma_est = 0;
    long long n_max = 0;
    auto* recover = app.add_subcommand("recover", "one-shot recovery from a CSV data file");
    recover->add_option("--data", data_path, "CSV with header s_re,s_im,u_re,u_im")
        ->required();
    recover->add_option("--kernel", kernel_name, "cauchy|power|fourier|laplace|lorentzian");
    recover->add_option("--gamma", gamma, "lorentzian width");
    recover->add_option("--domain", domain_name, "disk|interval");
    recover->add_option("--map-center-re", center_re, "affine map center (real)");
    recover->add_option("--map-center-im", center_im, "affine map center (imag)");
    recover->add_option("--map-scale-re", scale_re, "affine map scale (real)");
    recover->add_option("--map-scale-im", scale_im, "affine map scale (imag)");
    recover->add_option("--n-x", o.n_x, "number of spikes");
    recover->add_option("--n-max", n_max, "sweep model order 1..n_max instead of fixed n-x");
    recover->add_option("--sigma-est", sigma_est, "noise estimate for the model-order sweep");
    recover->add_option("--estimator", o.estimator, "prony|esprit");
    recover->add_option("--ell", o.ell, "ESPRIT window (0 = default)");
    recover->add_option("--n-a", o.n_a, "probe grid size");
    recover->add_option("--norm-bound", o.norm_bound, "eigenmatrix norm bound");
    recover->add_flag("--no-auto-n-a", o.no_auto_n_a, "disable condition-based n_a shrink");
    recover->add_option("--out", o.out, "output directory");
    add_refine_flags(recover, o);

    auto* eigenmatrix = app.add_subcommand("eigenmatrix", "build M and print diagnostics");
    eigenmatrix->add_option("--scenario", o.scenario, "scenario whose samples to use");
    eigenmatrix->add_option("--config", o.config_path, "JSON config file");
    eigenmatrix->add_option("--seed", o.seed, "sample seed");
    eigenmatrix->add_option("--n-a", o.n_a, "probe grid size");
    eigenmatrix->add_option("--norm-bound", o.norm_bound, "norm bound");
    eigenmatrix->add_flag("--no-auto-n-a", o.no_auto_n_a, "disable condition-based n_a shrink");
    eigenmatrix->add_option("--out", o.out, "output directory");

    std::string grid_kind = "probe";
    auto* grid = app.add_subcommand("grid", "emit probe or sample grids");
    grid->add_option("--kind", grid_kind, "probe|samples");
    grid->add_option("--domain", domain_name, "disk|interval (probe)");
    grid->add_option("--n-a", o.n_a, "probe grid size");
    grid->add_option("--scenario", o.scenario, "scenario (samples)");
    grid->add_option("--seed", o.seed, "sample seed");
    grid->add_option("--out", o.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (experiment->parsed()) return cmd_experiment(o);
        if (recover->parsed())
            return cmd_recover(o, data_path, kernel_name, gamma, domain_name, center_re,
                               center_im, scale_re, scale_im, n_max, sigma_est);
        if (eigenmatrix->parsed()) return cmd_eigenmatrix(o);
        if (grid->parsed()) return cmd_grid(o, grid_kind, domain_name);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitNumericalFailure;
    }
    return kExitConfigError;
}
