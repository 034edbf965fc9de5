// Command-line front end: scenario generation, one-shot estimation, CRLB
// evaluation, and Monte Carlo sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 solver
// failure rate above 50%.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <seculoc/seculoc.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitSolverFailures = 3;

struct CommonOpts {
    int n = 10;
    double delta = 20.0;
    double sigma = 15.0;
    int k = 10;
    double b = 100.0;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--n", o.n, "Number of anchors")->capture_default_str();
    cmd->add_option("--delta", o.delta, "Attack magnitude cap in meters (0 disables attacks)")
        ->capture_default_str();
    cmd->add_option("--sigma", o.sigma, "Range noise standard deviation in meters")
        ->capture_default_str();
    cmd->add_option("--k", o.k, "Range samples per anchor (median taken)")->capture_default_str();
    cmd->add_option("--b", o.b, "Deployment area side length in meters")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Master RNG seed")->capture_default_str();
}

seculoc::Scenario draw_scenario(const CommonOpts& o, seculoc::Rng& rng) {
    seculoc::ScenarioConfig sc;
    sc.n = o.n;
    sc.b = o.b;
    sc.delta_cap = o.delta;
    sc.seed = o.seed;
    seculoc::Scenario s = seculoc::generate_deployment(sc, rng);
    if (o.delta > 0.0) s = seculoc::assign_attackers(std::move(s), o.delta, rng);
    return s;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

int run_simulate(const CommonOpts& o, const std::string& out_path) {
    seculoc::Rng rng(o.seed);
    seculoc::Scenario s = draw_scenario(o, rng);
    seculoc::RangeObservations obs = seculoc::sample_ranges(s, o.sigma, o.k, rng);
    nlohmann::json j;
    j["scenario"] = seculoc::scenario_to_json(s);
    j["observations"] = seculoc::observations_to_json(obs);
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    return kExitOk;
}

int run_estimate(const CommonOpts& o, const std::string& in_path, const std::string& out_path,
                 const seculoc::CcpSettings& ccp) {
    seculoc::Scenario s;
    seculoc::RangeObservations obs;
    double sigma = o.sigma;
    if (!in_path.empty()) {
        nlohmann::json j = load_json(in_path);
        s = seculoc::scenario_from_json(j.at("scenario"));
        obs = seculoc::observations_from_json(j.at("observations"));
        sigma = obs.sigma;
    } else {
        seculoc::Rng rng(o.seed);
        s = draw_scenario(o, rng);
        obs = seculoc::sample_ranges(s, o.sigma, o.k, rng);
    }

    seculoc::EstimateReport rep = seculoc::run_ccp(s.anchors, obs.medians, sigma, ccp);

    std::printf("anchors: %d  sigma: %g m  samples/link: %d\n", s.n(), sigma, obs.k);
    if (!s.attacker_set.empty()) {
        std::printf("true attackers:");
        for (int i : s.attacker_set) std::printf(" %d", i);
        std::printf("\n");
    }
    if (rep.has_estimate()) {
        std::printf("estimate: (");
        for (int c = 0; c < rep.x_hat.size(); ++c)
            std::printf("%s%.6f", c ? ", " : "", rep.x_hat[c]);
        std::printf(")  iterations: %d\n", rep.iterations_used);
        if (s.target.size() == rep.x_hat.size())
            std::printf("position error: %.6f m\n", (rep.x_hat - s.target).norm());
        std::printf("detected:");
        if (rep.detected.empty()) std::printf(" none");
        for (int i : rep.detected) std::printf(" %d", i);
        std::printf("\n");
        for (std::size_t t = 0; t < rep.data_objectives.size(); ++t)
            std::printf("round %zu: objective %.9f (%s)\n", t + 1, rep.data_objectives[t],
                        seculoc::conic::to_string(rep.solver_statuses[t]));
    } else {
        std::printf("estimate: none (all rounds failed)\n");
    }
    if (!out_path.empty())
        write_text(out_path, seculoc::report_to_json(rep).dump(2) + "\n");
    return rep.has_estimate() ? kExitOk : kExitSolverFailures;
}

int run_crlb(const CommonOpts& o, const std::string& in_path) {
    seculoc::Scenario s;
    double sigma = o.sigma;
    if (!in_path.empty()) {
        nlohmann::json j = load_json(in_path);
        s = seculoc::scenario_from_json(j.contains("scenario") ? j.at("scenario") : j);
        if (j.contains("observations"))
            sigma = j.at("observations").at("sigma").get<double>();
    } else {
        seculoc::Rng rng(o.seed);
        s = draw_scenario(o, rng);
    }
    const seculoc::FisherPartition genuine =
        seculoc::fim_attack_model(s.target, s.anchors, sigma, {});
    const seculoc::FisherPartition attacked =
        seculoc::fim_attack_model(s.target, s.anchors, sigma, s.attacker_set);
    std::printf("anchors: %d  sigma: %g m  attackers: %zu\n", s.n(), sigma,
                s.attacker_set.size());
    std::printf("position CRLB, all links genuine: %.9f m^2\n", seculoc::crlb_position(genuine));
    std::printf("position CRLB, attack model:      %.9f m^2\n", seculoc::crlb_position(attacked));
    return kExitOk;
}

int run_bench(seculoc::ExperimentConfig cfg, const std::vector<std::string>& estimator_names,
              const std::string& out_path) {
    if (!estimator_names.empty()) {
        cfg.estimators.clear();
        for (const std::string& name : estimator_names)
            cfg.estimators.push_back(seculoc::estimator_from_string(name));
    }
    seculoc::ExperimentResult res = seculoc::run_experiment(cfg);
    if (out_path.empty())
        std::cout << seculoc::to_csv(res);
    else
        seculoc::emit_csv(res, out_path);

    long trials = 0, failures = 0;
    for (const seculoc::SweepEstimatorSummary& s : res.summaries) {
        trials += s.n_trials;
        failures += s.n_failures;
    }
    std::fprintf(stderr, "bench: %ld trials, %ld solver failures\n", trials, failures);
    if (2 * failures > trials) return kExitSolverFailures;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secure range-based localization toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string in_path, out_path;

    CLI::App* simulate =
        app.add_subcommand("simulate", "Draw a deployment plus range observations as JSON");
    add_common(simulate, opts);
    simulate->add_option("--out", out_path, "Output JSON path (stdout if omitted)");

    seculoc::CcpSettings ccp;
    CLI::App* estimate =
        app.add_subcommand("estimate", "Run the robust estimator on one instance");
    add_common(estimate, opts);
    estimate->add_option("--in", in_path, "Instance JSON produced by `simulate`");
    estimate->add_option("--out", out_path, "Write the full report JSON here");
    estimate->add_option("--t-max", ccp.T, "Outer iteration cap")->capture_default_str();
    estimate->add_option("--tau", ccp.tau, "Iterate-movement stopping threshold, meters")
        ->capture_default_str();
    estimate
        ->add_flag_callback(
            "--no-sigma-normalization", [&ccp] { ccp.sigma_normalize = false; },
            "Solve in raw meters instead of sigma-scaled coordinates")
        ->take_last();

    CLI::App* crlb = app.add_subcommand("crlb", "Position error bound for a scenario");
    add_common(crlb, opts);
    crlb->add_option("--in", in_path, "Scenario JSON (uses its true attacker set)");

    seculoc::ExperimentConfig bench_cfg;
    std::string sweep_var = "sigma";
    std::vector<std::string> estimator_names;
    CLI::App* bench = app.add_subcommand("bench", "Monte Carlo sweep, CSV output");
    bench->add_option("--sweep-var", sweep_var, "Swept variable: N, Delta, or sigma")
        ->capture_default_str();
    bench->add_option("--sweep-values", bench_cfg.sweep_values, "Values taken by the swept variable")
        ->delimiter(',');
    bench->add_option("--n", bench_cfg.n, "Anchors (fixed unless swept)")->capture_default_str();
    bench->add_option("--delta", bench_cfg.delta, "Attack cap in meters (fixed unless swept)")
        ->capture_default_str();
    bench->add_option("--sigma", bench_cfg.sigma, "Noise std dev in meters (fixed unless swept)")
        ->capture_default_str();
    bench->add_option("--k", bench_cfg.k, "Samples per link")->capture_default_str();
    bench->add_option("--b", bench_cfg.b, "Area side in meters")->capture_default_str();
    bench->add_option("--nd", bench_cfg.n_deployments, "Deployments per sweep value")
        ->capture_default_str();
    bench->add_option("--nc", bench_cfg.n_choices, "Attacker re-selections per deployment")
        ->capture_default_str();
    bench->add_option("--seed", bench_cfg.seed, "Master RNG seed")->capture_default_str();
    bench
        ->add_option("--estimators", estimator_names,
                     "Comma list from {sdp, grid_oracle, ls_baseline}")
        ->delimiter(',');
    bench->add_option("--grid-res", bench_cfg.grid_resolution, "Grid oracle points per axis")
        ->capture_default_str();
    bench->add_option("--threads", bench_cfg.threads, "Worker threads")->capture_default_str();
    bench->add_option("--t-max", bench_cfg.ccp.T, "Outer iteration cap for the SDP estimator")
        ->capture_default_str();
    bench->add_option("--tau", bench_cfg.ccp.tau, "SDP stopping threshold, meters")
        ->capture_default_str();
    bench->add_option("--out", out_path, "CSV path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) return run_simulate(opts, out_path);
        if (estimate->parsed()) return run_estimate(opts, in_path, out_path, ccp);
        if (crlb->parsed()) return run_crlb(opts, in_path);
        if (bench->parsed()) {
            bench_cfg.sweep_variable = seculoc::sweep_from_string(sweep_var);
            return run_bench(bench_cfg, estimator_names, out_path);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitConfig;
}
