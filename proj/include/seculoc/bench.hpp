#pragma once
// Monte Carlo harness: sweeps one variable, runs N_D deployments x N_C
// attacker re-selections per sweep value, feeds the identical noise and
// attack realizations to every enabled estimator, and aggregates RMSE,
// detection statistics, and the average position CRLB into CSV rows.
//
// Determinism: every trial derives its own RNG streams from the master seed
// and the trial coordinates alone, records land in slots keyed by trial
// index, and aggregation is a sequential pass over those slots - so output
// is byte-identical for any thread count.

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/crlb.hpp"
#include "seculoc/estimator.hpp"
#include "seculoc/measurement.hpp"
#include "seculoc/oracle.hpp"
#include "seculoc/rng.hpp"
#include "seculoc/scenario.hpp"

namespace seculoc {

enum class EstimatorKind { sdp, grid_oracle, ls_baseline };
enum class SweepVariable { n, delta, sigma };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::sdp: return "sdp";
        case EstimatorKind::grid_oracle: return "grid_oracle";
        case EstimatorKind::ls_baseline: return "ls_baseline";
    }
    return "?";
}

inline EstimatorKind estimator_from_string(const std::string& s) {
    if (s == "sdp") return EstimatorKind::sdp;
    if (s == "grid_oracle") return EstimatorKind::grid_oracle;
    if (s == "ls_baseline") return EstimatorKind::ls_baseline;
    throw std::invalid_argument("unknown estimator: " + s);
}

inline const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::n: return "N";
        case SweepVariable::delta: return "Delta";
        case SweepVariable::sigma: return "sigma";
    }
    return "?";
}

inline SweepVariable sweep_from_string(const std::string& s) {
    if (s == "N" || s == "n") return SweepVariable::n;
    if (s == "Delta" || s == "delta") return SweepVariable::delta;
    if (s == "sigma") return SweepVariable::sigma;
    throw std::invalid_argument("unknown sweep variable: " + s);
}

struct ExperimentConfig {
    SweepVariable sweep_variable = SweepVariable::sigma;
    std::vector<double> sweep_values = {15.0};
    int n = 10;            // anchors, overridden on an N sweep
    double delta = 20.0;   // attack cap in meters, 0 disables attacks
    double sigma = 15.0;   // noise std dev, meters
    int k = 10;            // samples per link
    double b = 100.0;      // deployment side, meters
    int q = 2;
    int n_deployments = 100;  // N_D (desk scale; the full protocol uses more)
    int n_choices = 5;        // N_C attacker re-selections per deployment
    std::uint64_t seed = 0;
    std::vector<EstimatorKind> estimators = {EstimatorKind::sdp, EstimatorKind::grid_oracle,
                                             EstimatorKind::ls_baseline};
    int grid_resolution = 401;
    int threads = 1;
    CcpSettings ccp;

    void validate() const {
        if (sweep_values.empty()) throw std::invalid_argument("bench: sweep_values empty");
        if (n_deployments < 1 || n_choices < 1)
            throw std::invalid_argument("bench: counts must be >= 1");
        if (estimators.empty()) throw std::invalid_argument("bench: no estimators enabled");
        for (std::size_t i = 0; i < estimators.size(); ++i)
            for (std::size_t j = i + 1; j < estimators.size(); ++j)
                if (estimators[i] == estimators[j])
                    throw std::invalid_argument("bench: duplicate estimator");
        if (threads < 1) throw std::invalid_argument("bench: threads must be >= 1");
        if (grid_resolution < 2) throw std::invalid_argument("bench: grid resolution too small");
        if (!(sigma > 0.0) || !(b > 0.0) || k < 1 || n < q + 1 || delta < 0.0)
            throw std::invalid_argument("bench: bad fixed parameters");
        for (double v : sweep_values) {
            switch (sweep_variable) {
                case SweepVariable::n:
                    if (v < q + 1 || v != std::floor(v))
                        throw std::invalid_argument("bench: N sweep values must be integers > q");
                    break;
                case SweepVariable::delta:
                    if (v < 0.0) throw std::invalid_argument("bench: Delta must be >= 0");
                    break;
                case SweepVariable::sigma:
                    if (!(v > 0.0)) throw std::invalid_argument("bench: sigma must be > 0");
                    break;
            }
        }
        ccp.validate();
    }
};

/// One estimator's outcome on one trial. Truth fields are repeated across the
/// estimators of a trial so each record is self-contained, and
/// realization_hash fingerprints the exact scenario + observations the
/// estimator consumed (equal across a trial's estimators by construction).
struct TrialRecord {
    int sweep_index = 0;
    int deployment = 0;
    int choice = 0;
    EstimatorKind estimator = EstimatorKind::sdp;
    bool failed = false;
    double sq_error = 0.0;      // squared position error, m^2
    std::vector<int> detected;  // empty for estimators without a detector
    std::vector<int> truth_attackers;
    int n_anchors = 0;
    double crlb = 0.0;  // attack-model bound with the true attacker set, m^2
    std::uint64_t realization_hash = 0;
};

struct SweepEstimatorSummary {
    std::string sweep_var;
    double value = 0.0;
    std::string estimator;
    double rmse = 0.0;
    double p_cd = 0.0;
    double fa_rate = 0.0;
    double crlb = 0.0;
    int n_trials = 0;
    int n_failures = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialRecord> records;  // trial-major, estimator-minor
    std::vector<SweepEstimatorSummary> summaries;
};

struct DetectionStats {
    double p_cd = std::numeric_limits<double>::quiet_NaN();
    double fa_rate = std::numeric_limits<double>::quiet_NaN();
};

/// Anchor-level rates pooled over trials: hits over all true attackers, and
/// false flags over all genuine anchors. Either rate is NaN when its
/// denominator is empty across every trial.
inline DetectionStats compute_detection_stats(const std::vector<std::vector<int>>& detected,
                                              const std::vector<std::vector<int>>& truth,
                                              const std::vector<int>& n_anchors) {
    if (detected.size() != truth.size() || truth.size() != n_anchors.size())
        throw std::invalid_argument("compute_detection_stats: size mismatch");
    long hits = 0, truth_total = 0, false_flags = 0, genuine_total = 0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        truth_total += static_cast<long>(truth[t].size());
        genuine_total += n_anchors[t] - static_cast<long>(truth[t].size());
        for (int i : detected[t]) {
            bool in_truth = false;
            for (int j : truth[t]) in_truth = in_truth || i == j;
            if (in_truth)
                ++hits;
            else
                ++false_flags;
        }
    }
    DetectionStats out;
    if (truth_total > 0) out.p_cd = static_cast<double>(hits) / static_cast<double>(truth_total);
    if (genuine_total > 0)
        out.fa_rate = static_cast<double>(false_flags) / static_cast<double>(genuine_total);
    return out;
}

namespace detail {

/// Stream ids: one value per (sweep, deployment, choice, purpose) with the
/// deployment stream shared by all choices (purpose 0 is drawn at choice 0).
inline std::uint64_t trial_stream(int sweep, int deployment, int choice, int purpose) {
    const std::uint64_t key =
        ((static_cast<std::uint64_t>(sweep) * 0x10000ULL + static_cast<std::uint64_t>(deployment)) *
             0x100ULL +
         static_cast<std::uint64_t>(choice)) *
            4ULL +
        static_cast<std::uint64_t>(purpose);
    return key;
}

struct EffectiveParams {
    int n;
    double delta;
    double sigma;
};

inline EffectiveParams effective_params(const ExperimentConfig& cfg, double sweep_value) {
    EffectiveParams p{cfg.n, cfg.delta, cfg.sigma};
    switch (cfg.sweep_variable) {
        case SweepVariable::n: p.n = static_cast<int>(sweep_value); break;
        case SweepVariable::delta: p.delta = sweep_value; break;
        case SweepVariable::sigma: p.sigma = sweep_value; break;
    }
    return p;
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline void fnv1a_mix(std::uint64_t& h, const double* data, std::size_t count) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < count * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
}

}  // namespace detail

/// FNV-1a over the bytes of the geometry, attack vector, and range medians:
/// the full input a trial hands to each estimator.
inline std::uint64_t realization_fingerprint(const Scenario& s, const RangeObservations& obs) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Vec& a : s.anchors) detail::fnv1a_mix(h, a.data(), static_cast<std::size_t>(a.size()));
    detail::fnv1a_mix(h, s.target.data(), static_cast<std::size_t>(s.target.size()));
    detail::fnv1a_mix(h, s.attack_magnitudes.data(),
                      static_cast<std::size_t>(s.attack_magnitudes.size()));
    detail::fnv1a_mix(h, obs.medians.data(), static_cast<std::size_t>(obs.medians.size()));
    return h;
}

/// Sequential reduction of trial records into per-(sweep value, estimator)
/// rows, sweep-major then estimator in config order. Failed trials are
/// excluded from RMSE and counted; detection stats are pooled; CRLB is the
/// mean over trials with finite bounds.
inline std::vector<SweepEstimatorSummary> aggregate_summaries(
    const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
    const int n_sweep = static_cast<int>(cfg.sweep_values.size());
    const int n_est = static_cast<int>(cfg.estimators.size());
    const int trials_per_value = cfg.n_deployments * cfg.n_choices;
    if (records.size() !=
        static_cast<std::size_t>(n_sweep) * trials_per_value * static_cast<std::size_t>(n_est))
        throw std::invalid_argument("aggregate_summaries: record count mismatch");

    std::vector<SweepEstimatorSummary> summaries;
    for (int sweep = 0; sweep < n_sweep; ++sweep) {
        for (int e = 0; e < n_est; ++e) {
            SweepEstimatorSummary sum;
            sum.sweep_var = to_string(cfg.sweep_variable);
            sum.value = cfg.sweep_values[static_cast<std::size_t>(sweep)];
            sum.estimator = to_string(cfg.estimators[static_cast<std::size_t>(e)]);
            sum.n_trials = trials_per_value;

            double sq_sum = 0.0, crlb_sum = 0.0;
            int included = 0, crlb_count = 0;
            std::vector<std::vector<int>> det, truth;
            std::vector<int> n_anchors;
            const bool detects = cfg.estimators[static_cast<std::size_t>(e)] == EstimatorKind::sdp;
            for (int t = 0; t < trials_per_value; ++t) {
                const TrialRecord& rec =
                    records[(static_cast<std::size_t>(sweep) * trials_per_value + t) * n_est + e];
                if (rec.failed) {
                    ++sum.n_failures;
                } else {
                    sq_sum += rec.sq_error;
                    ++included;
                }
                if (std::isfinite(rec.crlb)) {
                    crlb_sum += rec.crlb;
                    ++crlb_count;
                }
                if (detects) {
                    det.push_back(rec.detected);
                    truth.push_back(rec.truth_attackers);
                    n_anchors.push_back(rec.n_anchors);
                }
            }
            sum.rmse = included > 0 ? std::sqrt(sq_sum / included)
                                    : std::numeric_limits<double>::quiet_NaN();
            sum.crlb = crlb_count > 0 ? crlb_sum / crlb_count
                                      : std::numeric_limits<double>::quiet_NaN();
            if (detects) {
                const DetectionStats ds = compute_detection_stats(det, truth, n_anchors);
                sum.p_cd = ds.p_cd;
                sum.fa_rate = ds.fa_rate;
            } else {
                sum.p_cd = std::numeric_limits<double>::quiet_NaN();
                sum.fa_rate = std::numeric_limits<double>::quiet_NaN();
            }
            summaries.push_back(std::move(sum));
        }
    }
    return summaries;
}

/// Runs the full sweep. Trials execute in parallel when cfg.threads > 1; the
/// result is identical regardless.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult out;
    out.config = cfg;

    const int n_sweep = static_cast<int>(cfg.sweep_values.size());
    const int n_est = static_cast<int>(cfg.estimators.size());
    const int trials_per_value = cfg.n_deployments * cfg.n_choices;
    const int n_trials = n_sweep * trials_per_value;
    out.records.resize(static_cast<std::size_t>(n_trials) * n_est);

    auto run_trial = [&](int trial_idx) {
        const int sweep = trial_idx / trials_per_value;
        const int within = trial_idx % trials_per_value;
        const int deployment = within / cfg.n_choices;
        const int choice = within % cfg.n_choices;
        const detail::EffectiveParams eff =
            detail::effective_params(cfg, cfg.sweep_values[static_cast<std::size_t>(sweep)]);

        ScenarioConfig sc;
        sc.n = eff.n;
        sc.q = cfg.q;
        sc.b = cfg.b;
        sc.delta_cap = eff.delta;
        sc.seed = cfg.seed;
        Rng dep_rng = Rng::stream(cfg.seed, detail::trial_stream(sweep, deployment, 0, 0));
        Scenario scenario = generate_deployment(sc, dep_rng);
        if (eff.delta > 0.0) {
            Rng att_rng = Rng::stream(cfg.seed, detail::trial_stream(sweep, deployment, choice, 1));
            scenario = assign_attackers(std::move(scenario), eff.delta, att_rng);
        }
        Rng noise_rng = Rng::stream(cfg.seed, detail::trial_stream(sweep, deployment, choice, 2));
        const RangeObservations obs = sample_ranges(scenario, eff.sigma, cfg.k, noise_rng);

        double trial_crlb = std::numeric_limits<double>::quiet_NaN();
        try {
            trial_crlb = crlb_position(
                fim_attack_model(scenario.target, scenario.anchors, eff.sigma, scenario.attacker_set));
        } catch (const std::exception&) {
            // degenerate geometry; leave NaN
        }
        const std::uint64_t fingerprint = realization_fingerprint(scenario, obs);

        for (int e = 0; e < n_est; ++e) {
            TrialRecord rec;
            rec.sweep_index = sweep;
            rec.deployment = deployment;
            rec.choice = choice;
            rec.estimator = cfg.estimators[static_cast<std::size_t>(e)];
            rec.truth_attackers = scenario.attacker_set;
            rec.n_anchors = scenario.n();
            rec.crlb = trial_crlb;
            rec.realization_hash = fingerprint;

            Vec x_hat;
            switch (rec.estimator) {
                case EstimatorKind::sdp: {
                    EstimateReport rep = run_ccp(scenario.anchors, obs.medians, eff.sigma, cfg.ccp);
                    if (rep.has_estimate()) {
                        x_hat = rep.x_hat;
                        rec.detected = rep.detected;
                    }
                    break;
                }
                case EstimatorKind::grid_oracle: {
                    NormalizedInstance ni =
                        normalize_instance(scenario.anchors, obs.medians, eff.sigma);
                    GridSpec gs;
                    gs.b = cfg.b / eff.sigma;
                    gs.resolution = cfg.grid_resolution;
                    x_hat = grid_search(ni.anchors, ni.d, gs).x * eff.sigma;
                    break;
                }
                case EstimatorKind::ls_baseline: {
                    x_hat = gauss_newton_ls(scenario.anchors, obs.medians,
                                            anchor_centroid(scenario.anchors))
                                .x;
                    break;
                }
            }
            if (x_hat.size() == 0) {
                rec.failed = true;
            } else {
                rec.sq_error = (x_hat - scenario.target).squaredNorm();
            }
            out.records[static_cast<std::size_t>(trial_idx) * n_est + e] = std::move(rec);
        }
    };

    if (cfg.threads == 1) {
        for (int i = 0; i < n_trials; ++i) run_trial(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min(cfg.threads, n_trials);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= n_trials) return;
                    run_trial(i);
                }
            });
        for (std::thread& th : pool) th.join();
    }

    out.summaries = aggregate_summaries(cfg, out.records);
    return out;
}

inline constexpr const char* kCsvHeader =
    "sweep_var,value,estimator,rmse_m,p_cd,fa_rate,crlb_m2,n_trials,n_failures";

inline std::string to_csv(const ExperimentResult& res) {
    std::string s = kCsvHeader;
    s += '\n';
    for (const SweepEstimatorSummary& r : res.summaries) {
        s += r.sweep_var;
        s += ',';
        s += detail::format_double(r.value);
        s += ',';
        s += r.estimator;
        s += ',';
        s += detail::format_double(r.rmse);
        s += ',';
        s += detail::format_double(r.p_cd);
        s += ',';
        s += detail::format_double(r.fa_rate);
        s += ',';
        s += detail::format_double(r.crlb);
        s += ',';
        s += std::to_string(r.n_trials);
        s += ',';
        s += std::to_string(r.n_failures);
        s += '\n';
    }
    return s;
}

inline void emit_csv(const ExperimentResult& res, const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // binary: LF endings everywhere
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    f << to_csv(res);
    if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

namespace detail {

inline double parse_double_field(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad numeric CSV field: " + s);
    return v;
}

}  // namespace detail

/// Parses a CSV produced by emit_csv back into summary rows (exact values:
/// emission uses shortest round-trip formatting).
inline std::vector<SweepEstimatorSummary> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::invalid_argument("parse_csv: bad header");
    std::vector<SweepEstimatorSummary> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                f.push_back(line.substr(start));
                break;
            }
            f.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (f.size() != 9) throw std::invalid_argument("parse_csv: bad column count");
        SweepEstimatorSummary r;
        r.sweep_var = f[0];
        r.value = detail::parse_double_field(f[1]);
        r.estimator = f[2];
        r.rmse = detail::parse_double_field(f[3]);
        r.p_cd = detail::parse_double_field(f[4]);
        r.fa_rate = detail::parse_double_field(f[5]);
        r.crlb = detail::parse_double_field(f[6]);
        r.n_trials = static_cast<int>(detail::parse_double_field(f[7]));
        r.n_failures = static_cast<int>(detail::parse_double_field(f[8]));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace seculoc
