#pragma once
// Noisy (possibly spoofed) range sampling and median aggregation.
//
// Model per epoch k: d_{i,k} = ||x - a_i|| + delta_i + n_{i,k} with
// n_{i,k} ~ N(0, sigma_i^2) i.i.d. Negative samples are kept: the Gaussian
// model allows them and clamping would bias the downstream estimator.
//
// Draw order: anchor 0 epochs 0..K-1, anchor 1 epochs 0..K-1, ...

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/rng.hpp"
#include "seculoc/scenario.hpp"

namespace seculoc {

struct RangeObservations {
    Mat samples;   // N x K, meters
    Vec medians;   // per-anchor median over the K epochs, meters
    double sigma = 0.0;
    int k = 0;

    int n() const { return static_cast<int>(samples.rows()); }
};

/// Exact median of the entries; even lengths take the midpoint of the two
/// central order statistics.
inline double median_of(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median_of: empty range");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    if (values.size() % 2 == 1) return values[m];
    return 0.5 * (values[m - 1] + values[m]);
}

inline Vec aggregate_median(const Mat& samples) {
    Vec med(samples.rows());
    std::vector<double> row(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index k = 0; k < samples.cols(); ++k) row[static_cast<std::size_t>(k)] = samples(i, k);
        med[i] = median_of(row);
    }
    return med;
}

/// Per-link noise levels; sigma_i >= 0, K >= 1.
inline RangeObservations sample_ranges(const Scenario& s, const Vec& sigmas, int K, Rng& rng) {
    if (K < 1) throw std::invalid_argument("sample_ranges: K must be >= 1");
    if (sigmas.size() != s.n()) throw std::invalid_argument("sample_ranges: sigma count mismatch");
    if ((sigmas.array() < 0.0).any()) throw std::invalid_argument("sample_ranges: sigma must be >= 0");
    RangeObservations obs;
    obs.k = K;
    obs.sigma = sigmas.size() > 0 ? sigmas[0] : 0.0;
    obs.samples = Mat(s.n(), K);
    for (int i = 0; i < s.n(); ++i) {
        const double base = (s.target - s.anchors[i]).norm() + s.attack_magnitudes[i];
        for (int k = 0; k < K; ++k) obs.samples(i, k) = base + sigmas[i] * rng.normal();
    }
    obs.medians = aggregate_median(obs.samples);
    return obs;
}

/// Common scalar-sigma case (the estimator in this release assumes it).
inline RangeObservations sample_ranges(const Scenario& s, double sigma, int K, Rng& rng) {
    RangeObservations obs = sample_ranges(s, Vec::Constant(s.n(), sigma), K, rng);
    obs.sigma = sigma;
    return obs;
}

}  // namespace seculoc
