#pragma once
// Random node deployments and spoofing-attack assignment.
//
// Draw order (all from the caller-supplied Rng):
//   generate_deployment: anchor 0 coords, anchor 1 coords, ..., target coords;
//     if the deployment is rejected (target closer than 1e-3*B to an anchor,
//     which would make the unit vectors in the CRLB ill-conditioned) the whole
//     deployment is redrawn.
//   assign_attackers: attacker count, attacked subset (partial Fisher-Yates),
//     then per attacked anchor in ascending index order: sign, scale, magnitude.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/rng.hpp"

namespace seculoc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// How the number of corrupted anchors is chosen. Only one policy is
/// supported: uniform on {1, .., floor(N/2)}, so every draw has at least one
/// attacker and never a corrupted majority.
enum class AttackerCountRule { uniform_one_to_half };

struct ScenarioConfig {
    int n = 10;            // number of anchors
    int q = 2;             // dimension, 2 or 3
    double b = 100.0;      // deployment area side length, meters
    double delta_cap = 0.0;        // attack magnitude cap (scale upper bound), meters
    AttackerCountRule attacker_count_rule = AttackerCountRule::uniform_one_to_half;
    std::uint64_t seed = 0;

    void validate() const {
        if (q != 2 && q != 3) throw std::invalid_argument("ScenarioConfig: q must be 2 or 3");
        if (n < q + 1) throw std::invalid_argument("ScenarioConfig: need at least q+1 anchors");
        if (b <= 0.0) throw std::invalid_argument("ScenarioConfig: area side must be positive");
        if (delta_cap < 0.0) throw std::invalid_argument("ScenarioConfig: delta cap must be >= 0");
    }
};

struct Scenario {
    std::vector<Vec> anchors;        // N known positions
    Vec target;                      // true position to estimate
    std::vector<int> attacker_set;   // ascending 0-based anchor indices
    Vec attack_magnitudes;           // per-anchor delta, zero outside attacker_set
    double area_side = 0.0;
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(anchors.size()); }
    int q() const { return static_cast<int>(target.size()); }

    bool is_attacker(int i) const {
        for (int a : attacker_set)
            if (a == i) return true;
        return false;
    }

    std::vector<int> genuine_set() const {
        std::vector<int> g;
        for (int i = 0; i < n(); ++i)
            if (!is_attacker(i)) g.push_back(i);
        return g;
    }
};

/// Anchors and target i.i.d. uniform on [0, B]^q; no attackers assigned yet.
/// Deployments with min_i ||x - a_i|| < 1e-3 * B are redrawn.
inline Scenario generate_deployment(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    Scenario s;
    s.area_side = config.b;
    s.seed = config.seed;
    s.attack_magnitudes = Vec::Zero(config.n);
    const double min_separation = 1e-3 * config.b;
    for (;;) {
        s.anchors.assign(config.n, Vec(config.q));
        for (int i = 0; i < config.n; ++i)
            for (int c = 0; c < config.q; ++c) s.anchors[i][c] = rng.uniform(0.0, config.b);
        s.target = Vec(config.q);
        for (int c = 0; c < config.q; ++c) s.target[c] = rng.uniform(0.0, config.b);

        double min_dist = std::numeric_limits<double>::infinity();
        for (const Vec& a : s.anchors) min_dist = std::min(min_dist, (s.target - a).norm());
        if (min_dist >= min_separation) return s;
    }
}

/// Marks a uniformly drawn number (1 .. floor(N/2)) of anchors as corrupted
/// and gives each one delta_i = sign * Exponential(scale), with the sign
/// uniform on {-1, +1} and the scale itself uniform on [0, delta_cap] meters.
inline Scenario assign_attackers(Scenario s, double delta_cap, Rng& rng) {
    if (delta_cap < 0.0) throw std::invalid_argument("assign_attackers: delta cap must be >= 0");
    const int n = s.n();
    const int max_attackers = n / 2;
    const int count = static_cast<int>(rng.uniform_int(1, max_attackers));
    s.attacker_set = rng.sample_without_replacement(n, count);
    s.attack_magnitudes = Vec::Zero(n);
    for (int i : s.attacker_set) {
        const double sign = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
        const double scale = rng.uniform(0.0, delta_cap);
        s.attack_magnitudes[i] = sign * rng.exponential(scale);
    }
    return s;
}

}  // namespace seculoc
