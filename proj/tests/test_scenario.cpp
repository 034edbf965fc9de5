#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "seculoc/scenario.hpp"

using namespace seculoc;

TEST_CASE("scenario config validation") {
    ScenarioConfig c;
    c.q = 4;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.n = 2;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.b = 0.0;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
    c = ScenarioConfig{};
    c.delta_cap = -1.0;
    REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
    REQUIRE_NOTHROW(ScenarioConfig{}.validate());
}

TEST_CASE("deployments stay inside the area and clear of the target") {
    ScenarioConfig c;
    c.n = 10;
    c.b = 100.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        Scenario s = generate_deployment(c, rng);
        REQUIRE(s.n() == 10);
        REQUIRE(s.q() == 2);
        for (const Vec& a : s.anchors)
            for (int d = 0; d < 2; ++d) {
                REQUIRE(a[d] >= 0.0);
                REQUIRE(a[d] < 100.0);
            }
        for (const Vec& a : s.anchors) REQUIRE((s.target - a).norm() >= 0.1);
    }
}

TEST_CASE("deployment generation is deterministic in the seed") {
    ScenarioConfig c;
    Rng r1(99), r2(99);
    Scenario a = generate_deployment(c, r1);
    Scenario b = generate_deployment(c, r2);
    REQUIRE((a.target - b.target).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < a.n(); ++i)
        REQUIRE((a.anchors[i] - b.anchors[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attacker assignment marks between 1 and N/2 anchors") {
    ScenarioConfig c;
    c.n = 10;
    Rng rng(5);
    Scenario base = generate_deployment(c, rng);
    std::vector<int> count_hits(6, 0);
    for (int t = 0; t < 6000; ++t) {
        Scenario s = assign_attackers(base, 20.0, rng);
        const int k = static_cast<int>(s.attacker_set.size());
        REQUIRE(k >= 1);
        REQUIRE(k <= 5);
        ++count_hits[k];
        for (std::size_t i = 1; i < s.attacker_set.size(); ++i)
            REQUIRE(s.attacker_set[i] > s.attacker_set[i - 1]);
        for (int i = 0; i < s.n(); ++i) {
            if (s.is_attacker(i))
                REQUIRE(s.attack_magnitudes[i] != 0.0);
            else
                REQUIRE(s.attack_magnitudes[i] == 0.0);
        }
        REQUIRE(static_cast<int>(s.genuine_set().size()) == s.n() - k);
    }
    // counts uniform on {1..5}
    double chi2 = 0.0;
    for (int k = 1; k <= 5; ++k) chi2 += (count_hits[k] - 1200.0) * (count_hits[k] - 1200.0) / 1200.0;
    REQUIRE(chi2 < 18.47);  // 99.9th percentile, 4 dof
}

TEST_CASE("attack magnitudes follow the two-sided exponential with uniform scale") {
    ScenarioConfig c;
    c.n = 10;
    Rng rng(8);
    Scenario base = generate_deployment(c, rng);
    const double delta_cap = 30.0;
    double sum_abs = 0.0, sum_sign = 0.0;
    int n_mag = 0;
    for (int t = 0; t < 20000; ++t) {
        Scenario s = assign_attackers(base, delta_cap, rng);
        for (int i : s.attacker_set) {
            sum_abs += std::abs(s.attack_magnitudes[i]);
            sum_sign += s.attack_magnitudes[i] > 0 ? 1.0 : -1.0;
            ++n_mag;
        }
    }
    // |delta| ~ Exp(scale), scale ~ U[0, cap] -> E|delta| = cap/2
    REQUIRE(std::abs(sum_abs / n_mag - delta_cap / 2.0) < 0.6);
    REQUIRE(std::abs(sum_sign / n_mag) < 0.03);
}
