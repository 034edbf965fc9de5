#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "seculoc/crlb.hpp"
#include "seculoc/rng.hpp"
#include "seculoc/scenario.hpp"

using namespace seculoc;

namespace {

std::vector<Vec> cross_anchors(const Vec& x) {
    std::vector<Vec> anchors;
    for (int c = 0; c < 2; ++c)
        for (double s : {1.0, -1.0}) {
            Vec a = x;
            a[c] += s;
            anchors.push_back(a);
        }
    return anchors;
}

Scenario make_scenario(int n, std::uint64_t seed) {
    ScenarioConfig c;
    c.n = n;
    c.seed = seed;
    Rng rng(seed);
    return generate_deployment(c, rng);
}

// negative log-likelihood of the genuine single-sample model, up to constants
double nll(const Vec& x, const std::vector<Vec>& anchors, const Vec& d, double sigma) {
    double v = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const double r = d[static_cast<int>(i)] - (x - anchors[i]).norm();
        v += r * r / (2.0 * sigma * sigma);
    }
    return v;
}

}  // namespace

TEST_CASE("symmetric cross gives A = 2I and a 1 m^2 bound") {
    Vec x(2);
    x << 40.0, 60.0;
    FisherPartition f = fim_attack_model(x, cross_anchors(x), 1.0);
    REQUIRE((f.a - 2.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(f.b.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((f.c - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THAT(crlb_position(f), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("bound scales with the noise variance") {
    Vec x(2);
    x << 40.0, 60.0;
    const auto anchors = cross_anchors(x);
    const double base = crlb_position(fim_attack_model(x, anchors, 1.0));
    REQUIRE_THAT(crlb_position(fim_attack_model(x, anchors, 2.0)),
                 Catch::Matchers::WithinRel(4.0 * base, 1e-12));
    REQUIRE_THAT(crlb_position(fim_attack_model(x, anchors, 15.0)),
                 Catch::Matchers::WithinAbs(225.0, 1e-9));
}

TEST_CASE("position block matches a finite-difference hessian") {
    Scenario s = make_scenario(7, 201);
    const double sigma = 3.0;
    FisherPartition f = fim_attack_model(s.target, s.anchors, sigma);

    // E[nll hessian] at the truth: the curvature of the squared-residual term,
    // probed by central differences of the noiseless objective
    Vec d(7);
    for (int i = 0; i < 7; ++i) d[i] = (s.target - s.anchors[i]).norm();
    const double h = 1e-5;
    Mat fd = Mat::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Vec xpp = s.target, xpm = s.target, xmp = s.target, xmm = s.target;
            xpp[i] += h;
            xpp[j] += h;
            xpm[i] += h;
            xpm[j] -= h;
            xmp[i] -= h;
            xmp[j] += h;
            xmm[i] -= h;
            xmm[j] -= h;
            fd(i, j) = (nll(xpp, s.anchors, d, sigma) - nll(xpm, s.anchors, d, sigma) -
                        nll(xmp, s.anchors, d, sigma) + nll(xmm, s.anchors, d, sigma)) /
                       (4.0 * h * h);
        }
    // at zero residual the Gauss-Newton curvature equals the full hessian
    REQUIRE((f.a - fd).cwiseAbs().maxCoeff() / f.a.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("attack-model cross terms remove the corrupted links") {
    Scenario s = make_scenario(8, 202);
    const double sigma = 2.0;
    const std::vector<int> attackers = {1, 4, 6};
    FisherPartition full = fim_attack_model(s.target, s.anchors, sigma, attackers);
    REQUIRE(full.b.rows() == 2);
    REQUIRE(full.b.cols() == 8);
    for (int i = 0; i < 8; ++i) {
        const bool is_attacker = std::find(attackers.begin(), attackers.end(), i) != attackers.end();
        REQUIRE((full.b.col(i).cwiseAbs().maxCoeff() > 0.0) == is_attacker);
    }

    std::vector<Vec> genuine;
    for (int i = 0; i < 8; ++i)
        if (std::find(attackers.begin(), attackers.end(), i) == attackers.end())
            genuine.push_back(s.anchors[i]);
    FisherPartition gen = fim_attack_model(s.target, genuine, sigma);
    REQUIRE_THAT(crlb_position(full), Catch::Matchers::WithinRel(crlb_position(gen), 1e-10));
}

TEST_CASE("dilation model with unit rho matches the clean attack model") {
    Scenario s = make_scenario(6, 203);
    FisherPartition at = fim_attack_model(s.target, s.anchors, 4.0);
    FisherPartition di = fim_dilation_model(s.target, s.anchors, 4.0, Vec::Ones(6));
    REQUIRE((at.a - di.a).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(di.b.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE_THAT(crlb_position(di), Catch::Matchers::WithinRel(crlb_position(at), 1e-12));
}

TEST_CASE("dilated links lose information") {
    Scenario s = make_scenario(8, 204);
    const double sigma = 1.5;
    Vec rho = Vec::Ones(8);
    rho[3] = 9.0;
    rho[5] = 25.0;
    const double clean = crlb_position(fim_attack_model(s.target, s.anchors, sigma));
    const double dilated = crlb_position(fim_dilation_model(s.target, s.anchors, sigma, rho));
    REQUIRE(dilated > clean);

    // a huge dilation is as good as deleting the link
    Vec rho_inf = Vec::Ones(8);
    rho_inf[3] = 1e12;
    std::vector<Vec> dropped;
    for (int i = 0; i < 8; ++i)
        if (i != 3) dropped.push_back(s.anchors[i]);
    const double with_inf = crlb_position(fim_dilation_model(s.target, s.anchors, sigma, rho_inf));
    const double without = crlb_position(fim_attack_model(s.target, dropped, sigma));
    REQUIRE_THAT(with_inf, Catch::Matchers::WithinRel(without, 1e-9));
}

TEST_CASE("rho curvature matches a monte carlo expectation") {
    // C entry for the dilation model: E[-d^2/drho^2 log p(r)] = 1/(2 rho^2)
    // with r ~ N(0, rho sigma^2); estimate the expectation by simulation
    const double sigma = 2.0, rho = 3.0;
    Rng rng(205);
    double acc = 0.0;
    const int m = 1000000;
    for (int t = 0; t < m; ++t) {
        const double r = rng.normal(0.0, sigma * std::sqrt(rho));
        // -d^2/drho^2 [ -r^2/(2 rho sigma^2) - (1/2) ln rho ]
        acc += r * r / (sigma * sigma * rho * rho * rho) - 0.5 / (rho * rho);
    }
    acc /= m;
    const double analytic = 0.5 / (rho * rho);
    REQUIRE(std::abs(acc - analytic) / analytic < 0.02);

    Vec x(2);
    x << 40.0, 60.0;
    FisherPartition f = fim_dilation_model(x, cross_anchors(x), sigma, Vec::Constant(4, rho));
    REQUIRE_THAT(f.c(0, 0), Catch::Matchers::WithinRel(analytic, 1e-12));
}

TEST_CASE("an extra anchor never hurts") {
    for (std::uint64_t seed : {206ull, 207ull, 208ull}) {
        Scenario s = make_scenario(9, seed);
        std::vector<Vec> subset(s.anchors.begin(), s.anchors.end() - 1);
        const double fewer = crlb_position(fim_attack_model(s.target, subset, 2.0));
        const double more = crlb_position(fim_attack_model(s.target, s.anchors, 2.0));
        REQUIRE(more <= fewer + 1e-12);
    }
}

TEST_CASE("dilation bound dominates the all-genuine bound") {
    Scenario s = make_scenario(8, 209);
    Vec rho = Vec::Ones(8);
    rho[0] = 4.0;
    rho[2] = 2.5;
    const double genuine = crlb_position(fim_attack_model(s.target, s.anchors, 2.0));
    const double dilated = crlb_position(fim_dilation_model(s.target, s.anchors, 2.0, rho));
    REQUIRE(dilated >= genuine);
}

TEST_CASE("input validation") {
    Vec x(2);
    x << 1.0, 1.0;
    std::vector<Vec> anchors = {x};  // coincides with the target
    REQUIRE_THROWS_AS(fim_attack_model(x, anchors, 1.0), std::domain_error);

    Vec x2(2);
    x2 << 3.0, 4.0;
    std::vector<Vec> ok = {Vec::Zero(2)};
    REQUIRE_THROWS_AS(fim_attack_model(x2, ok, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(fim_dilation_model(x2, ok, 1.0, Vec::Constant(1, 0.5)),
                      std::invalid_argument);

    // singular geometry: collinear anchors with the target on the line
    std::vector<Vec> line;
    for (double t : {1.0, 2.0, 5.0}) {
        Vec a(2);
        a << t, 0.0;
        line.push_back(a);
    }
    Vec on_line(2);
    on_line << -1.0, 0.0;
    const double b = crlb_position(fim_attack_model(on_line, line, 1.0));
    REQUIRE(std::isinf(b));
}
