#pragma once
// Independent reference solvers used to audit the conic estimator:
//  - profile_objective / grid_search brute-force the relaxed robust MLE by
//    profiling the dilation variable out analytically and scanning x,
//  - gauss_newton_ls is the plain range least-squares baseline that knows
//    nothing about attacks.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/scenario.hpp"

namespace seculoc {

struct GridSpec {
    double b = 100.0;     // search box [0, b]^q, same units as the instance
    int resolution = 401; // points per axis

    void validate() const {
        if (resolution < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
        if (!(b > 0.0)) throw std::invalid_argument("GridSpec: box side must be positive");
    }
};

/// min over rho >= 1 of (y^2/rho + ln rho): rho* = max(y^2, 1), giving
/// y^2 below the clip and 1 + ln(y^2) above it.
inline double profile_term(double y) {
    const double y2 = y * y;
    return y2 <= 1.0 ? y2 : 1.0 + std::log(y2);
}

/// Robust data fit at position x for a sigma-normalized instance.
inline double profile_objective(const Vec& x, const std::vector<Vec>& anchors, const Vec& d) {
    double total = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i)
        total += profile_term(d[static_cast<int>(i)] - (x - anchors[i]).norm());
    return total;
}

struct GridResult {
    Vec x;
    double objective = std::numeric_limits<double>::infinity();
};

/// Exhaustive scan of profile_objective over the grid; ties keep the first
/// point in lexicographic index order.
inline GridResult grid_search(const std::vector<Vec>& anchors, const Vec& d, const GridSpec& spec) {
    spec.validate();
    if (anchors.empty()) throw std::invalid_argument("grid_search: no anchors");
    const int q = static_cast<int>(anchors[0].size());
    const double h = spec.b / (spec.resolution - 1);
    GridResult best;
    best.x = Vec::Zero(q);
    Vec x(q);
    std::vector<int> idx(static_cast<std::size_t>(q), 0);
    for (;;) {
        for (int c = 0; c < q; ++c) x[c] = idx[static_cast<std::size_t>(c)] * h;
        const double v = profile_objective(x, anchors, d);
        if (v < best.objective) {
            best.objective = v;
            best.x = x;
        }
        int c = q - 1;
        while (c >= 0 && ++idx[static_cast<std::size_t>(c)] == spec.resolution) {
            idx[static_cast<std::size_t>(c)] = 0;
            --c;
        }
        if (c < 0) break;
    }
    return best;
}

struct GaussNewtonResult {
    Vec x;
    int iterations = 0;
    bool perturbed_normals = false;  // singular normal equations were regularized
};

/// Damped Gauss-Newton on sum_i (d_i - |x - a_i|)^2 from x0 (pass the anchor
/// centroid for the standard baseline).
inline GaussNewtonResult gauss_newton_ls(const std::vector<Vec>& anchors, const Vec& d, Vec x0,
                                         int max_iter = 100, double tol = 1e-10) {
    const int n = static_cast<int>(anchors.size());
    if (n == 0) throw std::invalid_argument("gauss_newton_ls: no anchors");
    const int q = static_cast<int>(anchors[0].size());
    if (n < q + 1) throw std::invalid_argument("gauss_newton_ls: need at least q+1 anchors");

    auto sse = [&](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = d[i] - (x - anchors[i]).norm();
            s += r * r;
        }
        return s;
    };

    GaussNewtonResult out;
    out.x = std::move(x0);
    double f = sse(out.x);
    for (int it = 0; it < max_iter; ++it) {
        Mat jtj = Mat::Zero(q, q);
        Vec jtr = Vec::Zero(q);
        for (int i = 0; i < n; ++i) {
            Vec diff = out.x - anchors[i];
            const double dist = diff.norm();
            if (dist < 1e-12) continue;  // gradient of |x-a| undefined at a
            const Vec u = diff / dist;
            const double r = d[i] - dist;
            jtj += u * u.transpose();
            jtr += u * r;
        }
        Eigen::LDLT<Mat> ldlt(jtj);
        Vec step = ldlt.solve(jtr);
        if (ldlt.info() != Eigen::Success || !step.allFinite() ||
            (jtj * step - jtr).norm() > 1e-8 * (1.0 + jtr.norm())) {
            out.perturbed_normals = true;
            Mat reg = jtj;
            reg.diagonal().array() += 1e-8;
            step = reg.ldlt().solve(jtr);
            if (!step.allFinite()) break;
        }
        double alpha = 1.0;
        Vec xn = out.x + step;
        double fn = sse(xn);
        int halvings = 0;
        while (fn > f && halvings < 60) {
            alpha *= 0.5;
            xn = out.x + alpha * step;
            fn = sse(xn);
            ++halvings;
        }
        if (fn > f) break;  // no decrease found along the step
        out.x = xn;
        f = fn;
        out.iterations = it + 1;
        if (alpha * step.norm() < tol) break;
    }
    return out;
}

inline Vec anchor_centroid(const std::vector<Vec>& anchors) {
    Vec c = Vec::Zero(anchors[0].size());
    for (const Vec& a : anchors) c += a;
    return c / static_cast<double>(anchors.size());
}

}  // namespace seculoc
