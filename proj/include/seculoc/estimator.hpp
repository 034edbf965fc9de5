#pragma once
// Joint localization and attacker detection via a convex-concave sequence of
// conic subproblems.
//
// The estimator models a corrupted link as a genuine one whose noise variance
// is dilated by rho_i >= 1. Profiling rho out of the (sigma-normalized)
// likelihood and lifting x -> (x, X), y -> (y, Y) gives a subproblem with
//   objective    sum_i e_i - sum_i ln e_i + sum_i Y_ii / Yhat_ii
//   constraints  e_i >= 0,  Y_ii >= e_i,
//                Y_ii = tr X - 2 a_i.x + |a_i|^2 + 2 d_i y_i - d_i^2,
//                Y_ij >= |tr X - a_i.x - a_j.x + a_i.a_j| + d_j y_i
//                        + d_i y_j - d_i d_j          (all pairs i <= j),
//                [Y y; y' 1] psd,  [X x; x' 1] psd,
// where the ln Y_ii concave term has been linearized around the previous
// iterate's diagonal Yhat. Each solve tightens Yhat; the loop stops when the
// position estimate moves less than tau meters or after T rounds. The ratio
// y_i^2 / e_i acts as the attack detector: genuine links concentrate near or
// below one, spoofed links grow with the injected bias.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/conic/program.hpp"
#include "seculoc/conic/solver.hpp"
#include "seculoc/scenario.hpp"

namespace seculoc {

struct CcpSettings {
    int T = 3;                         // max outer iterations
    double tau = 0.5;                  // stopping threshold, meters (B/200 at B=100)
    double y_init_diag = 0.1;          // Yhat(0) diagonal
    Vec x_prev_init;                   // sentinel xhat(0); empty means 1e6 * ones(q)
    double detection_threshold = 1.0;  // detect when y^2/e strictly exceeds
    bool sigma_normalize = true;       // solve in sigma-scaled coordinates
    double e_floor = 1e-12;            // guard for the detection ratio
    double y_diag_floor = 1e-8;        // guard for the linearization divide
    // Optional additional stop: end the loop once the per-round decrease of
    // the data objective falls to objective_tol * max(1, |objective|). Zero
    // disables it (production default). Near its limit the iteration can keep
    // descending while the position moves less than any tau per round, so
    // audits that compare objectives should stop on this rule instead.
    double objective_tol = 0.0;
    bool audit_feasibility = false;    // verify every solver primal post hoc
    conic::SolverSettings solver;      // feasibility/gap defaults 1e-8

    void validate() const {
        if (T < 1) throw std::invalid_argument("CcpSettings: T must be >= 1");
        if (!(tau > 0.0)) throw std::invalid_argument("CcpSettings: tau must be > 0");
        if (!(y_init_diag > 0.0)) throw std::invalid_argument("CcpSettings: y_init_diag must be > 0");
        if (!(detection_threshold > 0.0))
            throw std::invalid_argument("CcpSettings: detection_threshold must be > 0");
        if (objective_tol < 0.0)
            throw std::invalid_argument("CcpSettings: objective_tol must be >= 0");
    }
};

struct EstimateReport {
    Vec x_hat;                  // meters; empty if no solve succeeded
    Vec y_hat;                  // residuals in normalized units
    Vec e_hat;                  // epigraph values, normalized units
    Vec rho_hat;                // y_i^2 / e_i
    std::vector<int> detected;  // ascending 0-based anchor indices
    int iterations_used = 0;
    std::vector<Vec> iterate_trace;            // xhat(t) in meters
    std::vector<double> subproblem_objectives; // solver value of each round
    std::vector<double> data_objectives;       // sum e - sum ln e + sum ln Y_ii
    std::vector<conic::SolveStatus> solver_statuses;
    bool solver_failed = false;
    // Filled when CcpSettings::audit_feasibility is set: worst case over all
    // accepted solver primals of this run.
    double max_feasibility_violation = 0.0;
    double min_psd_eigenvalue = std::numeric_limits<double>::infinity();

    bool has_estimate() const { return x_hat.size() > 0; }
};

struct NormalizedInstance {
    std::vector<Vec> anchors;
    Vec d;
    double scale = 1.0;
};

/// Divides anchors and ranges by sigma so genuine residuals have unit
/// variance and the dilation objective is the literal negative log-likelihood.
inline NormalizedInstance normalize_instance(const std::vector<Vec>& anchors, const Vec& d,
                                             double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("normalize_instance: sigma must be > 0");
    NormalizedInstance out;
    out.scale = sigma;
    out.anchors.reserve(anchors.size());
    for (const Vec& a : anchors) out.anchors.push_back(a / sigma);
    out.d = d / sigma;
    return out;
}

/// Flat variable layout of one subproblem: x, y, vech(X), vech(Y), e, u.
struct SubproblemLayout {
    int q = 0, n = 0;
    int x0 = 0, y0 = 0, xx0 = 0, yy0 = 0, e0 = 0, u0 = 0, total = 0;

    SubproblemLayout(int q_, int n_) : q(q_), n(n_) {
        x0 = 0;
        y0 = q;
        xx0 = y0 + n;
        yy0 = xx0 + q * (q + 1) / 2;
        e0 = yy0 + n * (n + 1) / 2;
        u0 = e0 + n;
        total = u0 + n;
    }
    int x(int c) const { return x0 + c; }
    int y(int i) const { return y0 + i; }
    int xx(int i, int j) const { return xx0 + conic::PsdBlock::cell_index(q, i, j); }
    int yy(int i, int j) const { return yy0 + conic::PsdBlock::cell_index(n, i, j); }
    int e(int i) const { return e0 + i; }
    int u(int i) const { return u0 + i; }
};

namespace detail {

/// Row of the pairwise bound, "+" branch:
///   Y_ij - tr X + (a_i + a_j).x - d_j y_i - d_i y_j  >=  a_i.a_j - d_i d_j.
/// The i == j instance is bitwise identical to the corresponding equality, by
/// construction, so the solver presolve recognizes and drops it.
inline conic::LinConstraint pair_row_plus(const SubproblemLayout& lay, const std::vector<Vec>& a,
                                          const Vec& d, int i, int j) {
    conic::LinConstraint c;
    for (int k = 0; k < lay.q; ++k) c.row.push_back({lay.x(k), a[i][k] + a[j][k]});
    if (i == j) {
        c.row.push_back({lay.y(i), -d[i] - d[i]});
    } else {
        c.row.push_back({lay.y(i), -d[j]});
        c.row.push_back({lay.y(j), -d[i]});
    }
    for (int k = 0; k < lay.q; ++k) c.row.push_back({lay.xx(k, k), -1.0});
    c.row.push_back({lay.yy(i, j), 1.0});
    c.rhs = a[i].dot(a[j]) - d[i] * d[j];
    return c;
}

/// "-" branch of the same bound (absolute value split):
///   Y_ij + tr X - (a_i + a_j).x - d_j y_i - d_i y_j  >=  -a_i.a_j - d_i d_j.
inline conic::LinConstraint pair_row_minus(const SubproblemLayout& lay, const std::vector<Vec>& a,
                                           const Vec& d, int i, int j) {
    conic::LinConstraint c;
    for (int k = 0; k < lay.q; ++k) c.row.push_back({lay.x(k), -(a[i][k] + a[j][k])});
    if (i == j) {
        c.row.push_back({lay.y(i), -d[i] - d[i]});
    } else {
        c.row.push_back({lay.y(i), -d[j]});
        c.row.push_back({lay.y(j), -d[i]});
    }
    for (int k = 0; k < lay.q; ++k) c.row.push_back({lay.xx(k, k), 1.0});
    c.row.push_back({lay.yy(i, j), 1.0});
    c.rhs = -a[i].dot(a[j]) - d[i] * d[j];
    return c;
}

}  // namespace detail

/// Assembles one convex subproblem around the previous diagonal Yhat.
/// Inputs are expected in normalized units.
///
/// `geom_scale2` supports solving in rescaled geometry: when anchors and d
/// have been divided by a length s, pass s^2 here (with Yhat still in
/// variance units). The lifted Y variables then carry 1/s^2 of their variance
/// meaning, which this factor restores in the objective and the epigraph cap,
/// while the e/u variables and hence the likelihood stay in variance units.
/// Balancing s^2 against the anchor spread keeps both PSD blocks within a
/// modest dynamic range even when sigma is tiny relative to the deployment.
inline conic::ConicProgram build_ccp_subproblem(const std::vector<Vec>& anchors, const Vec& d,
                                                const Vec& y_diag_prev,
                                                double geom_scale2 = 1.0) {
    const int n = static_cast<int>(anchors.size());
    if (n == 0) throw std::invalid_argument("build_ccp_subproblem: no anchors");
    const int q = static_cast<int>(anchors[0].size());
    if (d.size() != n || y_diag_prev.size() != n)
        throw std::invalid_argument("build_ccp_subproblem: size mismatch");
    for (int i = 0; i < n; ++i)
        if (!(y_diag_prev[i] > 0.0))
            throw std::invalid_argument("build_ccp_subproblem: Yhat diagonal must be positive");
    if (!(geom_scale2 > 0.0))
        throw std::invalid_argument("build_ccp_subproblem: geometry scale must be positive");

    const SubproblemLayout lay(q, n);
    conic::ConicProgram p;
    p.num_vars = lay.total;

    for (int i = 0; i < n; ++i)
        p.objective.push_back({lay.yy(i, i), geom_scale2 / y_diag_prev[i]});
    for (int i = 0; i < n; ++i) p.objective.push_back({lay.e(i), 1.0});
    for (int i = 0; i < n; ++i) p.objective.push_back({lay.u(i), -1.0});

    // Y_ii = tr X - 2 a_i.x + |a_i|^2 + 2 d_i y_i - d_i^2, via the shared
    // pair-row builder so the duplicated inequality below matches bit for bit.
    for (int i = 0; i < n; ++i)
        p.equalities.push_back(detail::pair_row_plus(lay, anchors, d, i, i));

    for (int i = 0; i < n; ++i) p.nonneg_inequalities.push_back({{{lay.e(i), 1.0}}, 0.0});
    for (int i = 0; i < n; ++i)
        p.nonneg_inequalities.push_back({{{lay.yy(i, i), geom_scale2}, {lay.e(i), -1.0}}, 0.0});
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            p.nonneg_inequalities.push_back(detail::pair_row_plus(lay, anchors, d, i, j));
            p.nonneg_inequalities.push_back(detail::pair_row_minus(lay, anchors, d, i, j));
        }

    conic::PsdBlock yb;  // [Y y; y' 1]
    yb.order = n + 1;
    yb.cells.resize(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    for (int i = 0; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            conic::PsdCell cell;
            if (i < n && j < n)
                cell = {lay.yy(i, j), 0.0};
            else if (i < n)
                cell = {lay.y(i), 0.0};
            else
                cell = {-1, 1.0};
            yb.cells[static_cast<std::size_t>(conic::PsdBlock::cell_index(n + 1, i, j))] = cell;
        }
    p.psd_blocks.push_back(std::move(yb));

    conic::PsdBlock xb;  // [X x; x' 1]
    xb.order = q + 1;
    xb.cells.resize(static_cast<std::size_t>((q + 1) * (q + 2) / 2));
    for (int i = 0; i <= q; ++i)
        for (int j = i; j <= q; ++j) {
            conic::PsdCell cell;
            if (i < q && j < q)
                cell = {lay.xx(i, j), 0.0};
            else if (i < q)
                cell = {lay.x(i), 0.0};
            else
                cell = {-1, 1.0};
            xb.cells[static_cast<std::size_t>(conic::PsdBlock::cell_index(q + 1, i, j))] = cell;
        }
    p.psd_blocks.push_back(std::move(xb));

    for (int i = 0; i < n; ++i) p.exp_cones.push_back({{lay.u(i), -1, lay.e(i)}, {0.0, 1.0, 0.0}});
    return p;
}

/// Strictly feasible lifted point around a position guess: y matches the
/// ranges at x0 exactly, X and Y are the rank-one lifts plus a small multiple
/// of the identity chosen to clear every pairwise bound. `geom_scale2` must
/// match the value passed to build_ccp_subproblem.
inline Vec make_warm_start(const std::vector<Vec>& anchors, const Vec& d, Vec x0,
                           double geom_scale2 = 1.0) {
    const int n = static_cast<int>(anchors.size());
    const int q = static_cast<int>(anchors[0].size());
    const SubproblemLayout lay(q, n);

    double mean_r = 0.0;
    for (const Vec& a : anchors) mean_r += (x0 - a).norm();
    mean_r /= n;
    for (const Vec& a : anchors)
        if ((x0 - a).norm() < 1e-6 * (1.0 + mean_r)) {
            x0 = x0.array() + 1e-3 * (1.0 + mean_r);
            break;
        }

    Vec r(n), y(n);
    std::vector<Vec> u(static_cast<std::size_t>(n));
    double mean_r2 = 0.0;
    for (int i = 0; i < n; ++i) {
        u[i] = x0 - anchors[i];
        r[i] = u[i].norm();
        y[i] = d[i] - r[i];
        mean_r2 += r[i] * r[i];
    }
    mean_r2 /= n;

    // Cauchy-Schwarz slack of the "+" pairwise rows at the rank-one point.
    double slack_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            slack_min = std::min(slack_min, r[i] * r[j] - u[i].dot(u[j]));
    double eps = 1e-2 * (1.0 + mean_r2);
    if (slack_min > 0.0)
        eps = std::min(eps, 0.2 * slack_min / q);
    else
        eps = 1e-10 * (1.0 + mean_r2);  // degenerate geometry; solver falls back

    Vec z = Vec::Zero(lay.total);
    for (int c = 0; c < q; ++c) z[lay.x(c)] = x0[c];
    for (int i = 0; i < n; ++i) z[lay.y(i)] = y[i];
    for (int i = 0; i < q; ++i)
        for (int j = i; j < q; ++j) z[lay.xx(i, j)] = x0[i] * x0[j] + (i == j ? eps : 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) z[lay.yy(i, j)] = y[i] * y[j] + (i == j ? q * eps : 0.0);
    for (int i = 0; i < n; ++i) {
        z[lay.e(i)] = 0.5 * (y[i] * y[i] + q * eps) * geom_scale2;
        z[lay.u(i)] = std::log(z[lay.e(i)]) - 1.0;
    }
    return z;
}

/// Detector: flag anchors whose residual-to-epigraph ratio strictly exceeds
/// the threshold. Epigraph values are floored to keep zero residuals at zero;
/// the 1e-9 relative guard keeps a ratio of exactly one (up to round-off) on
/// the undetected side.
inline std::vector<int> detect(const Vec& y_hat, const Vec& e_hat, double threshold,
                               double e_floor = 1e-12) {
    std::vector<int> out;
    for (int i = 0; i < y_hat.size(); ++i) {
        const double ratio = y_hat[i] * y_hat[i] / std::max(e_hat[i], e_floor);
        if (ratio > threshold * (1.0 + 1e-9)) out.push_back(i);
    }
    return out;
}

/// Full estimation loop: normalize, iterate subproblem solves until the
/// position estimate settles, then apply the detector to the final residuals.
inline EstimateReport run_ccp(const std::vector<Vec>& anchors, const Vec& d, double sigma,
                              const CcpSettings& settings = {}) {
    settings.validate();
    const int n = static_cast<int>(anchors.size());
    if (n == 0) throw std::invalid_argument("run_ccp: no anchors");
    const int q = static_cast<int>(anchors[0].size());
    if (n < q + 1) throw std::invalid_argument("run_ccp: need at least q+1 anchors");
    if (d.size() != n) throw std::invalid_argument("run_ccp: range count mismatch");
    for (const Vec& a : anchors)
        if (a.size() != q) throw std::invalid_argument("run_ccp: anchor dimension mismatch");
    if (settings.x_prev_init.size() != 0 && settings.x_prev_init.size() != q)
        throw std::invalid_argument("run_ccp: x_prev_init dimension mismatch");

    NormalizedInstance inst;
    if (settings.sigma_normalize) {
        inst = normalize_instance(anchors, d, sigma);
    } else {
        inst.anchors = anchors;
        inst.d = d;
        inst.scale = 1.0;
    }

    // Work in anchor-centroid coordinates: keeps the lifted quadratic
    // variables small regardless of where the deployment sits.
    Vec centroid = Vec::Zero(q);
    for (const Vec& a : inst.anchors) centroid += a;
    centroid /= n;
    std::vector<Vec> a_c;
    a_c.reserve(inst.anchors.size());
    for (const Vec& a : inst.anchors) a_c.push_back(a - centroid);

    // Geometry rescale: divide lengths by sqrt(spread) so the X block grows
    // only like the spread while the Y block shrinks like 1/spread; both PSD
    // blocks then stay within the same modest dynamic range even when sigma
    // is orders of magnitude below the deployment size.
    double spread = 1.0;
    for (const Vec& a : a_c) spread = std::max(spread, a.norm());
    const double gs = std::sqrt(spread);
    const double gs2 = spread;
    std::vector<Vec> a_t;
    a_t.reserve(a_c.size());
    for (const Vec& a : a_c) a_t.push_back(a / gs);
    const Vec d_t = inst.d / gs;

    const SubproblemLayout lay(q, n);
    EstimateReport rep;
    rep.y_hat = Vec::Zero(n);
    rep.e_hat = Vec::Zero(n);

    Vec x_prev_prev = settings.x_prev_init.size() == q ? settings.x_prev_init
                                                       : Vec::Constant(q, 1e6);
    Vec x_prev = Vec::Zero(q);        // xhat(1) = 0 per the initialization rule
    Vec x_guess = Vec::Zero(q);       // warm-start position, centered frame
    Vec y_diag_prev = Vec::Constant(n, settings.y_init_diag);

    int t = 1;
    while (t <= settings.T && (x_prev - x_prev_prev).norm() > settings.tau) {
        conic::ConicProgram prog = build_ccp_subproblem(a_t, d_t, y_diag_prev, gs2);
        const Vec warm = make_warm_start(a_t, d_t, x_guess / gs, gs2);
        conic::SolverResult res = conic::solve(prog, settings.solver, &warm);
        rep.solver_statuses.push_back(res.status);
        if (!res.has_primal()) {
            rep.solver_failed = true;
            break;
        }
        if (settings.audit_feasibility) {
            const conic::FeasibilityReport fr = conic::check_feasibility(prog, res.primal);
            rep.max_feasibility_violation =
                std::max({rep.max_feasibility_violation, fr.max_equality_residual,
                          fr.max_inequality_violation, fr.max_exp_violation});
            rep.min_psd_eigenvalue = std::min(rep.min_psd_eigenvalue, fr.min_psd_eigenvalue);
        }

        Vec x_sol(q);  // sigma-normalized, centered frame
        for (int c = 0; c < q; ++c) x_sol[c] = res.primal[lay.x(c)] * gs;
        Vec x_meters = (x_sol + centroid) * inst.scale;
        for (int i = 0; i < n; ++i) {
            rep.y_hat[i] = res.primal[lay.y(i)] * gs;
            rep.e_hat[i] = res.primal[lay.e(i)];
        }
        double data_obj = 0.0;
        for (int i = 0; i < n; ++i) {
            const double e = res.primal[lay.e(i)];
            const double ydd = res.primal[lay.yy(i, i)] * gs2;  // variance units
            data_obj += e - std::log(std::max(e, 1e-300)) + std::log(std::max(ydd, 1e-300));
            y_diag_prev[i] = std::max(ydd, settings.y_diag_floor);
        }
        rep.subproblem_objectives.push_back(res.objective_value);
        rep.data_objectives.push_back(data_obj);
        rep.iterate_trace.push_back(x_meters);
        rep.x_hat = x_meters;
        rep.iterations_used = t;

        x_prev_prev = x_prev;
        x_prev = x_meters;
        x_guess = x_sol;
        ++t;

        if (settings.objective_tol > 0.0 && rep.data_objectives.size() >= 2) {
            const double cur = rep.data_objectives.back();
            const double prev = rep.data_objectives[rep.data_objectives.size() - 2];
            if (prev - cur <= settings.objective_tol * std::max(1.0, std::abs(cur))) break;
        }
    }

    rep.rho_hat = Vec::Zero(n);
    if (rep.has_estimate()) {
        for (int i = 0; i < n; ++i)
            rep.rho_hat[i] =
                rep.y_hat[i] * rep.y_hat[i] / std::max(rep.e_hat[i], settings.e_floor);
        rep.detected = detect(rep.y_hat, rep.e_hat, settings.detection_threshold, settings.e_floor);
    }
    return rep;
}

}  // namespace seculoc
