#pragma once
// Primal log-barrier path-following solver for the ConicProgram IR.
//
// Phase II minimizes t*(obj.z) + Phi(z) over the equality manifold for an
// increasing t, where Phi sums the canonical self-concordant barriers:
//   -ln(row.z - rhs)            per inequality,
//   -ln det S(z)                per symmetric block,
//   -ln(b ln(c/b) - a) - ln b - ln c  per exponential-cone triple.
// Newton steps solve the equality-constrained KKT system; a diagonal
// preconditioner derived from the warm start (when one is supplied) keeps the
// system well scaled even when variable magnitudes span many orders.
//
// Phase I, used when no strictly feasible point is known, minimizes an
// auxiliary slack s that shifts every cone towards feasibility: inequality
// slacks gain +s, symmetric blocks gain +s*I, and exponential triples move
// along the interior ray (-1, +1, +1). s < 0 certifies a strict interior.
//
// Presolve drops any inequality whose row and rhs exactly duplicate an
// equality: such rows are implied and would leave the inequality slack with
// an empty interior, which a primal barrier cannot tolerate.

#include <algorithm>
#include <chrono>
#include <cmath>
#ifdef SECULOC_SOLVER_TRACE
#include <cstdio>
#endif
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/conic/program.hpp"

namespace seculoc::conic {

struct SolverSettings {
    double gap_tol = 1e-8;        // relative duality-gap target
    double equality_tol = 1e-8;   // relative equality residual at acceptance
    double mu = 20.0;             // barrier parameter multiplier per stage
    double t_init = 1.0;
    int max_newton_per_stage = 100;
    double newton_tol = 1e-10;    // stage stops when lambda^2/2 falls below
    double armijo_alpha = 0.1;
    double backtrack_beta = 0.5;
    int max_backtracks = 90;
    double unbounded_threshold = 1e14;  // |z|_inf beyond this means unbounded
};

enum class SolveStatus { optimal, near_optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::near_optimal: return "near_optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

struct SolverResult {
    SolveStatus status = SolveStatus::numerical_failure;
    Vec primal;  // size num_vars iff status is optimal/near_optimal, else empty
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    int newton_steps = 0;
    int stages = 0;
    double runtime_seconds = 0.0;
    std::string message;

    bool has_primal() const { return primal.size() > 0; }
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// value = sum coeff * z[var] + c0
struct Affine {
    std::vector<std::pair<int, double>> terms;
    double c0 = 0.0;

    double eval(const Vec& z) const {
        double v = c0;
        for (const auto& [var, coeff] : terms) v += coeff * z[var];
        return v;
    }
};

struct PsdData {
    int order = 0;
    std::vector<Affine> cells;                 // row-major upper triangle
    std::vector<std::pair<int, int>> coords;   // (i, j) per cell
};

struct ExpData {
    Affine slot[3];  // (a, b, c)
};

struct Cones {
    std::vector<Affine> ineqs;  // expr >= 0
    std::vector<PsdData> psd;
    std::vector<ExpData> exp;

    bool empty() const { return ineqs.empty() && psd.empty() && exp.empty(); }

    double nu() const {
        double v = static_cast<double>(ineqs.size()) + 3.0 * static_cast<double>(exp.size());
        for (const PsdData& b : psd) v += b.order;
        return v;
    }
};

inline Affine slot_affine(int var, double offset) {
    Affine a;
    if (var >= 0) a.terms.emplace_back(var, 1.0);
    a.c0 = offset;
    return a;
}

/// shift_var >= 0 adds the phase-I slack to every cone.
inline Cones build_cones(const ConicProgram& p, const std::vector<LinConstraint>& ineq_rows,
                         int shift_var) {
    Cones c;
    c.ineqs.reserve(ineq_rows.size());
    for (const LinConstraint& lc : ineq_rows) {
        Affine a;
        a.terms.reserve(lc.row.size() + 1);
        for (const LinTerm& t : lc.row) a.terms.emplace_back(t.var, t.coeff);
        a.c0 = -lc.rhs;
        if (shift_var >= 0) a.terms.emplace_back(shift_var, 1.0);
        c.ineqs.push_back(std::move(a));
    }
    for (const PsdBlock& b : p.psd_blocks) {
        PsdData d;
        d.order = b.order;
        for (int i = 0; i < b.order; ++i)
            for (int j = i; j < b.order; ++j) {
                const PsdCell& cell = b.cells[PsdBlock::cell_index(b.order, i, j)];
                Affine a = slot_affine(cell.var, cell.constant);
                if (shift_var >= 0 && i == j) a.terms.emplace_back(shift_var, 1.0);
                d.cells.push_back(std::move(a));
                d.coords.emplace_back(i, j);
            }
        c.psd.push_back(std::move(d));
    }
    for (const ExpCone& e : p.exp_cones) {
        ExpData d;
        for (int s = 0; s < 3; ++s) d.slot[s] = slot_affine(e.var[s], e.offset[s]);
        if (shift_var >= 0) {
            d.slot[0].terms.emplace_back(shift_var, -1.0);
            d.slot[1].terms.emplace_back(shift_var, 1.0);
            d.slot[2].terms.emplace_back(shift_var, 1.0);
        }
        c.exp.push_back(std::move(d));
    }
    return c;
}

class Barrier {
  public:
    explicit Barrier(Cones cones) : cones_(std::move(cones)) {}

    double nu() const { return cones_.nu(); }
    bool empty() const { return cones_.empty(); }

    /// +inf when z is not strictly feasible for every cone.
    double value(const Vec& z) const {
        double phi = 0.0;
        for (const Affine& a : cones_.ineqs) {
            const double s = a.eval(z);
            if (!(s > 0.0) || !std::isfinite(s)) return kInf;
            phi -= std::log(s);
        }
        Mat s_work;
        for (const PsdData& b : cones_.psd) {
            assemble(b, z, s_work);
            if (!s_work.allFinite()) return kInf;
            Eigen::LLT<Mat> llt(s_work);
            if (llt.info() != Eigen::Success) return kInf;
            phi -= 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        }
        for (const ExpData& e : cones_.exp) {
            const double a = e.slot[0].eval(z);
            const double b = e.slot[1].eval(z);
            const double c = e.slot[2].eval(z);
            if (!(b > 0.0) || !(c > 0.0) || !std::isfinite(a)) return kInf;
            const double psi = b * std::log(c / b) - a;
            if (!(psi > 0.0)) return kInf;
            phi -= std::log(psi) + std::log(b) + std::log(c);
        }
        return std::isfinite(phi) ? phi : kInf;
    }

    /// Accumulates gradient and Hessian; call only where value() is finite.
    void derivatives(const Vec& z, Vec& g, Mat& h) const {
        for (const Affine& a : cones_.ineqs) {
            const double s = a.eval(z);
            const double inv = 1.0 / s;
            const double inv2 = inv * inv;
            for (const auto& [v1, c1] : a.terms) {
                g[v1] -= c1 * inv;
                for (const auto& [v2, c2] : a.terms) h(v1, v2) += c1 * c2 * inv2;
            }
        }
        Mat s_work, p_work;
        for (const PsdData& b : cones_.psd) {
            assemble(b, z, s_work);
            Eigen::LLT<Mat> llt(s_work);
            p_work = llt.solve(Mat::Identity(b.order, b.order));
            const int ncells = static_cast<int>(b.cells.size());
            for (int k = 0; k < ncells; ++k) {
                const auto [i, j] = b.coords[k];
                const double gs = (i == j) ? -p_work(i, i) : -2.0 * p_work(i, j);
                for (const auto& [v, cv] : b.cells[k].terms) g[v] += cv * gs;
            }
            for (int k1 = 0; k1 < ncells; ++k1) {
                if (b.cells[k1].terms.empty()) continue;
                const auto [i, j] = b.coords[k1];
                for (int k2 = 0; k2 < ncells; ++k2) {
                    if (b.cells[k2].terms.empty()) continue;
                    const auto [k, l] = b.coords[k2];
                    double hv;
                    if (i == j && k == l)
                        hv = p_work(i, k) * p_work(i, k);
                    else if (i == j)
                        hv = 2.0 * p_work(i, k) * p_work(i, l);
                    else if (k == l)
                        hv = 2.0 * p_work(k, i) * p_work(k, j);
                    else
                        hv = 2.0 * (p_work(i, k) * p_work(j, l) + p_work(i, l) * p_work(j, k));
                    for (const auto& [v1, c1] : b.cells[k1].terms)
                        for (const auto& [v2, c2] : b.cells[k2].terms) h(v1, v2) += c1 * c2 * hv;
                }
            }
        }
        for (const ExpData& e : cones_.exp) {
            const double a = e.slot[0].eval(z);
            const double b = e.slot[1].eval(z);
            const double c = e.slot[2].eval(z);
            const double l = std::log(c / b);
            const double psi = b * l - a;
            const double ip = 1.0 / psi;
            const double ip2 = ip * ip;
            const double boc = b / c;
            double f1[3];
            double f2[3][3];
            f1[0] = ip;
            f1[1] = -(l - 1.0) * ip - 1.0 / b;
            f1[2] = -boc * ip - 1.0 / c;
            f2[0][0] = ip2;
            f2[0][1] = f2[1][0] = -(l - 1.0) * ip2;
            f2[0][2] = f2[2][0] = -boc * ip2;
            f2[1][1] = ip / b + (l - 1.0) * (l - 1.0) * ip2 + 1.0 / (b * b);
            f2[1][2] = f2[2][1] = -ip / c + (l - 1.0) * boc * ip2;
            f2[2][2] = boc / c * ip + boc * boc * ip2 + 1.0 / (c * c);
            for (int s1 = 0; s1 < 3; ++s1) {
                for (const auto& [v1, c1] : e.slot[s1].terms) {
                    g[v1] += c1 * f1[s1];
                    for (int s2 = 0; s2 < 3; ++s2)
                        for (const auto& [v2, c2] : e.slot[s2].terms)
                            h(v1, v2) += c1 * c2 * f2[s1][s2];
                }
            }
        }
    }

  private:
    Cones cones_;

    static void assemble(const PsdData& b, const Vec& z, Mat& s) {
        s.resize(b.order, b.order);
        for (std::size_t k = 0; k < b.cells.size(); ++k) {
            const auto [i, j] = b.coords[k];
            s(i, j) = s(j, i) = b.cells[k].eval(z);
        }
    }
};

struct StageOutcome {
    bool converged = false;
    bool failed = false;
    bool diverged = false;
    bool early_stop = false;
};

struct KktWork {
    Mat k;
    Vec rhs, sol;
};

/// One centering stage: Newton on t*c.z + Phi(z) subject to A z = b.
inline StageOutcome newton_stage(double t, const Vec& cobj, const Barrier& barrier, const Mat& a_eq,
                                 const Vec& b_eq, Vec& z, const SolverSettings& st,
                                 int& newton_counter, KktWork& work,
                                 const std::function<bool(const Vec&)>* early_stop = nullptr) {
    const int n = static_cast<int>(z.size());
    const int m = static_cast<int>(a_eq.rows());
    StageOutcome out;
    double fz = t * cobj.dot(z) + barrier.value(z);
    if (!std::isfinite(fz)) {
        out.failed = true;
        return out;
    }
    Vec g(n);
    Mat h(n, n);
    Vec dscale(n);
    Vec rscale(m);
    int no_progress = 0;
    for (int it = 0; it < st.max_newton_per_stage; ++it) {
        g.setZero();
        h.setZero();
        barrier.derivatives(z, g, h);
        g += t * cobj;

        // Jacobi scaling from the Hessian diagonal: slack-driven curvature
        // spans many orders of magnitude along the path, and any scaling
        // fixed per stage (or derived from |z|) cannot track it.
        const double hmax = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        for (int i = 0; i < n; ++i)
            dscale[i] = 1.0 / std::sqrt(std::max(h(i, i), hmax * 1e-16));

        work.k.setZero(n + m, n + m);
        work.k.topLeftCorner(n, n) = dscale.asDiagonal() * h * dscale.asDiagonal();
        work.rhs.resize(n + m);
        work.rhs.head(n) = -dscale.cwiseProduct(g);
        Vec resid;
        if (m > 0) {
            resid = b_eq - a_eq * z;
            for (int i = 0; i < m; ++i) {
                const double rn =
                    (a_eq.row(i).transpose().cwiseProduct(dscale)).lpNorm<Eigen::Infinity>();
                rscale[i] = 1.0 / std::max(rn, 1e-12);
            }
            Mat as = rscale.asDiagonal() * a_eq * dscale.asDiagonal();
            work.k.topRightCorner(n, m) = as.transpose();
            work.k.bottomLeftCorner(m, n) = as;
            work.rhs.tail(m) = rscale.cwiseProduct(resid);
        }

        // Pick the attempt whose direction best satisfies the *unregularized*
        // KKT system. A collapsed solve from an ill-conditioned K can return a
        // tiny dz whose dz'H dz looks converged while the true Newton
        // decrement is large, so convergence claims are only allowed on
        // directions that verifiably solve the system.
        double dir_quality = std::numeric_limits<double>::infinity();
        const double rhs_norm = work.rhs.lpNorm<Eigen::Infinity>() + 1e-300;
        for (int attempt = 0; attempt < 3; ++attempt) {
            Mat kr = work.k;
            if (attempt > 0) {
                const double eps = attempt == 1 ? 1e-11 : 1e-7;
                const double dmax =
                    std::max(1.0, work.k.topLeftCorner(n, n).diagonal().cwiseAbs().maxCoeff());
                kr.topLeftCorner(n, n).diagonal().array() += eps * dmax;
                kr.bottomRightCorner(m, m).diagonal().array() -= eps;
            }
            Eigen::PartialPivLU<Mat> lu(kr);
            Vec sol = lu.solve(work.rhs);
            if (!sol.allFinite()) continue;
            const double rel = (work.k * sol - work.rhs).lpNorm<Eigen::Infinity>() / rhs_norm;
            if (rel < dir_quality) {
                dir_quality = rel;
                work.sol = sol;
            }
            if (rel <= 1e-9) break;
        }
        if (dir_quality > 1e-3) {
            out.failed = true;
            return out;
        }
        const bool dir_trusted = dir_quality <= 1e-8;
        Vec dz = dscale.cwiseProduct(work.sol.head(n));
        ++newton_counter;

        double lambda2 = dz.dot(h * dz);
        if (!(lambda2 >= 0.0)) lambda2 = 0.0;
        const double eq_resid = m > 0 ? (b_eq - a_eq * z).lpNorm<Eigen::Infinity>() : 0.0;
        const double eq_tol = st.equality_tol * (1.0 + (m > 0 ? b_eq.lpNorm<Eigen::Infinity>() : 0.0));
        // A Newton step decreases f by about lambda2/2; once that falls below
        // the roundoff of evaluating f itself, the stage is centered to
        // floating-point accuracy and further iterations only add noise.
        const double f_floor =
            16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(fz));
        if (dir_trusted && (0.5 * lambda2 <= st.newton_tol || 0.5 * lambda2 <= f_floor) &&
            eq_resid <= eq_tol) {
            out.converged = true;
            return out;
        }

        double dec = std::min(g.dot(dz), 0.0);
        double step = 1.0;
        int bt = 0;
        const double f_prev = fz;
        for (;;) {
            const Vec zn = z + step * dz;
            const double fn = t * cobj.dot(zn) + barrier.value(zn);
            if (std::isfinite(fn) && fn <= fz + st.armijo_alpha * step * dec + f_floor) {
                z = zn;
                fz = fn;
                break;
            }
            step *= st.backtrack_beta;
            if (++bt > st.max_backtracks) {
#ifdef SECULOC_SOLVER_TRACE
                std::fprintf(stderr,
                             "    [newton %3d] t=%.3e backtrack fail lambda2=%.3e dec=%.3e\n", it,
                             t, lambda2, dec);
#endif
                out.failed = true;
                return out;
            }
        }
        // Steps whose measured decrease sits inside evaluation roundoff are
        // indistinguishable from a random walk, so stop instead of letting the
        // iterate wander (it drifts off the equality manifold with nothing to
        // pull it back). A small Newton decrement at that point means the
        // quadratic phase bottomed out on roundoff short of newton_tol -- the
        // point is centered as far as double precision can tell -- while a
        // large one means the direction quality is gone.
        if (f_prev - fz < f_floor) {
            if (++no_progress >= 3) {
                const double eq_now = m > 0 ? (b_eq - a_eq * z).lpNorm<Eigen::Infinity>() : 0.0;
                if (dir_trusted && lambda2 <= 1e-4 && eq_now <= eq_tol)
                    out.converged = true;
                else
                    out.failed = true;
                return out;
            }
        } else {
            no_progress = 0;
        }
#ifdef SECULOC_SOLVER_TRACE
        std::fprintf(stderr, "    [newton %3d] t=%.3e lambda2=%.3e step=%.3e obj=%.6e fz=%.6e\n",
                     it, t, lambda2, step, cobj.dot(z), fz);
#endif
        if (z.lpNorm<Eigen::Infinity>() > st.unbounded_threshold) {
            out.diverged = true;
            return out;
        }
        if (early_stop && (*early_stop)(z)) {
            out.early_stop = true;
            return out;
        }
    }
    return out;  // stage budget exhausted without convergence
}

}  // namespace detail

/// Interior-point solve. `warm_start`, when given, is checked for strict cone
/// feasibility (after a least-norm projection onto the equalities) and used
/// as the phase-II start.
inline SolverResult solve(const ConicProgram& p, const SolverSettings& settings = {},
                          const Vec* warm_start = nullptr) {
    using namespace detail;
    const auto t_begin = std::chrono::steady_clock::now();
    auto elapsed = [&t_begin] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    };
    p.validate();
    SolverResult out;
    const int n = p.num_vars;

    // Presolve: drop inequalities that duplicate an equality row exactly.
    std::vector<LinConstraint> ineqs;
    ineqs.reserve(p.nonneg_inequalities.size());
    for (const LinConstraint& c : p.nonneg_inequalities) {
        bool dup = false;
        for (const LinConstraint& e : p.equalities)
            if (c == e) {
                dup = true;
                break;
            }
        if (!dup) ineqs.push_back(c);
    }

    const int m = static_cast<int>(p.equalities.size());
    Mat a_eq = Mat::Zero(m, n);
    Vec b_eq = Vec::Zero(m);
    for (int i = 0; i < m; ++i) {
        for (const LinTerm& t : p.equalities[i].row) a_eq(i, t.var) += t.coeff;
        b_eq[i] = p.equalities[i].rhs;
    }

    Vec cobj = Vec::Zero(n);
    for (const LinTerm& t : p.objective) cobj[t.var] += t.coeff;

    Barrier barrier(build_cones(p, ineqs, -1));

    auto finish = [&](SolveStatus status, const Vec* z, std::string msg) {
        out.status = status;
        out.message = std::move(msg);
        if (z && (status == SolveStatus::optimal || status == SolveStatus::near_optimal)) {
            out.primal = *z;
            out.objective_value = eval_objective(p, *z);
        }
        out.runtime_seconds = elapsed();
        return out;
    };

    // Least-norm equality solution, also the fallback start.
    Vec z_ls = Vec::Zero(n);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod;
    if (m > 0) {
        cod.compute(a_eq);
        z_ls = cod.solve(b_eq);
    }

    // No cones: a linear program over an affine set. Optimal iff the
    // objective is orthogonal to the null space of the equalities.
    if (barrier.empty()) {
        Vec reduced = cobj;
        if (m > 0) {
            Vec lambda = a_eq.transpose().colPivHouseholderQr().solve(cobj);
            reduced = cobj - a_eq.transpose() * lambda;
        }
        if (reduced.lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + cobj.lpNorm<Eigen::Infinity>()))
            return finish(SolveStatus::unbounded, nullptr, "objective unbounded on equality manifold");
        if (m > 0 && (a_eq * z_ls - b_eq).lpNorm<Eigen::Infinity>() >
                         settings.equality_tol * (1.0 + b_eq.lpNorm<Eigen::Infinity>()))
            return finish(SolveStatus::infeasible, nullptr, "inconsistent equalities");
        return finish(SolveStatus::optimal, &z_ls, "linear over equalities only");
    }

    // Strictly feasible start: projected warm start, the least-norm equality
    // point, or phase I.
    Vec z;
    bool have_interior = false;
    if (warm_start && warm_start->size() == n && warm_start->allFinite()) {
        Vec zw = *warm_start;
        if (m > 0) {
            Vec resid = b_eq - a_eq * zw;
            if (resid.lpNorm<Eigen::Infinity>() > 0.0) zw += cod.solve(resid);
        }
        if (std::isfinite(barrier.value(zw))) {
            z = zw;
            have_interior = true;
        }
    }
    if (!have_interior && std::isfinite(barrier.value(z_ls))) {
        z = z_ls;
        have_interior = true;
    }

    if (!have_interior) {
        // ---- Phase I over (z, s).
        const int na = n + 1;
        Vec za(na);
        za.head(n) = z_ls;

        // Initial shift: grow s until every shifted cone is strictly inside.
        Cones shifted = build_cones(p, ineqs, n);
        Barrier probe(std::move(shifted));
        double s0 = 1.0;
        za[n] = s0;
        for (int grow = 0; grow < 120 && !std::isfinite(probe.value(za)); ++grow) {
            s0 *= 2.0;
            za[n] = s0;
        }
        if (!std::isfinite(probe.value(za)))
            return finish(SolveStatus::numerical_failure, nullptr, "phase I: no finite shift found");

        Cones phase1 = build_cones(p, ineqs, n);
        // Brake just below the exit margin: a loose bound lets the slack (and
        // with it the z iterates) dive far past feasibility, which would
        // poison the phase-II preconditioner.
        const double exit_margin = 1e-2 * (1.0 + s0);
        const double s_lo = -(1.0 + 4.0 * exit_margin + 2.0 * s0);
        detail::Affine lo_bound;
        lo_bound.terms.emplace_back(n, 1.0);
        lo_bound.c0 = -s_lo;
        phase1.ineqs.push_back(std::move(lo_bound));
        Barrier barrier1(std::move(phase1));

        Mat a1 = Mat::Zero(m, na);
        a1.leftCols(n) = a_eq;
        Vec cobj1 = Vec::Zero(na);
        cobj1[n] = 1.0;

        std::function<bool(const Vec&)> early = [&](const Vec& zz) { return zz[n] < -exit_margin; };
        const double nu1 = barrier1.nu();
        const double t_target1 = nu1 / (1e-7 * (1.0 + s0));
        double t1 = std::min(settings.t_init, nu1 / (1.0 + s0));
        KktWork work;
        bool stopped_early = false;
        for (;;) {
            StageOutcome so = newton_stage(t1, cobj1, barrier1, a1, b_eq, za, settings,
                                           out.newton_steps, work, &early);
            ++out.stages;
            if (so.failed)
                return finish(SolveStatus::numerical_failure, nullptr, "phase I: Newton failure");
            if (so.diverged)
                return finish(SolveStatus::numerical_failure, nullptr, "phase I: iterates diverged");
            if (so.early_stop) {
                stopped_early = true;
                break;
            }
            if (t1 >= t_target1) break;
            t1 = std::min(t1 * settings.mu, t_target1);
        }
        const double s_final = za[n];
        if (!stopped_early && s_final > 1e-6 * (1.0 + s0))
            return finish(SolveStatus::infeasible, nullptr,
                          "phase I optimum s = " + std::to_string(s_final));
        if (s_final >= 0.0)
            return finish(SolveStatus::numerical_failure, nullptr,
                          "phase I: only marginal feasibility reached");
        z = za.head(n);
        if (!std::isfinite(barrier.value(z)))
            return finish(SolveStatus::numerical_failure, nullptr,
                          "phase I point not strictly feasible");
    }

    // ---- Phase II. The stop threshold tracks the current objective value:
    // with a far-off warm start |c'z| can shrink by orders of magnitude along
    // the path, and a relative-gap target frozen at the start point would
    // quit while the iterate is still coarse.
    const double eq_tol_abs =
        settings.equality_tol * (1.0 + (m > 0 ? b_eq.lpNorm<Eigen::Infinity>() : 0.0));
    auto equality_residual = [&](const Vec& zz) {
        return m > 0 ? (b_eq - a_eq * zz).lpNorm<Eigen::Infinity>() : 0.0;
    };
    // Pull an interior point back onto the equality manifold: least-norm
    // correction, halved until the cone interior is preserved. Stalled stages
    // can leave the iterate slightly off the manifold, and no point may be
    // handed back in that state.
    auto repair_equalities = [&](Vec& zz) {
        for (int pass = 0; pass < 4 && equality_residual(zz) > eq_tol_abs; ++pass) {
            const Vec delta = cod.solve(b_eq - a_eq * zz);
            double s = 1.0;
            bool moved = false;
            for (int halve = 0; halve < 60 && !moved; ++halve, s *= 0.5) {
                if (std::isfinite(barrier.value(zz + s * delta))) {
                    zz += s * delta;
                    moved = true;
                }
            }
            if (!moved) break;
        }
        return equality_residual(zz) <= eq_tol_abs;
    };

    const double nu = barrier.nu();
    // Start the ramp where the current point is roughly a central point: when
    // the start objective dwarfs nu, a larger t would ask one Newton stage to
    // cross many orders of magnitude, which it cannot do in floating point.
    double t = std::min(settings.t_init, nu / (1.0 + std::abs(cobj.dot(z))));
    KktWork work;
    bool final_converged = false;
    int repeats_at_t = 0;
    for (int stage = 0;; ++stage) {
        StageOutcome so =
            newton_stage(t, cobj, barrier, a_eq, b_eq, z, settings, out.newton_steps, work);
        ++out.stages;
        const double gap_goal = settings.gap_tol * std::max(1.0, std::abs(cobj.dot(z)));
#ifdef SECULOC_SOLVER_TRACE
        std::fprintf(stderr,
                     "  [stage %2d] t=%.3e obj=%.8e conv=%d fail=%d gap=%.3e goal=%.3e\n", stage,
                     t, cobj.dot(z), (int)so.converged, (int)so.failed, nu / t, gap_goal);
#endif
        const bool last = nu / t <= gap_goal;
        if (so.diverged) return finish(SolveStatus::unbounded, nullptr, "iterates diverged");
        if (so.failed || (!so.converged && repeats_at_t >= 8)) {
            // A stall once the gap bound is already tight still yields a
            // usable near-optimal point, provided it sits on the equality
            // manifold after repair.
            if (nu / t <= 1e4 * gap_goal && repair_equalities(z))
                return finish(SolveStatus::near_optimal, &z, "late-stage stall, gap bound " +
                                                                 std::to_string(nu / t));
            return finish(SolveStatus::numerical_failure, nullptr, "Newton failure mid-path");
        }
        if (!so.converged) {
            // Stage budget exhausted while still making measurable progress:
            // keep centering at this t with a fresh budget. Raising t from an
            // uncentered point abandons the central path, and with it the
            // nu/t gap certificate.
            ++repeats_at_t;
            continue;
        }
        if (last) {
            final_converged = true;
            break;
        }
        if (stage > 512)
            return finish(SolveStatus::numerical_failure, nullptr,
                          "barrier ramp did not close the gap");
        t *= settings.mu;
        repeats_at_t = 0;
    }

    if (!repair_equalities(z))
        return finish(SolveStatus::numerical_failure, nullptr, "equality drift not repairable");
    if (final_converged) return finish(SolveStatus::optimal, &z, "");
    return finish(SolveStatus::near_optimal, &z, "final stage left residual lambda^2");
}

}  // namespace seculoc::conic
