#pragma once
// Minimal conic-program intermediate representation:
//
//   minimize    obj . z + objconst
//   subject to  row . z  = rhs                     (equalities)
//               row . z >= rhs                     (nonneg inequalities)
//               S_k(z)  PSD                        (symmetric blocks)
//               (a,b,c) in Kexp: c >= b*exp(a/b), b > 0
//
// Symmetric blocks are stored as the upper triangle in row-major order,
// (0,0), (0,1), .., (0,m-1), (1,1), .., (m-1,m-1), one cell per entry and
// no off-diagonal scaling: a cell holds the literal matrix entry, so a
// variable placed at (i,j) also fills (j,i). Cells and exp-cone slots may be
// constants (var = -1) or variable-plus-offset; coefficients are always 1.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace seculoc::conic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LinTerm {
    int var = -1;
    double coeff = 0.0;
    friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

using LinExpr = std::vector<LinTerm>;  // kept sorted by var by the builders

struct LinConstraint {
    LinExpr row;
    double rhs = 0.0;
    friend bool operator==(const LinConstraint&, const LinConstraint&) = default;
};

/// One entry of a symmetric block: value = z[var] + constant (var = -1 for a
/// pure constant cell).
struct PsdCell {
    int var = -1;
    double constant = 0.0;
    friend bool operator==(const PsdCell&, const PsdCell&) = default;
};

struct PsdBlock {
    int order = 0;
    std::vector<PsdCell> cells;  // order*(order+1)/2, row-major upper triangle

    static int cell_index(int order, int i, int j) {
        if (i > j) std::swap(i, j);
        return i * order - i * (i - 1) / 2 + (j - i);
    }
    friend bool operator==(const PsdBlock&, const PsdBlock&) = default;
};

/// Ordered triple (a, b, c) constrained to c >= b*exp(a/b), b > 0. Each slot
/// evaluates to z[var] + offset, var = -1 meaning a literal constant.
struct ExpCone {
    std::array<int, 3> var = {-1, -1, -1};
    std::array<double, 3> offset = {0.0, 0.0, 0.0};
    friend bool operator==(const ExpCone&, const ExpCone&) = default;
};

struct ConicProgram {
    int num_vars = 0;
    LinExpr objective;  // minimize
    double objective_constant = 0.0;
    std::vector<LinConstraint> equalities;
    std::vector<LinConstraint> nonneg_inequalities;  // row . z >= rhs
    std::vector<PsdBlock> psd_blocks;
    std::vector<ExpCone> exp_cones;

    friend bool operator==(const ConicProgram&, const ConicProgram&) = default;

    void validate() const {
        auto check_expr = [&](const LinExpr& e, const char* what) {
            for (const LinTerm& t : e) {
                if (t.var < 0 || t.var >= num_vars)
                    throw std::invalid_argument(std::string("ConicProgram: bad index in ") + what);
                if (!std::isfinite(t.coeff))
                    throw std::invalid_argument(std::string("ConicProgram: nonfinite coeff in ") + what);
            }
        };
        check_expr(objective, "objective");
        if (!std::isfinite(objective_constant))
            throw std::invalid_argument("ConicProgram: nonfinite objective constant");
        for (const auto& c : equalities) {
            check_expr(c.row, "equality");
            if (!std::isfinite(c.rhs)) throw std::invalid_argument("ConicProgram: nonfinite rhs");
        }
        for (const auto& c : nonneg_inequalities) {
            check_expr(c.row, "inequality");
            if (!std::isfinite(c.rhs)) throw std::invalid_argument("ConicProgram: nonfinite rhs");
        }
        for (const auto& b : psd_blocks) {
            if (b.order < 1) throw std::invalid_argument("ConicProgram: psd block order < 1");
            if (static_cast<int>(b.cells.size()) != b.order * (b.order + 1) / 2)
                throw std::invalid_argument("ConicProgram: psd cell count mismatch");
            for (const PsdCell& c : b.cells) {
                if (c.var >= num_vars) throw std::invalid_argument("ConicProgram: bad psd cell index");
                if (!std::isfinite(c.constant))
                    throw std::invalid_argument("ConicProgram: nonfinite psd constant");
            }
        }
        for (const auto& e : exp_cones)
            for (int s = 0; s < 3; ++s) {
                if (e.var[s] >= num_vars) throw std::invalid_argument("ConicProgram: bad exp index");
                if (!std::isfinite(e.offset[s]))
                    throw std::invalid_argument("ConicProgram: nonfinite exp offset");
            }
    }
};

inline double eval_expr(const LinExpr& e, const Vec& z) {
    double v = 0.0;
    for (const LinTerm& t : e) v += t.coeff * z[t.var];
    return v;
}

inline double eval_objective(const ConicProgram& p, const Vec& z) {
    return eval_expr(p.objective, z) + p.objective_constant;
}

inline double eval_slot(int var, double offset, const Vec& z) {
    return (var >= 0 ? z[var] : 0.0) + offset;
}

inline Mat assemble_psd(const PsdBlock& b, const Vec& z) {
    Mat s(b.order, b.order);
    for (int i = 0; i < b.order; ++i)
        for (int j = i; j < b.order; ++j) {
            const PsdCell& c = b.cells[PsdBlock::cell_index(b.order, i, j)];
            s(i, j) = s(j, i) = eval_slot(c.var, c.constant, z);
        }
    return s;
}

/// Signed violation of one exponential-cone membership; <= 0 means inside
/// the closure. Closure boundary at b = 0 requires c >= 0 and a <= 0.
inline double exp_cone_violation(const ExpCone& e, const Vec& z) {
    const double a = eval_slot(e.var[0], e.offset[0], z);
    const double b = eval_slot(e.var[1], e.offset[1], z);
    const double c = eval_slot(e.var[2], e.offset[2], z);
    if (b > 0.0) return b * std::exp(a / b) - c;
    if (b == 0.0) return std::max({a, -c, 0.0});
    return -b;
}

struct FeasibilityReport {
    double max_equality_residual = 0.0;
    double max_inequality_violation = 0.0;  // max over rows of max(0, rhs - row.z)
    double min_psd_eigenvalue = std::numeric_limits<double>::infinity();
    double max_exp_violation = 0.0;

    bool passes(double tol) const {
        return max_equality_residual <= tol && max_inequality_violation <= tol &&
               min_psd_eigenvalue >= -tol && max_exp_violation <= tol;
    }
};

inline FeasibilityReport check_feasibility(const ConicProgram& p, const Vec& z) {
    if (z.size() != p.num_vars)
        throw std::invalid_argument("check_feasibility: point length mismatch");
    FeasibilityReport r;
    for (const auto& c : p.equalities)
        r.max_equality_residual = std::max(r.max_equality_residual, std::abs(eval_expr(c.row, z) - c.rhs));
    for (const auto& c : p.nonneg_inequalities)
        r.max_inequality_violation = std::max(r.max_inequality_violation, std::max(0.0, c.rhs - eval_expr(c.row, z)));
    for (const auto& b : p.psd_blocks) {
        Eigen::SelfAdjointEigenSolver<Mat> eigs(assemble_psd(b, z), Eigen::EigenvaluesOnly);
        r.min_psd_eigenvalue = std::min(r.min_psd_eigenvalue, eigs.eigenvalues().minCoeff());
    }
    for (const auto& e : p.exp_cones)
        r.max_exp_violation = std::max(r.max_exp_violation, std::max(0.0, exp_cone_violation(e, z)));
    return r;
}

// -------------------------------------------------------------------------
// Text serialization (sparse triplets). Doubles use shortest round-trip
// formatting, so save/load reproduces the program bit for bit.

namespace detail {

inline void put_double(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

inline void put_int(std::string& out, long long v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

class TokenReader {
  public:
    explicit TokenReader(const std::string& text) : text_(text) {}

    std::string next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ >= text_.size()) throw std::runtime_error("conic text: unexpected end of input");
        std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void expect(const std::string& word) {
        std::string got = next();
        if (got != word)
            throw std::runtime_error("conic text: expected '" + word + "', got '" + got + "'");
    }

    long long next_int() {
        std::string t = next();
        long long v = 0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw std::runtime_error("conic text: bad integer '" + t + "'");
        return v;
    }

    double next_double() {
        std::string t = next();
        double v = 0.0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw std::runtime_error("conic text: bad number '" + t + "'");
        return v;
    }

  private:
    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string to_text(const ConicProgram& p) {
    std::string out;
    auto put_expr = [&out](const LinExpr& e) {
        detail::put_int(out, static_cast<long long>(e.size()));
        for (const LinTerm& t : e) {
            out += ' ';
            detail::put_int(out, t.var);
            out += ' ';
            detail::put_double(out, t.coeff);
        }
        out += '\n';
    };
    out += "seculoc_conic_v1\nvars ";
    detail::put_int(out, p.num_vars);
    out += "\nobjconst ";
    detail::put_double(out, p.objective_constant);
    out += "\nobj ";
    put_expr(p.objective);
    out += "eq ";
    detail::put_int(out, static_cast<long long>(p.equalities.size()));
    out += '\n';
    for (const auto& c : p.equalities) {
        detail::put_double(out, c.rhs);
        out += ' ';
        put_expr(c.row);
    }
    out += "ge ";
    detail::put_int(out, static_cast<long long>(p.nonneg_inequalities.size()));
    out += '\n';
    for (const auto& c : p.nonneg_inequalities) {
        detail::put_double(out, c.rhs);
        out += ' ';
        put_expr(c.row);
    }
    out += "psd ";
    detail::put_int(out, static_cast<long long>(p.psd_blocks.size()));
    out += '\n';
    for (const auto& b : p.psd_blocks) {
        detail::put_int(out, b.order);
        for (const PsdCell& c : b.cells) {
            out += ' ';
            detail::put_int(out, c.var);
            out += ' ';
            detail::put_double(out, c.constant);
        }
        out += '\n';
    }
    out += "exp ";
    detail::put_int(out, static_cast<long long>(p.exp_cones.size()));
    out += '\n';
    for (const auto& e : p.exp_cones) {
        for (int s = 0; s < 3; ++s) {
            if (s) out += ' ';
            detail::put_int(out, e.var[s]);
            out += ' ';
            detail::put_double(out, e.offset[s]);
        }
        out += '\n';
    }
    out += "end\n";
    return out;
}

inline ConicProgram program_from_text(const std::string& text) {
    detail::TokenReader in(text);
    in.expect("seculoc_conic_v1");
    ConicProgram p;
    auto read_expr = [&in]() {
        LinExpr e(static_cast<std::size_t>(in.next_int()));
        for (LinTerm& t : e) {
            t.var = static_cast<int>(in.next_int());
            t.coeff = in.next_double();
        }
        return e;
    };
    in.expect("vars");
    p.num_vars = static_cast<int>(in.next_int());
    in.expect("objconst");
    p.objective_constant = in.next_double();
    in.expect("obj");
    p.objective = read_expr();
    in.expect("eq");
    p.equalities.resize(static_cast<std::size_t>(in.next_int()));
    for (auto& c : p.equalities) {
        c.rhs = in.next_double();
        c.row = read_expr();
    }
    in.expect("ge");
    p.nonneg_inequalities.resize(static_cast<std::size_t>(in.next_int()));
    for (auto& c : p.nonneg_inequalities) {
        c.rhs = in.next_double();
        c.row = read_expr();
    }
    in.expect("psd");
    p.psd_blocks.resize(static_cast<std::size_t>(in.next_int()));
    for (auto& b : p.psd_blocks) {
        b.order = static_cast<int>(in.next_int());
        b.cells.resize(static_cast<std::size_t>(b.order * (b.order + 1) / 2));
        for (PsdCell& c : b.cells) {
            c.var = static_cast<int>(in.next_int());
            c.constant = in.next_double();
        }
    }
    in.expect("exp");
    p.exp_cones.resize(static_cast<std::size_t>(in.next_int()));
    for (auto& e : p.exp_cones)
        for (int s = 0; s < 3; ++s) {
            e.var[s] = static_cast<int>(in.next_int());
            e.offset[s] = in.next_double();
        }
    in.expect("end");
    p.validate();
    return p;
}

}  // namespace seculoc::conic
