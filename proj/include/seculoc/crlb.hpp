#pragma once
// Fisher information and position CRLBs for the two measurement models:
// additive spoofing bias (unknown delta_i on attacked links) and variance
// dilation (unknown rho_i >= 1 per link). Both partition as
//   F = [[A, B], [B', C]],  F_x = A - B C^{-1} B',  bound = trace(F_x^{-1}).

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "seculoc/scenario.hpp"

namespace seculoc {

enum class FisherModel { attack_model, dilation_model };

struct FisherPartition {
    Mat a;  // q x q position block
    Mat b;  // q x N cross block
    Mat c;  // N x N nuisance block
    FisherModel model = FisherModel::attack_model;

    Mat full() const {
        const int q = static_cast<int>(a.rows());
        const int n = static_cast<int>(c.rows());
        Mat f(q + n, q + n);
        f.topLeftCorner(q, q) = a;
        f.topRightCorner(q, n) = b;
        f.bottomLeftCorner(n, q) = b.transpose();
        f.bottomRightCorner(n, n) = c;
        return f;
    }
};

namespace detail {

inline std::vector<Vec> unit_vectors(const Vec& x, const std::vector<Vec>& anchors) {
    std::vector<Vec> u;
    u.reserve(anchors.size());
    for (const Vec& a : anchors) {
        const Vec diff = x - a;
        const double dist = diff.norm();
        if (!(dist > 0.0))
            throw std::domain_error("fisher information: target coincides with an anchor");
        u.push_back(diff / dist);
    }
    return u;
}

}  // namespace detail

/// Additive-bias model: position information from every link; the bias of an
/// attacked link is an unknown nuisance parameter, so only those links
/// contribute cross terms. With no attackers the bound is the classic
/// genuine-network CRLB.
inline FisherPartition fim_attack_model(const Vec& x, const std::vector<Vec>& anchors, double sigma,
                                        const std::vector<int>& attacker_set = {}) {
    if (!(sigma > 0.0)) throw std::invalid_argument("fim_attack_model: sigma must be > 0");
    const int q = static_cast<int>(x.size());
    const int n = static_cast<int>(anchors.size());
    const auto u = detail::unit_vectors(x, anchors);
    const double is2 = 1.0 / (sigma * sigma);
    FisherPartition f;
    f.model = FisherModel::attack_model;
    f.a = Mat::Zero(q, q);
    for (int i = 0; i < n; ++i) f.a += is2 * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)].transpose();
    f.b = Mat::Zero(q, n);
    for (int i : attacker_set) {
        if (i < 0 || i >= n) throw std::invalid_argument("fim_attack_model: attacker index out of range");
        f.b.col(i) = is2 * u[static_cast<std::size_t>(i)];
    }
    f.c = Mat::Identity(n, n) * is2;
    return f;
}

/// Variance-dilation model: each link's information is discounted by its
/// dilation, cross terms vanish (mean and variance parameters decouple for a
/// Gaussian), and the rho block is diag(1/(2 rho_i^2)).
inline FisherPartition fim_dilation_model(const Vec& x, const std::vector<Vec>& anchors,
                                          double sigma, const Vec& rho) {
    if (!(sigma > 0.0)) throw std::invalid_argument("fim_dilation_model: sigma must be > 0");
    const int q = static_cast<int>(x.size());
    const int n = static_cast<int>(anchors.size());
    if (rho.size() != n) throw std::invalid_argument("fim_dilation_model: rho size mismatch");
    for (int i = 0; i < n; ++i)
        if (!(rho[i] >= 1.0)) throw std::invalid_argument("fim_dilation_model: rho must be >= 1");
    const auto u = detail::unit_vectors(x, anchors);
    const double is2 = 1.0 / (sigma * sigma);
    FisherPartition f;
    f.model = FisherModel::dilation_model;
    f.a = Mat::Zero(q, q);
    for (int i = 0; i < n; ++i)
        f.a += is2 / rho[i] * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)].transpose();
    f.b = Mat::Zero(q, n);
    f.c = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) f.c(i, i) = 1.0 / (2.0 * rho[i] * rho[i]);
    return f;
}

/// trace(F_x^{-1}) in m^2; +infinity when the position information is
/// singular (e.g. all effective anchors collinear in 2-D).
inline double crlb_position(const FisherPartition& f) {
    Eigen::LDLT<Mat> cfac(f.c);
    if (cfac.info() != Eigen::Success || (cfac.vectorD().array() <= 0.0).any())
        throw std::invalid_argument("crlb_position: nuisance block must be positive definite");
    const Mat fx = f.a - f.b * cfac.solve(f.b.transpose());
    Eigen::FullPivLU<Mat> lu(fx);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    return lu.inverse().trace();
}

}  // namespace seculoc
