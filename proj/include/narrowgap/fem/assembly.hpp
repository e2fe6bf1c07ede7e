#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <thread>
#include <vector>

#include "narrowgap/fem/mesh.hpp"

namespace narrowgap::fem {

/// Lame parameters; the inclusion values matter only on meshes with filled inclusions.
struct Material {
    double lambda = 1.0;
    double mu = 1.0;
    double lambda_incl = 1e6;
    double mu_incl = 1e6;

    void validate() const {
        // Planar ellipticity.
        if (!(mu > 0 && lambda + mu >= 0)) throw DomainError("Lame parameters must satisfy mu > 0 and lambda + mu >= 0");
        if (!(mu_incl > 0 && lambda_incl + mu_incl >= 0)) throw DomainError("inclusion Lame parameters must satisfy mu > 0 and lambda + mu >= 0");
    }
    double lam(Region r) const { return r == Region::incl1 || r == Region::incl2 ? lambda_incl : lambda; }
    double shear(Region r) const { return r == Region::incl1 || r == Region::incl2 ? mu_incl : mu; }
};

/// P2 shape functions on the reference triangle, node order (v0, v1, v2, m01, m12, m20).
struct P2 {
    static std::array<double, 6> N(double xi, double eta) {
        const double l0 = 1 - xi - eta, l1 = xi, l2 = eta;
        return {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0};
    }
    /// dN/dxi and dN/deta.
    static std::array<std::array<double, 6>, 2> dN(double xi, double eta) {
        const double l0 = 1 - xi - eta, l1 = xi, l2 = eta;
        return {{{1 - 4 * l0, 4 * l1 - 1, 0, 4 * (l0 - l1), 4 * l2, -4 * l2}, {1 - 4 * l0, 0, 4 * l2 - 1, -4 * l1, 4 * l1, 4 * (l0 - l2)}}};
    }
};

struct QuadPoint {
    double xi, eta, w;
};

/// 7-point rule, exact for degree 5 (weights sum to the reference area 1/2).
inline const std::array<QuadPoint, 7>& triangle_rule() {
    static const std::array<QuadPoint, 7> rule = [] {
        const double a1 = 0.059715871789769820, b1 = 0.470142064105115090;
        const double a2 = 0.797426985353087322, b2 = 0.101286507323456339;
        const double w0 = 0.225, w1 = 0.132394152788506181, w2 = 0.125939180544827153;
        return std::array<QuadPoint, 7>{{{1.0 / 3, 1.0 / 3, w0 / 2},
                                         {a1, b1, w1 / 2},
                                         {b1, a1, w1 / 2},
                                         {b1, b1, w1 / 2},
                                         {a2, b2, w2 / 2},
                                         {b2, a2, w2 / 2},
                                         {b2, b2, w2 / 2}}};
    }();
    return rule;
}

/// Physical shape-function gradients and Jacobian determinant at a reference point.
struct ElementGeometry {
    std::array<std::array<double, 6>, 2> grad; // grad[d][k] = dN_k/dx_d
    double detJ = 0;
};

inline ElementGeometry element_geometry(const Mesh& m, size_t e, double xi, double eta) {
    const auto& t = m.tris[e];
    const auto d = P2::dN(xi, eta);
    double J[2][2] = {{0, 0}, {0, 0}}; // J[i][j] = dx_i/dxi_j
    for (int k = 0; k < 6; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) J[i][j] += m.nodes[t[k]][i] * d[j][k];
    ElementGeometry g;
    g.detJ = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (!(g.detJ > 0)) throw DomainError("element " + std::to_string(e) + " has a non-positive Jacobian");
    const double inv[2][2] = {{J[1][1] / g.detJ, -J[0][1] / g.detJ}, {-J[1][0] / g.detJ, J[0][0] / g.detJ}}; // dxi_j/dx_i
    for (int k = 0; k < 6; ++k)
        for (int dd = 0; dd < 2; ++dd) g.grad[dd][k] = d[0][k] * inv[0][dd] + d[1][k] * inv[1][dd];
    return g;
}

/// Element stiffness for dof order (u1, u2) per node: 12 x 12.
inline Eigen::Matrix<double, 12, 12> element_stiffness(const Mesh& m, size_t e, double lambda, double mu) {
    Eigen::Matrix<double, 12, 12> K = Eigen::Matrix<double, 12, 12>::Zero();
    for (const auto& q : triangle_rule()) {
        const ElementGeometry g = element_geometry(m, e, q.xi, q.eta);
        // B maps dofs to (e11, e22, 2 e12).
        Eigen::Matrix<double, 3, 12> B = Eigen::Matrix<double, 3, 12>::Zero();
        for (int k = 0; k < 6; ++k) {
            B(0, 2 * k) = g.grad[0][k];
            B(1, 2 * k + 1) = g.grad[1][k];
            B(2, 2 * k) = g.grad[1][k];
            B(2, 2 * k + 1) = g.grad[0][k];
        }
        Eigen::Matrix3d D;
        D << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
        K.noalias() += (q.w * g.detJ) * B.transpose() * D * B;
    }
    return K;
}

enum class AssemblyMode { sequential, parallel };

using SparseMatrix = Eigen::SparseMatrix<double>;

namespace detail {

inline void element_triplets(const Mesh& m, const Material& mat, size_t begin, size_t end, std::vector<Eigen::Triplet<double>>& out) {
    out.reserve(out.size() + (end - begin) * 144);
    for (size_t e = begin; e < end; ++e) {
        const auto K = element_stiffness(m, e, mat.lam(m.region[e]), mat.shear(m.region[e]));
        const auto& t = m.tris[e];
        for (int a = 0; a < 12; ++a)
            for (int b = 0; b < 12; ++b) out.emplace_back(2 * t[a / 2] + a % 2, 2 * t[b / 2] + b % 2, K(a, b));
    }
}

} // namespace detail

/// Global stiffness. The parallel mode splits elements into contiguous chunks and concatenates
/// the chunk triplets in order, so both modes produce the same matrix bit for bit.
inline SparseMatrix assemble(const Mesh& m, const Material& mat, AssemblyMode mode = AssemblyMode::sequential, unsigned threads = 0) {
    mat.validate();
    const size_t ne = m.tris.size();
    std::vector<Eigen::Triplet<double>> trip;
    if (mode == AssemblyMode::sequential) {
        detail::element_triplets(m, mat, 0, ne, trip);
    } else {
        if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::vector<Eigen::Triplet<double>>> parts(threads);
        std::vector<std::thread> pool;
        for (unsigned c = 0; c < threads; ++c)
            pool.emplace_back([&, c] { detail::element_triplets(m, mat, ne * c / threads, ne * (c + 1) / threads, parts[c]); });
        for (auto& t : pool) t.join();
        for (auto& p : parts) trip.insert(trip.end(), p.begin(), p.end());
    }
    const Eigen::Index n = static_cast<Eigen::Index>(2 * m.nodes.size());
    SparseMatrix K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

} // namespace narrowgap::fem
