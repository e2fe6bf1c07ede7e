#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "narrowgap/fem/assembly.hpp"

namespace narrowgap::fem {

/// grad[i][j] = d u_i / d x_j.
using Gradient = std::array<std::array<double, 2>, 2>;

inline double frobenius(const Gradient& g) { return std::sqrt(g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]); }

/// Point location on a curved P2 mesh: bucket grid over element bounding boxes, then a Newton
/// inversion of the element map. Among elements containing the point the lowest index wins.
class Locator {
public:
    struct Hit {
        size_t element;
        double xi, eta;
    };

    explicit Locator(const Mesh& m) : m_(m) {
        lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        hi_ = {-lo_[0], -lo_[1]};
        boxes_.resize(m.tris.size());
        for (size_t e = 0; e < m.tris.size(); ++e) {
            const auto& t = m.tris[e];
            Box b{m.nodes[t[0]], m.nodes[t[0]]};
            auto grow = [&](const Point& p) {
                for (int d = 0; d < 2; ++d) {
                    b.lo[d] = std::min(b.lo[d], p[d]);
                    b.hi[d] = std::max(b.hi[d], p[d]);
                }
            };
            for (int k = 0; k < 6; ++k) grow(m.nodes[t[k]]);
            // Bezier control points of the curved edges bound the edge.
            for (int k = 0; k < 3; ++k) {
                const Point &a = m.nodes[t[k]], &b2 = m.nodes[t[(k + 1) % 3]], &c = m.nodes[t[3 + k]];
                grow({2 * c[0] - 0.5 * (a[0] + b2[0]), 2 * c[1] - 0.5 * (a[1] + b2[1])});
            }
            const double pad = 1e-12 * (1 + std::max(std::fabs(b.hi[0]), std::fabs(b.hi[1])));
            for (int d = 0; d < 2; ++d) {
                b.lo[d] -= pad;
                b.hi[d] += pad;
                lo_[d] = std::min(lo_[d], b.lo[d]);
                hi_[d] = std::max(hi_[d], b.hi[d]);
            }
            boxes_[e] = b;
        }
        n_ = std::max<size_t>(1, static_cast<size_t>(std::sqrt(static_cast<double>(m.tris.size()))));
        buckets_.assign(n_ * n_, {});
        for (size_t e = 0; e < m.tris.size(); ++e) {
            const auto [i0, j0] = cell(boxes_[e].lo);
            const auto [i1, j1] = cell(boxes_[e].hi);
            for (size_t i = i0; i <= i1; ++i)
                for (size_t j = j0; j <= j1; ++j) buckets_[i * n_ + j].push_back(e);
        }
    }

    std::optional<Hit> find(const Point& p) const {
        if (p[0] < lo_[0] || p[0] > hi_[0] || p[1] < lo_[1] || p[1] > hi_[1]) return std::nullopt;
        const auto [i, j] = cell(p);
        std::optional<Hit> best;
        double best_miss = boundary_slack;
        for (size_t e : buckets_[i * n_ + j]) { // ascending element index
            const Box& b = boxes_[e];
            const double pad = 1e-3 * std::max(b.hi[0] - b.lo[0], b.hi[1] - b.lo[1]);
            if (p[0] < b.lo[0] - pad || p[0] > b.hi[0] + pad || p[1] < b.lo[1] - pad || p[1] > b.hi[1] + pad) continue;
            double miss = 0;
            auto h = invert(e, p, miss);
            if (!h) continue;
            if (miss <= 1e-10) return h;
            if (miss < best_miss) {
                best_miss = miss;
                best = h;
            }
        }
        return best;
    }

    /// Points outside every element by less than this (in reference coordinates) still count:
    /// the curved boundary edges sit within that distance of the true circles.
    static constexpr double boundary_slack = 1e-2;

    Hit locate(const Point& p) const {
        if (auto h = find(p)) return *h;
        throw DomainError("point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ") lies outside the mesh");
    }

private:
    struct Box {
        Point lo, hi;
    };

    std::pair<size_t, size_t> cell(const Point& p) const {
        auto idx = [&](int d) {
            const double s = (p[d] - lo_[d]) / (hi_[d] - lo_[d]) * static_cast<double>(n_);
            return std::min(n_ - 1, static_cast<size_t>(std::max(0.0, s)));
        };
        return {idx(0), idx(1)};
    }

    std::optional<Hit> invert(size_t e, const Point& p, double& miss) const {
        const auto& t = m_.tris[e];
        double xi = 1.0 / 3, eta = 1.0 / 3;
        const double scale = std::sqrt(std::fabs(m_.area(e)));
        for (int it = 0; it < 40; ++it) {
            const auto N = P2::N(xi, eta);
            const auto d = P2::dN(xi, eta);
            double x = 0, y = 0, J[2][2] = {{0, 0}, {0, 0}};
            for (int k = 0; k < 6; ++k) {
                const Point& q = m_.nodes[t[k]];
                x += N[k] * q[0];
                y += N[k] * q[1];
                for (int i = 0; i < 2; ++i) {
                    J[i][0] += q[i] * d[0][k];
                    J[i][1] += q[i] * d[1][k];
                }
            }
            const double rx = p[0] - x, ry = p[1] - y;
            const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
            if (det == 0) return std::nullopt;
            const double dxi = (J[1][1] * rx - J[0][1] * ry) / det, deta = (-J[1][0] * rx + J[0][0] * ry) / det;
            xi += dxi;
            eta += deta;
            if (std::fabs(xi) > 10 || std::fabs(eta) > 10) return std::nullopt;
            if (std::hypot(rx, ry) <= 1e-13 * scale && std::fabs(dxi) + std::fabs(deta) < 1e-12) break;
        }
        miss = std::max({0.0, -xi, -eta, xi + eta - 1});
        return Hit{e, xi, eta};
    }

    const Mesh& m_;
    std::vector<Box> boxes_;
    std::vector<std::vector<size_t>> buckets_;
    Point lo_, hi_;
    size_t n_ = 1;
};

/// Quadratic displacement field: coefficients (u1, u2) per node.
class DisplacementField {
public:
    DisplacementField() = default;
    DisplacementField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd u) : mesh_(std::move(mesh)), u_(std::move(u)) {
        if (u_.size() != static_cast<Eigen::Index>(2 * mesh_->nodes.size())) throw DimensionMismatch("field size does not match the mesh");
    }

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const Eigen::VectorXd& coefficients() const { return u_; }
    Point node_value(size_t n) const { return {u_[static_cast<Eigen::Index>(2 * n)], u_[static_cast<Eigen::Index>(2 * n + 1)]}; }

    Point value(const Point& p) const { return value_at(locator().locate(p)); }
    Gradient gradient(const Point& p) const { return gradient_at(locator().locate(p)); }

    Point value_at(const Locator::Hit& h) const {
        const auto N = P2::N(h.xi, h.eta);
        const auto& t = mesh_->tris[h.element];
        Point v{0, 0};
        for (int k = 0; k < 6; ++k) {
            v[0] += N[k] * u_[2 * t[k]];
            v[1] += N[k] * u_[2 * t[k] + 1];
        }
        return v;
    }

    Gradient gradient_at(const Locator::Hit& h) const {
        const ElementGeometry g = element_geometry(*mesh_, h.element, h.xi, h.eta);
        const auto& t = mesh_->tris[h.element];
        Gradient G{};
        for (int k = 0; k < 6; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) G[i][j] += u_[2 * t[k] + i] * g.grad[j][k];
        return G;
    }

    const Locator& locator() const {
        if (!loc_) loc_ = std::make_shared<Locator>(*mesh_);
        return *loc_;
    }

    /// Reference coordinates of each node in its lowest-index element.
    std::vector<Locator::Hit> node_owners() const {
        const Mesh& m = *mesh_;
        std::vector<Locator::Hit> own(m.nodes.size(), {std::numeric_limits<size_t>::max(), 0, 0});
        static const double ref[6][2] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
        for (size_t e = m.tris.size(); e-- > 0;)
            for (int k = 0; k < 6; ++k) own[static_cast<size_t>(m.tris[e][k])] = {e, ref[k][0], ref[k][1]};
        return own;
    }

    /// CSV with columns x,y,u1,u2,g11,g12,g21,g22 at every node.
    void write_csv(std::ostream& os) const {
        os << "x,y,u1,u2,g11,g12,g21,g22\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
        const auto own = node_owners();
        for (size_t n = 0; n < mesh_->nodes.size(); ++n) {
            if (own[n].element == std::numeric_limits<size_t>::max()) continue;
            const Gradient g = gradient_at(own[n]);
            os << mesh_->nodes[n][0] << ',' << mesh_->nodes[n][1] << ',' << u_[static_cast<Eigen::Index>(2 * n)] << ','
               << u_[static_cast<Eigen::Index>(2 * n + 1)] << ',' << g[0][0] << ',' << g[0][1] << ',' << g[1][0] << ',' << g[1][1] << '\n';
        }
    }

    void write_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw IoError("cannot open " + path + " for writing");
        write_csv(f);
    }

    DisplacementField operator+(const DisplacementField& o) const {
        if (o.mesh_ != mesh_) throw DimensionMismatch("fields live on different meshes");
        return {mesh_, u_ + o.u_};
    }

    DisplacementField scaled(double s) const { return {mesh_, s * u_}; }

private:
    std::shared_ptr<const Mesh> mesh_;
    Eigen::VectorXd u_;
    mutable std::shared_ptr<Locator> loc_;
};

} // namespace narrowgap::fem
