#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "narrowgap/fem/geometry.hpp"

namespace narrowgap::fem {

enum class Region : int { neck = 0, bulk = 1, incl1 = 2, incl2 = 3 };
enum class BoundaryTag : int { outer = 0, incl1 = 1, incl2 = 2 };

inline const char* tag_name(BoundaryTag t) {
    switch (t) {
    case BoundaryTag::outer: return "outer";
    case BoundaryTag::incl1: return "incl1";
    default: return "incl2";
    }
}

struct MeshParams {
    /// Element layers across the gap (even).
    int nz = 8;
    /// Cell size in t where x = sqrt(eps) sinh(t); tangential spacing is about grading * sqrt(delta(x)).
    double grading = 0.15;
    /// Also mesh the inclusion interiors (for the finite-contrast cross-check).
    bool fill_inclusions = false;
};

/// Quadratic (6-node) edge: vertices a, b and the midside node.
struct BoundaryEdge {
    int a = 0, b = 0, mid = 0;
    BoundaryTag tag = BoundaryTag::outer;
};

/// Conforming mesh of 6-node triangles (v0, v1, v2, m01, m12, m20), counterclockwise.
struct Mesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 6>> tris;
    std::vector<Region> region;
    std::vector<BoundaryEdge> boundary;
    Geometry geom;
    MeshParams params;

    size_t node_count() const { return nodes.size(); }
    size_t element_count() const { return tris.size(); }

    /// Every node (vertex and midside) on boundary edges with the given tag, sorted.
    std::vector<int> boundary_nodes(BoundaryTag tag) const {
        std::vector<int> out;
        for (const auto& e : boundary)
            if (e.tag == tag) out.insert(out.end(), {e.a, e.b, e.mid});
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    size_t count_region(Region r) const { return static_cast<size_t>(std::count(region.begin(), region.end(), r)); }

    double area(size_t e) const {
        const auto& t = tris[e];
        const Point &a = nodes[t[0]], &b = nodes[t[1]], &c = nodes[t[2]];
        return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
    }

    /// 4 sqrt(3) area / sum of squared edge lengths of the vertex triangle; 1 for equilateral.
    double quality(size_t e) const {
        const auto& t = tris[e];
        double s = 0;
        for (int k = 0; k < 3; ++k) {
            const Point &p = nodes[t[k]], &q = nodes[t[(k + 1) % 3]];
            s += (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]);
        }
        return 4 * std::sqrt(3.0) * area(e) / s;
    }

    double min_quality() const {
        double q = std::numeric_limits<double>::infinity();
        for (size_t e = 0; e < tris.size(); ++e) q = std::min(q, quality(e));
        return q;
    }

    /// Element layers crossed by the segment x = x0 inside the gap, counted by sampling the
    /// vertical line at the barycenters of the neck elements whose x-range contains x0.
    int layers_at(double x0) const {
        std::vector<double> ys;
        for (size_t e = 0; e < tris.size(); ++e) {
            if (region[e] != Region::neck) continue;
            const auto& t = tris[e];
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int k = 0; k < 3; ++k) {
                lo = std::min(lo, nodes[t[k]][0]);
                hi = std::max(hi, nodes[t[k]][0]);
            }
            if (x0 < lo || x0 > hi) continue;
            for (int k = 0; k < 3; ++k)
                if (nodes[t[k]][0] == x0) ys.push_back(nodes[t[k]][1]);
        }
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        return ys.empty() ? 0 : static_cast<int>(ys.size()) - 1;
    }
};

namespace detail {

inline double frac(int m, int n) { return static_cast<double>(m) / static_cast<double>(n); }

/// Collects vertices (deduplicated by exact coordinates) and quadratic triangles
/// (midside nodes deduplicated by edge).
class MeshBuilder {
public:
    explicit MeshBuilder(Mesh& m) : m_(m) {}

    int vertex(Point p) {
        if (p[0] == 0.0) p[0] = 0.0; // -0.0 and 0.0 are one vertex
        if (p[1] == 0.0) p[1] = 0.0;
        auto [it, fresh] = vertices_.try_emplace({p[0], p[1]}, static_cast<int>(m_.nodes.size()));
        if (fresh) m_.nodes.push_back(p);
        return it->second;
    }

    /// Adds triangle (a, b, c) with edge midpoints m_ab, m_bc, m_ca (used only for new edges).
    void tri(int a, int b, int c, Point mab, Point mbc, Point mca, Region r) {
        const Point &A = m_.nodes[a], &B = m_.nodes[b], &C = m_.nodes[c];
        const double det = (B[0] - A[0]) * (C[1] - A[1]) - (C[0] - A[0]) * (B[1] - A[1]);
        if (det == 0) throw DomainError("degenerate triangle while meshing");
        if (det < 0) {
            std::swap(b, c);
            std::swap(mab, mca);
        }
        m_.tris.push_back({a, b, c, mid(a, b, mab), mid(b, c, mbc), mid(c, a, mca)});
        m_.region.push_back(r);
    }

private:
    int mid(int a, int b, const Point& p) {
        auto key = std::minmax(a, b);
        auto [it, fresh] = edges_.try_emplace({key.first, key.second}, static_cast<int>(m_.nodes.size()));
        if (fresh) m_.nodes.push_back(p);
        return it->second;
    }

    Mesh& m_;
    std::map<std::pair<double, double>, int> vertices_;
    std::map<std::pair<int, int>, int> edges_;
};

using ParamMap = std::function<Point(double, double)>;

inline Point midpoint_of(const ParamMap& f, const Point& p, const Point& q) { return f(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])); }

/// Adds a triangle whose vertices carry parameters in a block map; midside nodes follow the map.
inline void mapped_tri(MeshBuilder& b, const ParamMap& f, std::array<int, 3> v, std::array<Point, 3> par, Region r) {
    b.tri(v[0], v[1], v[2], midpoint_of(f, par[0], par[1]), midpoint_of(f, par[1], par[2]), midpoint_of(f, par[2], par[0]), r);
}

inline double dist2(const Point& p, const Point& q) { return (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]); }

/// Splits quad (a, b, c, d) (in cyclic order) along its shorter diagonal.
inline void mapped_quad(MeshBuilder& b, const Mesh& m, const ParamMap& f, std::array<int, 4> v, std::array<Point, 4> par, Region r) {
    if (dist2(m.nodes[v[0]], m.nodes[v[2]]) <= dist2(m.nodes[v[1]], m.nodes[v[3]])) {
        mapped_tri(b, f, {v[0], v[1], v[2]}, {par[0], par[1], par[2]}, r);
        mapped_tri(b, f, {v[0], v[2], v[3]}, {par[0], par[2], par[3]}, r);
    } else {
        mapped_tri(b, f, {v[0], v[1], v[3]}, {par[0], par[1], par[3]}, r);
        mapped_tri(b, f, {v[1], v[2], v[3]}, {par[1], par[2], par[3]}, r);
    }
}

/// Tangential node positions of the neck: x = sqrt(eps) sinh(t), t uniform, symmetric, endpoints +-R exactly.
inline std::vector<double> neck_columns(const Geometry& g, double grading, double& tmax, int& half) {
    const double se = std::sqrt(g.eps);
    tmax = std::asinh(g.neck_half_width / se);
    half = std::max(2, static_cast<int>(std::ceil(tmax / grading)));
    std::vector<double> x(static_cast<size_t>(2 * half + 1));
    for (int i = 0; i <= half; ++i) {
        const double v = i == half ? g.neck_half_width : se * std::sinh(tmax * frac(i, half));
        x[static_cast<size_t>(half + i)] = v;
        x[static_cast<size_t>(half - i)] = -v;
    }
    return x;
}

/// One quarter of the bulk: the region between inclusion `which` and the outer circle on the
/// side x >= 0, bounded below (in the reflected frame) by the midline outside the neck.
/// Coordinates are produced for the upper inclusion and reflected by (sx, sy).
struct SectorGrid {
    int na = 0, nr = 0, nbot = 0;
    ParamMap map;
    std::vector<Point> pts; // (na+1) x (nr+1), index i*(nr+1)+k
    const Point& at(int i, int k) const { return pts[static_cast<size_t>(i * (nr + 1) + k)]; }
};

inline SectorGrid sector(const Geometry& g, int which, int na, int nr, int nbot, double sx, double sy) {
    const double rho = g.radius(which);
    const double c = rho + g.eps / 2;
    const double Rn = g.neck_half_width, R0 = g.R0;
    const double yn = which == 1 ? g.top(Rn) : -g.bottom(Rn);
    const double thN = std::atan2(yn - c, Rn);
    const double xib = frac(nbot, na);
    SectorGrid s;
    s.na = na;
    s.nr = nr;
    s.nbot = nbot;
    s.map = [=](double xi, double eta) {
        const double th = thN + xi * (std::numbers::pi / 2 - thN);
        const Point in{rho * std::cos(th), c + rho * std::sin(th)};
        Point out;
        if (xi <= xib) {
            out = {Rn + (R0 - Rn) * (xi / xib), 0.0};
        } else {
            const double ph = (xi - xib) / (1 - xib) * std::numbers::pi / 2;
            out = {R0 * std::cos(ph), R0 * std::sin(ph)};
        }
        return Point{sx * ((1 - eta) * in[0] + eta * out[0]), sy * ((1 - eta) * in[1] + eta * out[1])};
    };
    s.pts.resize(static_cast<size_t>((na + 1) * (nr + 1)));
    for (int i = 0; i <= na; ++i) {
        for (int k = 0; k <= nr; ++k) {
            Point p = s.map(frac(i, na), frac(k, nr));
            // Exact coordinates on the sides shared with other blocks.
            if (i == 0) p = {sx * Rn, sy * (yn * frac(nr - k, nr))};
            if (i == na) p[0] = 0.0;
            if (k == nr && i <= nbot) p = {sx * (i == 0 ? Rn : Rn + (R0 - Rn) * frac(i, nbot)), 0.0};
            s.pts[static_cast<size_t>(i * (nr + 1) + k)] = p;
        }
    }
    return s;
}

/// Fills inclusion `which` with rings through its boundary vertices and a center fan.
inline void fill_inclusion(MeshBuilder& b, Mesh& m, const std::vector<int>& ring_vertices, int which, int rings) {
    const Point c = m.geom.center(which);
    const double rho = m.geom.radius(which);
    std::vector<std::pair<double, int>> by_angle;
    for (int v : ring_vertices) by_angle.push_back({std::atan2(m.nodes[v][1] - c[1], m.nodes[v][0] - c[0]), v});
    std::sort(by_angle.begin(), by_angle.end());
    const int n = static_cast<int>(by_angle.size());
    std::vector<double> th(static_cast<size_t>(n + 1));
    for (int k = 0; k < n; ++k) th[static_cast<size_t>(k)] = by_angle[static_cast<size_t>(k)].first;
    th[static_cast<size_t>(n)] = th[0] + 2 * std::numbers::pi;
    const Region reg = which == 1 ? Region::incl1 : Region::incl2;
    const ParamMap f = [=](double r, double t) { return Point{c[0] + r * rho * std::cos(t), c[1] + r * rho * std::sin(t)}; };
    // ids[j][k]: ring j (1..rings, rings = boundary), angle index k.
    std::vector<std::vector<int>> ids(static_cast<size_t>(rings + 1), std::vector<int>(static_cast<size_t>(n)));
    for (int k = 0; k < n; ++k) ids[static_cast<size_t>(rings)][static_cast<size_t>(k)] = by_angle[static_cast<size_t>(k)].second;
    for (int j = 1; j < rings; ++j)
        for (int k = 0; k < n; ++k) ids[static_cast<size_t>(j)][static_cast<size_t>(k)] = b.vertex(f(frac(j, rings), th[static_cast<size_t>(k)]));
    const int center = b.vertex(c);
    for (int k = 0; k < n; ++k) {
        const int k1 = (k + 1) % n;
        const double t0 = th[static_cast<size_t>(k)], t1 = th[static_cast<size_t>(k + 1)];
        mapped_tri(b, f, {center, ids[1][static_cast<size_t>(k)], ids[1][static_cast<size_t>(k1)]},
                   {Point{0, 0.5 * (t0 + t1)}, Point{frac(1, rings), t0}, Point{frac(1, rings), t1}}, reg);
        for (int j = 1; j < rings; ++j) {
            const double r0 = frac(j, rings), r1 = frac(j + 1, rings);
            mapped_quad(b, m, f,
                        {ids[static_cast<size_t>(j)][static_cast<size_t>(k)], ids[static_cast<size_t>(j + 1)][static_cast<size_t>(k)],
                         ids[static_cast<size_t>(j + 1)][static_cast<size_t>(k1)], ids[static_cast<size_t>(j)][static_cast<size_t>(k1)]},
                        {Point{r0, t0}, Point{r1, t0}, Point{r1, t1}, Point{r0, t1}}, reg);
        }
    }
}

inline void tag_boundary(Mesh& m) {
    std::map<std::pair<int, int>, std::pair<int, int>> count; // edge -> (uses, midside)
    for (const auto& t : m.tris)
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(t[k], t[(k + 1) % 3]);
            auto& e = count[{key.first, key.second}];
            ++e.first;
            e.second = t[3 + k];
        }
    m.boundary.clear();
    const Geometry& g = m.geom;
    for (const auto& [key, e] : count) {
        if (e.first != 1) continue;
        const Point& p = m.nodes[e.second];
        const double r = std::hypot(p[0], p[1]);
        const double d0 = std::fabs(r - g.R0);
        const Point c1 = g.center(1), c2 = g.center(2);
        const double d1 = std::fabs(std::hypot(p[0] - c1[0], p[1] - c1[1]) - g.rho1);
        const double d2 = std::fabs(std::hypot(p[0] - c2[0], p[1] - c2[1]) - g.rho2);
        BoundaryTag tag = BoundaryTag::outer;
        if (d1 < d0 && d1 <= d2) tag = BoundaryTag::incl1;
        if (d2 < d0 && d2 < d1) tag = BoundaryTag::incl2;
        m.boundary.push_back({key.first, key.second, e.second, tag});
    }
}

} // namespace detail

/// Structured neck band (sinh-graded columns, uniform layers between the arcs) joined to four
/// blended bulk sectors around the inclusions. The last neck column on each side is split
/// 1:2 so that the bulk carries nz radial cells.
inline Mesh generate_mesh(const Geometry& g, const MeshParams& p = {}) {
    g.validate();
    if (p.nz < 2 || p.nz % 2 != 0) throw InvalidArgument("mesh.nz must be an even integer >= 2");
    if (!(p.grading > 0 && p.grading <= 1)) throw InvalidArgument("mesh.grading must lie in (0, 1]");
    if (g.eps / p.nz < 1e-9 * g.R0)
        throw DomainError("eps = " + std::to_string(g.eps) + " is below the resolvable layer height for nz = " + std::to_string(p.nz) +
                          "; use a larger eps or fewer layers (need eps/nz >= 1e-9 R0)");

    Mesh m;
    m.geom = g;
    m.params = p;
    detail::MeshBuilder b(m);
    const int nh = p.nz / 2;
    double tmax = 0;
    int half = 0;
    const std::vector<double> xs = detail::neck_columns(g, p.grading, tmax, half);
    const int ncol = 2 * half;
    const double se = std::sqrt(g.eps);

    // Neck parameters: (t, s) with x = sqrt(eps) sinh(t), y = s * top(x) (s >= 0) or -s * bottom(x).
    const detail::ParamMap neck = [&](double t, double s) {
        const double x = se * std::sinh(t);
        return Point{x, s >= 0 ? s * g.top(x) : -s * g.bottom(x)};
    };
    auto ycoord = [&](size_t i, int j2) { // j2 in half-layer units, -2nh..2nh
        const double x = xs[i];
        return j2 >= 0 ? g.top(x) * detail::frac(j2, 2 * nh) : g.bottom(x) * detail::frac(-j2, 2 * nh);
    };
    auto tpar = [&](size_t i) { return tmax * detail::frac(static_cast<int>(i) - half, half); };
    std::vector<std::vector<int>> nv(xs.size(), std::vector<int>(static_cast<size_t>(4 * nh + 1), -1));
    auto nvert = [&](size_t i, int j2) {
        int& id = nv[i][static_cast<size_t>(j2 + 2 * nh)];
        if (id < 0) id = b.vertex({xs[i], ycoord(i, j2)});
        return id;
    };
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const bool left_end = i == 0, right_end = i + 1 == static_cast<size_t>(ncol);
        for (int j = -nh; j < nh; ++j) {
            const int j0 = 2 * j, j1 = 2 * j + 2;
            const Point pa{tpar(i), detail::frac(j0, 2 * nh)}, pb{tpar(i + 1), detail::frac(j0, 2 * nh)};
            const Point pc{tpar(i + 1), detail::frac(j1, 2 * nh)}, pd{tpar(i), detail::frac(j1, 2 * nh)};
            const int a = nvert(i, j0), bb = nvert(i + 1, j0), c = nvert(i + 1, j1), d = nvert(i, j1);
            if (right_end) {
                const int r = nvert(i + 1, j0 + 1);
                const Point pr{tpar(i + 1), detail::frac(j0 + 1, 2 * nh)};
                detail::mapped_tri(b, neck, {a, bb, r}, {pa, pb, pr}, Region::neck);
                detail::mapped_tri(b, neck, {a, r, d}, {pa, pr, pd}, Region::neck);
                detail::mapped_tri(b, neck, {r, c, d}, {pr, pc, pd}, Region::neck);
            } else if (left_end) {
                const int r = nvert(i, j0 + 1);
                const Point pr{tpar(i), detail::frac(j0 + 1, 2 * nh)};
                detail::mapped_tri(b, neck, {bb, r, a}, {pb, pr, pa}, Region::neck);
                detail::mapped_tri(b, neck, {bb, c, r}, {pb, pc, pr}, Region::neck);
                detail::mapped_tri(b, neck, {r, c, d}, {pr, pc, pd}, Region::neck);
            } else {
                detail::mapped_quad(b, m, neck, {a, bb, c, d}, {pa, pb, pc, pd}, Region::neck);
            }
        }
    }

    // Bulk sectors: angular cells from the last neck cell width, radial cells = nz.
    const double h_end = g.neck_half_width - xs[static_cast<size_t>(ncol - 1)];
    double arc = 0;
    for (int which : {1, 2}) {
        const double rho = g.radius(which), c = rho + g.eps / 2;
        const double yn = which == 1 ? g.top(g.neck_half_width) : -g.bottom(g.neck_half_width);
        arc = std::max(arc, rho * (std::numbers::pi / 2 - std::atan2(yn - c, g.neck_half_width)));
    }
    const int na = std::max(4, static_cast<int>(std::ceil(arc / h_end)));
    const double lbot = g.R0 - g.neck_half_width, larc = std::numbers::pi / 2 * g.R0;
    const int nbot = std::clamp(static_cast<int>(std::lround(na * lbot / (lbot + larc))), 1, na - 1);
    const int nr = p.nz;
    for (int which : {1, 2})
        for (double sx : {1.0, -1.0}) {
            const double sy = which == 1 ? 1.0 : -1.0;
            const detail::SectorGrid s = detail::sector(g, which, na, nr, nbot, sx, sy);
            std::vector<int> ids(s.pts.size());
            for (size_t q = 0; q < s.pts.size(); ++q) ids[q] = b.vertex(s.pts[q]);
            auto id = [&](int i, int k) { return ids[static_cast<size_t>(i * (nr + 1) + k)]; };
            for (int i = 0; i < na; ++i)
                for (int k = 0; k < nr; ++k) {
                    const double x0 = detail::frac(i, na), x1 = detail::frac(i + 1, na);
                    const double e0 = detail::frac(k, nr), e1 = detail::frac(k + 1, nr);
                    detail::mapped_quad(b, m, s.map, {id(i, k), id(i + 1, k), id(i + 1, k + 1), id(i, k + 1)},
                                        {Point{x0, e0}, Point{x1, e0}, Point{x1, e1}, Point{x0, e1}}, Region::bulk);
                }
        }

    detail::tag_boundary(m);
    if (p.fill_inclusions) {
        for (int which : {1, 2}) {
            const BoundaryTag tag = which == 1 ? BoundaryTag::incl1 : BoundaryTag::incl2;
            std::vector<int> ring;
            for (const auto& e : m.boundary)
                if (e.tag == tag) ring.insert(ring.end(), {e.a, e.b});
            std::sort(ring.begin(), ring.end());
            ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
            detail::fill_inclusion(b, m, ring, which, nr);
        }
        detail::tag_boundary(m);
    }
    for (size_t e = 0; e < m.tris.size(); ++e)
        if (!(m.area(e) > 0)) throw DomainError("mesh generation produced a non-positive element");
    return m;
}

/// ASCII format: "nodes elements" header, then "id x y" lines, then "id n1 .. n6 tag" lines (0-based ids).
inline void write_mesh(const Mesh& m, std::ostream& os) {
    os << m.nodes.size() << ' ' << m.tris.size() << '\n';
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (size_t i = 0; i < m.nodes.size(); ++i) os << i << ' ' << m.nodes[i][0] << ' ' << m.nodes[i][1] << '\n';
    for (size_t e = 0; e < m.tris.size(); ++e) {
        os << e;
        for (int v : m.tris[e]) os << ' ' << v;
        os << ' ' << static_cast<int>(m.region[e]) << '\n';
    }
}

inline void write_mesh(const Mesh& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_mesh(m, f);
    if (!f) throw IoError("write failed: " + path);
}

/// Reads the ASCII format back; boundary edges are re-tagged against the given geometry.
inline Mesh read_mesh(std::istream& is, const Geometry& g) {
    Mesh m;
    m.geom = g;
    size_t nn = 0, ne = 0;
    if (!(is >> nn >> ne)) throw IoError("mesh header must be '<nodes> <elements>'");
    m.nodes.resize(nn);
    for (size_t i = 0; i < nn; ++i) {
        size_t id = 0;
        if (!(is >> id >> m.nodes[i][0] >> m.nodes[i][1]) || id != i) throw IoError("bad node line " + std::to_string(i));
    }
    m.tris.resize(ne);
    m.region.resize(ne);
    for (size_t e = 0; e < ne; ++e) {
        size_t id = 0;
        int tag = 0;
        if (!(is >> id) || id != e) throw IoError("bad element line " + std::to_string(e));
        for (int& v : m.tris[e])
            if (!(is >> v) || v < 0 || static_cast<size_t>(v) >= nn) throw IoError("bad node index in element " + std::to_string(e));
        if (!(is >> tag) || tag < 0 || tag > 3) throw IoError("bad region tag in element " + std::to_string(e));
        m.region[e] = static_cast<Region>(tag);
    }
    detail::tag_boundary(m);
    return m;
}

inline Mesh read_mesh(const std::string& path, const Geometry& g) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return read_mesh(f, g);
}

} // namespace narrowgap::fem
