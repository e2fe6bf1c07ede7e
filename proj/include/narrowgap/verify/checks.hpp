#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "narrowgap/aux/recursion.hpp"

namespace narrowgap {

/// Outcome of one symbolic or numeric check. A failing report always names a witness.
struct CheckReport {
    std::string name;
    bool pass = true;
    std::string witness;
    int dim = 0;
    int alpha = 0;
    int depth = 0;
    int level = 0;
    nlohmann::json details = nlohmann::json::object();

    void fail(int lev, std::string w) {
        if (!pass) return;
        pass = false;
        level = lev;
        witness = std::move(w);
    }

    nlohmann::json to_json() const {
        return {{"check", name},   {"status", pass ? "pass" : "fail"}, {"witness", witness}, {"dim", dim},
                {"alpha", alpha}, {"depth", depth},                   {"level", level},     {"details", details}};
    }
};

namespace detail {

inline CheckReport start_report(const char* name, const AuxFamily& fam) {
    CheckReport r;
    r.name = name;
    r.dim = fam.dim;
    r.alpha = fam.alpha;
    r.depth = fam.depth();
    return r;
}

inline std::string where(int l, int comp, const char* what) {
    return "level " + std::to_string(l) + " component " + std::to_string(comp + 1) + " " + what + ": ";
}

/// First term of the canonical numerator, enough to locate a nonzero difference.
inline std::string witness_term(const NeckScalar& diff) {
    const NormalForm nf = diff.canonical();
    if (nf.poly.empty()) return "0";
    std::string s = diff.str();
    if (s.size() > 400) s = s.substr(0, 400) + " ...";
    return s;
}

} // namespace detail

/// Level 1 equals psi_alpha on the top boundary and 0 on the bottom one; higher levels vanish on both.
inline CheckReport check_boundary(const AuxFamily& fam) {
    CheckReport r = detail::start_report("boundary", fam);
    const NeckField psi = rigid_basis(fam.dim, fam.alpha);
    for (int l = 1; l <= fam.depth(); ++l) {
        const NeckField top = fam.level(l).subst_boundary(+1), bot = fam.level(l).subst_boundary(-1);
        for (int i = 0; i < fam.dim; ++i) {
            const NeckScalar want_top = l == 1 ? psi[i].subst_boundary(+1) : NeckScalar(fam.dim);
            const NeckScalar dt = top[i] - want_top;
            if (!is_semantic_zero(dt)) r.fail(l, detail::where(l, i, "at z = +delta/2") + detail::witness_term(dt));
            if (!is_semantic_zero(bot[i])) r.fail(l, detail::where(l, i, "at z = -delta/2") + detail::witness_term(bot[i]));
        }
    }
    return r;
}

/// The second-order identities each level is built from, as exact zeros.
///
/// Level 1 of a rotation is the plain profile times psi_alpha; every other level obeys
/// mu v_zz^(i) + s_i = 0 and (lambda+2mu) v_zz^(d) + f^{l-1,(d)} + (lambda+mu) sum_i v_iz^(i) = 0
/// (tangential-first) or the normal-first counterpart.
inline CheckReport check_cancel_identity(const AuxFamily& fam) {
    CheckReport r = detail::start_report("cancel_identity", fam);
    const int d = fam.dim;
    const RationalCoeff lm = lam() + mu(), l2m = lam() + 2 * mu(), m = mu();
    for (int l = 1; l <= fam.depth(); ++l) {
        const NeckField& v = fam.level(l);
        if (l == 1 && !is_translation(d, fam.alpha)) {
            const NeckField psi = rigid_basis(d, fam.alpha);
            for (int i = 0; i < d; ++i) {
                const NeckScalar e = v[i] - profile(d) * psi[i];
                if (!is_semantic_zero(e)) r.fail(l, detail::where(l, i, "seed") + detail::witness_term(e));
            }
            continue;
        }
        const NeckScalar vd = v.normal();
        NeckScalar coupling(d);
        for (int i = 0; i + 1 < d; ++i) coupling += diff(v[i], tangential_axis(i), Axis::z);
        for (int i = 0; i + 1 < d; ++i) {
            NeckScalar e = diff(v[i], Axis::z, Axis::z).scaled(m) + tangential_source(fam, l, i);
            if (fam.order == Order::normal_first) e += diff(vd, tangential_axis(i), Axis::z).scaled(lm);
            if (!is_semantic_zero(e)) r.fail(l, detail::where(l, i, "identity") + detail::witness_term(e));
        }
        NeckScalar e = diff(vd, Axis::z, Axis::z).scaled(l2m) + normal_source(fam, l);
        if (fam.order == Order::tangential_first) e += coupling.scaled(lm);
        if (!is_semantic_zero(e)) r.fail(l, detail::where(l, d - 1, "identity") + detail::witness_term(e));
    }
    return r;
}

/// Residual structure: after a level solved with the full source, the block solved last keeps
/// only tangential derivatives. Tangential-first: f^{l,(d)} = mu Lap' v^{l,(d)}.
/// Normal-first: f^{l,(i)} = mu Lap' v^{l,(i)} + (lambda+mu) d_i div' v^{l,'}.
inline CheckReport check_residual_structure(const AuxFamily& fam) {
    CheckReport r = detail::start_report("residual_structure", fam);
    const int d = fam.dim;
    const int first = is_translation(d, fam.alpha) ? 1 : 2;
    int checked = 0;
    for (int l = first; l <= fam.depth(); ++l) {
        const NeckField& v = fam.level(l);
        const NeckField& f = residual(fam, l);
        if (fam.order == Order::tangential_first) {
            const NeckScalar e = f.normal() - lap_t(v.normal()).scaled(mu());
            if (!is_semantic_zero(e)) r.fail(l, detail::where(l, d - 1, "structure") + detail::witness_term(e));
        } else {
            for (int i = 0; i + 1 < d; ++i) {
                const NeckScalar e = f[i] - lame_tangential_part(v, i);
                if (!is_semantic_zero(e)) r.fail(l, detail::where(l, i, "structure") + detail::witness_term(e));
            }
        }
        ++checked;
    }
    r.details["levels_checked"] = checked;
    return r;
}

/// neck_order(f^{m,(i)}) >= m - 2 for every component; the sharper per-component
/// targets (tangential m-2, normal m-3/2 in 2D) are reported in details.
inline CheckReport check_residual_order(const AuxFamily& fam, int m) {
    CheckReport r = detail::start_report("residual_order", fam);
    r.level = m;
    const NeckField& f = residual(fam, m);
    nlohmann::json orders = nlohmann::json::array();
    bool refined = true;
    for (int i = 0; i < fam.dim; ++i) {
        if (is_semantic_zero(f[i])) {
            orders.push_back(nullptr);
            continue;
        }
        const mpq_class ord = f[i].neck_order();
        orders.push_back(ord.get_str());
        if (ord < m - 2) r.fail(m, detail::where(m, i, "order") + ord.get_str() + " < " + std::to_string(m - 2));
        if (fam.dim == 2 && i == 1 && ord < mpq_class(2 * m - 3, 2)) refined = false;
    }
    r.details["orders"] = orders;
    if (fam.dim == 2) r.details["normal_meets_m_minus_3_2"] = refined;
    return r;
}

/// z-degree caps per level: (tangential cap, normal cap).
inline std::pair<int, int> z_degree_caps(int dim, int alpha, int l) {
    if (is_tilted_rotation(dim, alpha)) return l == 1 ? std::pair{2, 1} : std::pair{2 * l - 2, 2 * l - 1};
    if (construction_order(dim, alpha) == Order::normal_first) return {2 * l, 2 * l - 1};
    return {2 * l - 1, 2 * l};
}

inline CheckReport check_z_degree(const AuxFamily& fam) {
    CheckReport r = detail::start_report("z_degree", fam);
    nlohmann::json table = nlohmann::json::array();
    for (int l = 1; l <= fam.depth(); ++l) {
        const auto [tcap, ncap] = z_degree_caps(fam.dim, fam.alpha, l);
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < fam.dim; ++i) {
            const int deg = fam.level(l)[i].z_degree();
            const int cap = i == fam.dim - 1 ? ncap : tcap;
            row.push_back(deg);
            if (deg > cap)
                r.fail(l, detail::where(l, i, "z-degree") + std::to_string(deg) + " > " + std::to_string(cap));
        }
        table.push_back(row);
    }
    r.details["degrees"] = table;
    return r;
}

/// Central differences of a compiled scalar against its exact derivative.
///
/// Points are drawn with |x_i| <= 3 sqrt(eps) and |z| <= 0.45 delta; steps are
/// {1e-3, 1e-4, 1e-5} times sqrt(eps) (tangential) or delta (normal). The error at a point
/// is the best over steps, relative to max(|exact|, 1e-3 * sum of |terms|) so that points
/// where the derivative nearly cancels do not divide by zero.
/// fd_compare takes the claimed derivative explicitly; fd_oracle uses diff.
inline CheckReport fd_compare(const NeckScalar& a, const NeckScalar& da, Axis axis, int samples, double eps, double l,
                              double m, unsigned seed = 2024, double tol = 1e-6) {
    using F = long double;
    CheckReport r;
    r.name = "fd_oracle";
    r.dim = a.dim();
    if (!(eps > 0)) throw DomainError("fd_oracle needs eps > 0");
    const auto f = a.compile<F>(l, m);
    const auto g = da.compile<F>(l, m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0;
    const F se = std::sqrt(static_cast<F>(eps));
    for (int s = 0; s < samples; ++s) {
        NeckPoint<F> pt;
        pt.eps = eps;
        pt.x[0] = 3 * se * u(rng);
        pt.x[1] = a.dim() == 3 ? 3 * se * u(rng) : 0;
        const F delta = pt.eps + pt.x[0] * pt.x[0] + pt.x[1] * pt.x[1];
        pt.z = F(0.45) * delta * u(rng);
        const F exact = g(pt);
        const F scale = std::max(std::fabs(exact), F(1e-3) * g.abs_sum(pt));
        double best = std::numeric_limits<double>::infinity();
        for (F step : {F(1e-3), F(1e-4), F(1e-5)}) {
            const F h = step * (axis == Axis::z ? delta : se);
            NeckPoint<F> p = pt, q = pt;
            if (axis == Axis::z) {
                p.z += h;
                q.z -= h;
            } else {
                p.x[axis == Axis::x1 ? 0 : 1] += h;
                q.x[axis == Axis::x1 ? 0 : 1] -= h;
            }
            const F fd = (f(p) - f(q)) / (2 * h);
            const double err = scale > 0 ? static_cast<double>(std::fabs(fd - exact) / scale) : static_cast<double>(std::fabs(fd));
            best = std::min(best, err);
        }
        worst = std::max(worst, best);
        if (best >= tol) {
            std::ostringstream w;
            w << "relative error " << best << " at x=(" << static_cast<double>(pt.x[0]) << ", " << static_cast<double>(pt.x[1])
              << "), z=" << static_cast<double>(pt.z) << ", d/d" << axis_name(axis);
            r.fail(0, w.str());
        }
    }
    r.details = {{"samples", samples}, {"eps", eps}, {"lambda", l}, {"mu", m}, {"seed", seed}, {"max_rel_err", worst}, {"tol", tol}};
    return r;
}

inline CheckReport fd_oracle(const NeckScalar& a, Axis axis, int samples, double eps, double l, double m,
                             unsigned seed = 2024, double tol = 1e-6) {
    return fd_compare(a, a.diff(axis), axis, samples, eps, l, m, seed, tol);
}

/// Least-squares slope of log|value| against log eps.
inline double loglog_slope(const std::vector<double>& eps, const std::vector<double>& vals) {
    const size_t n = eps.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(eps[i]), y = std::log(std::fabs(vals[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Scaling of d_x1^{m-1} d_z of the first level-1 component at (r sqrt(eps), 0, z = 0),
/// evaluated exactly; passes when the log-log slope is -(m+1)/2 within tol.
inline CheckReport lower_bound_probe(const AuxFamily& fam, int m, const mpq_class& r, const std::vector<mpq_class>& eps_grid,
                                     double tol = 0.05) {
    CheckReport rep = detail::start_report("lower_bound_probe", fam);
    rep.level = m;
    if (fam.alpha != 1) throw InvalidArgument("lower_bound_probe needs alpha = 1");
    if (m < 1) throw InvalidArgument("lower_bound_probe needs m >= 1");
    if (eps_grid.size() < 3) throw InvalidArgument("lower_bound_probe needs at least 3 grid points");
    NeckScalar s = fam.level(1)[0].diff(Axis::z);
    for (int k = 1; k < m; ++k) s = s.diff(Axis::x1);
    std::vector<double> xs, ys;
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& e : eps_grid) {
        // Exact point when eps is a rational square, else the double square root.
        const mpz_class num = e.get_num(), den = e.get_den();
        mpq_class x1;
        if (mpz_perfect_square_p(num.get_mpz_t()) && mpz_perfect_square_p(den.get_mpz_t())) {
            mpz_class rn, rd;
            mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
            mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
            x1 = r * mpq_class(rn, rd);
        } else {
            x1 = r * mpq_class(std::sqrt(e.get_d()));
        }
        std::vector<mpq_class> xp{x1};
        if (fam.dim == 3) xp.push_back(0);
        const mpq_class v = s.eval(xp, 0, e, 1, 1);
        if (sgn(v) == 0) rep.fail(1, "probe value vanishes at eps = " + e.get_str());
        xs.push_back(e.get_d());
        ys.push_back(v.get_d());
        vals.push_back(v.get_d());
    }
    if (!rep.pass) return rep;
    const double slope = loglog_slope(xs, ys);
    const double target = -(m + 1) / 2.0;
    rep.details = {{"slope", slope}, {"target", target}, {"r", r.get_str()}, {"values", vals}, {"tol", tol}};
    if (std::fabs(slope - target) > tol) {
        std::ostringstream w;
        w << "slope " << slope << " vs " << target;
        rep.fail(m, w.str());
    }
    return rep;
}

/// Boundary, identity, residual structure, residual order (every m <= depth) and z-degree.
inline std::vector<CheckReport> run_symbolic_suite(const AuxFamily& fam) {
    std::vector<CheckReport> out{check_boundary(fam), check_cancel_identity(fam), check_residual_structure(fam)};
    for (int m = 1; m <= fam.depth(); ++m) out.push_back(check_residual_order(fam, m));
    out.push_back(check_z_degree(fam));
    return out;
}

/// Level-by-level s_equal of two families; the witness names the first differing component.
inline CheckReport check_route_equivalence(const AuxFamily& a, const AuxFamily& b) {
    CheckReport r = detail::start_report("route_equivalence", a);
    if (a.dim != b.dim || a.alpha != b.alpha) throw InvalidArgument("families differ in dim or alpha");
    const int depth = std::min(a.depth(), b.depth());
    r.depth = depth;
    for (int l = 1; l <= depth; ++l)
        for (int i = 0; i < a.dim; ++i) {
            const NeckScalar e = a.level(l)[i] - b.level(l)[i];
            if (!is_semantic_zero(e)) r.fail(l, detail::where(l, i, "routes differ") + detail::witness_term(e));
        }
    return r;
}

} // namespace narrowgap
