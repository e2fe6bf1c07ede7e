#pragma once

#include <future>
#include <numbers>

#include "narrowgap/aux/family.hpp"
#include "narrowgap/experiments/report.hpp"

namespace narrowgap {

namespace detail {

/// Runs f(eps) for every grid point, concurrently unless deterministic; results in grid order.
template <class F>
auto per_eps(const SweepConfig& c, F f) {
    using R = decltype(f(0.0));
    std::vector<R> out;
    if (c.deterministic) {
        for (double e : c.eps) out.push_back(f(e));
        return out;
    }
    std::vector<std::future<R>> fut;
    for (double e : c.eps) fut.push_back(std::async(std::launch::async, f, e));
    for (auto& x : fut) out.push_back(x.get());
    return out;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

/// Two-sided slope criterion |slope - target| <= tol.
inline SeriesRecord slope_series(const std::string& name, const std::vector<double>& eps, const std::vector<double>& v, double target, double tol) {
    SeriesRecord s{name, eps, v, std::nullopt, "slope in [" + fmt(target - tol) + ", " + fmt(target + tol) + "]", false, false};
    s.fit = rate_fit([&] {
        std::vector<std::pair<double, double>> p;
        for (size_t i = 0; i < eps.size(); ++i) p.push_back({eps[i], v[i]});
        return p;
    }());
    s.pass = std::fabs(s.fit->slope - target) <= tol;
    return s;
}

/// One-sided criterion slope >= lo.
inline SeriesRecord min_slope_series(const std::string& name, const std::vector<double>& eps, const std::vector<double>& v, double lo) {
    SeriesRecord s = slope_series(name, eps, v, 0, 0);
    s.criterion = "slope >= " + fmt(lo);
    s.pass = s.fit->slope >= lo;
    return s;
}

inline SeriesRecord info_series(const std::string& name, const std::vector<double>& eps, const std::vector<double>& v, bool fit = true) {
    SeriesRecord s{name, eps, v, std::nullopt, "informational", true, true};
    if (fit && eps.size() >= 4) {
        try {
            s.fit = slope_series(name, eps, v, 0, 0).fit;
        } catch (const Error&) {
        }
    }
    return s;
}

inline StudyReport new_report(const SweepConfig& c, const std::string& id) {
    c.validate();
    StudyReport r;
    r.study = id;
    SweepConfig echo = c;
    echo.study = id;
    r.config = echo.to_json();
    return r;
}

/// Largest singular value of a 2 x 2 matrix.
inline double spectral_norm(const fem::Gradient& g) {
    const double a = g[0][0], b = g[0][1], c = g[1][0], d = g[1][1];
    const double s = a * a + b * b + c * c + d * d, det = a * d - b * c;
    return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4 * det * det))));
}

inline fem::ElasticProblem problem_at(const SweepConfig& c, double e) { return fem::ElasticProblem(fem::make_mesh(c.geometry_at(e), c.mesh_params()), c.material()); }

template <class T>
std::vector<double> column(const std::vector<T>& rows, double T::*m) {
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.*m);
    return out;
}

} // namespace detail

/// Gap-center gradients of u_11, u_12, u_13 and of the hard-inclusion solution.
inline StudyReport run_blowup_study(const SweepConfig& c) {
    StudyReport r = detail::new_report(c, "rates");
    struct Row {
        double g11, g12, g13, full, g13_peak;
    };
    const auto rows = detail::per_eps(c, [&](double e) {
        const fem::ElasticProblem P = detail::problem_at(c, e);
        const fem::Point o{0, 0};
        Row row{};
        row.g11 = fem::frobenius(P.solve_component(1, 1).field.gradient(o));
        row.g12 = fem::frobenius(P.solve_component(1, 2).field.gradient(o));
        const fem::Solution s13 = P.solve_component(1, 3);
        row.g13 = fem::frobenius(s13.field.gradient(o));
        for (double t : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) row.g13_peak = std::max(row.g13_peak, fem::frobenius(s13.field.gradient({t * std::sqrt(e), 0.0})));
        row.full = fem::frobenius(P.solve_hard_inclusion(c.boundary_data()).field.gradient(o));
        return row;
    });
    const double tt = c.tol("translation_slope");
    r.series.push_back(detail::slope_series("grad_u11", c.eps, detail::column(rows, &Row::g11), -1.0, tt));
    r.series.push_back(detail::slope_series("grad_u12", c.eps, detail::column(rows, &Row::g12), -1.0, tt));
    r.series.push_back(detail::slope_series("grad_u13", c.eps, detail::column(rows, &Row::g13), -0.5, c.tol("rotation_slope")));
    r.series.push_back(detail::slope_series("grad_full", c.eps, detail::column(rows, &Row::full), -0.5, c.tol("full_slope")));
    r.series.push_back(detail::info_series("grad_u13_peak_on_midline", c.eps, detail::column(rows, &Row::g13_peak)));
    r.notes.push_back("values are Frobenius norms of the displacement gradient at (0,0); grad_u13_peak_on_midline is the max over x = t sqrt(eps), t in [1/4, 3]");
    return r;
}

/// Rigid parameters of the hard-inclusion solution: C_1 - C_2 and the fitted b*.
inline StudyReport run_constant_study(const SweepConfig& c) {
    StudyReport r = detail::new_report(c, "constants");
    const auto Cs = detail::per_eps(c, [&](double e) { return detail::problem_at(c, e).solve_hard_inclusion(c.boundary_data()).C; });
    const double nz = c.tol("near_zero");
    for (int a : {1, 2}) {
        std::vector<double> eps, d;
        for (size_t k = 0; k < Cs.size(); ++k) {
            const double v = std::fabs(Cs[k](0, a - 1) - Cs[k](1, a - 1));
            if (v < nz) {
                r.notes.push_back("C1^" + std::to_string(a) + " - C2^" + std::to_string(a) + " below near-zero threshold at eps = " + detail::fmt(c.eps[k]) + "; excluded");
                continue;
            }
            eps.push_back(c.eps[k]);
            d.push_back(v);
        }
        const std::string name = "dC" + std::to_string(a);
        if (eps.size() >= 4) r.series.push_back(detail::slope_series(name, eps, d, 0.5, c.tol("constant_slope")));
        else r.series.push_back({name, eps, d, std::nullopt, "needs >= 4 nonzero points", false, false});
        // b*_11 = pi mu (C1^1 - C2^1)/sqrt(eps), b*_12 = pi (lambda + 2 mu)(C1^2 - C2^2)/sqrt(eps).
        const double scale = std::numbers::pi * (a == 1 ? c.mu : c.lambda + 2 * c.mu);
        std::vector<double> b;
        for (size_t k = 0; k < eps.size(); ++k) b.push_back(scale * d[k] / std::sqrt(eps[k]));
        if (a == 1 && !b.empty()) {
            const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
            double mean = 0;
            for (double x : b) mean += x / static_cast<double>(b.size());
            const double spread = (*hi - *lo) / mean;
            r.series.push_back(detail::info_series("bstar_11", eps, b, false));
            r.checks.push_back({"bstar_11_spread", spread, "(max - min)/mean < " + detail::fmt(c.tol("bstar_spread")), spread < c.tol("bstar_spread")});
        } else {
            r.series.push_back(detail::info_series("bstar_12", eps, b, false));
        }
    }
    double worst = 0;
    for (const auto& C : Cs) worst = std::max(worst, std::fabs(C(0, 2) - C(1, 2)) / C.norm());
    r.checks.push_back({"rotation_difference", worst, "max |C1^3 - C2^3| / ||C|| < " + detail::fmt(c.tol("rotation_equal")), worst < c.tol("rotation_equal")});
    std::vector<double> c13;
    for (const auto& C : Cs) c13.push_back(C(0, 2));
    r.series.push_back(detail::info_series("C1_3", c.eps, c13, false));
    return r;
}

/// FEM u_11 against the partial sum of the symbolic family on a neck sample grid.
inline StudyReport run_neck_comparison(const SweepConfig& c) {
    StudyReport r = detail::new_report(c, "compare");
    if (!c.geometry.symmetric()) throw ConfigError("the neck comparison needs rho1 = rho2");
    const AuxFamily fam = build_integral(2, 1, c.depth);
    std::array<std::vector<NeckScalar::Compiled<long double>>, 2> comp;
    for (int l = 1; l <= c.depth; ++l)
        for (int i = 0; i < 2; ++i) comp[static_cast<size_t>(i)].push_back(fam.level(l)[i].compile<long double>(c.lambda, c.mu));
    struct Row {
        double err, normalized, wall, umax, gmax;
    };
    const double R = c.geometry.neck_half_width;
    const auto rows = detail::per_eps(c, [&](double e) {
        const fem::Geometry g = c.geometry_at(e);
        const fem::Solution s = detail::problem_at(c, e).solve_component(1, 1);
        Row row{};
        for (int k = -16; k <= 16; ++k) {
            const double x = R * k / 16.0, delta = e + x * x;
            for (int j = -4; j <= 4; ++j) {
                const double rel = j / 8.0; // relative height in the gap, -1/2 .. 1/2
                const double y = rel >= 0 ? g.top(x) * 2 * rel : -g.bottom(x) * 2 * rel;
                const auto hit = s.field.locator().locate({x, y});
                const fem::Point u = s.field.value_at(hit);
                double v[2] = {0, 0};
                const NeckPoint<long double> pt{{static_cast<long double>(x), 0}, static_cast<long double>(rel * delta), static_cast<long double>(e)};
                for (int i = 0; i < 2; ++i)
                    for (const auto& f : comp[static_cast<size_t>(i)]) v[i] += static_cast<double>(f(pt));
                const double err = std::hypot(u[0] - v[0], u[1] - v[1]);
                row.err = std::max(row.err, err);
                row.normalized = std::max(row.normalized, err / delta);
                if (std::abs(j) == 4) row.wall = std::max(row.wall, err);
                row.umax = std::max(row.umax, std::hypot(u[0], u[1]));
                row.gmax = std::max(row.gmax, fem::frobenius(s.field.gradient_at(hit)));
            }
        }
        return row;
    });
    const auto norm = detail::column(rows, &Row::normalized);
    const auto [lo, hi] = std::minmax_element(norm.begin(), norm.end());
    const double ratio = *hi / *lo;
    r.series.push_back(detail::info_series("max_error", c.eps, detail::column(rows, &Row::err)));
    r.series.push_back(detail::info_series("max_error_over_delta", c.eps, norm));
    r.checks.push_back({"normalized_error_ratio", ratio, "max/min over the sweep < " + detail::fmt(c.tol("neck_ratio")), ratio < c.tol("neck_ratio")});
    r.series.push_back(detail::slope_series("max_grad_u11", c.eps, detail::column(rows, &Row::gmax), -1.0, c.tol("translation_slope")));
    double wall = 0;
    for (const auto& x : rows) wall = std::max(wall, x.wall);
    r.checks.push_back({"wall_trace", wall, "max error on the gap walls < " + detail::fmt(c.tol("boundary_trace")), wall < c.tol("boundary_trace")});
    const double frac = rows.front().err / rows.front().umax;
    r.checks.push_back({"sanity_at_largest_eps", frac, "max error / max |u| < " + detail::fmt(c.tol("sanity_fraction")), frac < c.tol("sanity_fraction")});
    r.notes.push_back("symbolic depth " + std::to_string(c.depth) + "; samples x = R k/16, |k| <= 16, at relative gap heights j/8, |j| <= 4; the symbolic sum is evaluated at z = (relative height) * (eps + x^2)");
    return r;
}

/// u_11 + u_21 and u_13 + u_23 at the gap center.
inline StudyReport run_symmetric_cancellation(const SweepConfig& c) {
    StudyReport r = detail::new_report(c, "cancel");
    struct Row {
        double sum1, single, sum3;
    };
    const auto rows = detail::per_eps(c, [&](double e) {
        const fem::ElasticProblem P = detail::problem_at(c, e);
        const fem::Point o{0, 0};
        const fem::Solution a = P.solve_component(1, 1), b = P.solve_component(2, 1);
        const fem::Solution p = P.solve_component(1, 3), q = P.solve_component(2, 3);
        return Row{fem::frobenius((a.field + b.field).gradient(o)), fem::frobenius(a.field.gradient(o)), detail::spectral_norm((p.field + q.field).gradient(o))};
    });
    r.series.push_back(detail::min_slope_series("grad_u11_plus_u21", c.eps, detail::column(rows, &Row::sum1), c.tol("cancel_min_slope")));
    r.series.push_back(detail::slope_series("grad_u11_control", c.eps, detail::column(rows, &Row::single), -1.0, c.tol("translation_slope")));
    const auto s3 = detail::column(rows, &Row::sum3);
    const double worst = *std::max_element(s3.begin(), s3.end());
    r.series.push_back(detail::info_series("grad_u13_plus_u23", c.eps, s3, false));
    r.checks.push_back({"rotation_sum_bound", worst, "max spectral norm <= 1 + " + detail::fmt(c.tol("rotation_sum")), worst <= 1 + c.tol("rotation_sum")});
    return r;
}

/// Traction-free inclusions: gap-center gradient growth (one-sided) plus a rigid-data control.
inline StudyReport run_holes_study(const SweepConfig& c) {
    StudyReport r = detail::new_report(c, "holes");
    struct Row {
        double g, normalized, rigid;
    };
    const double R = c.geometry.neck_half_width;
    const auto rows = detail::per_eps(c, [&](double e) {
        const fem::ElasticProblem P = detail::problem_at(c, e);
        const fem::Solution s = P.solve_holes(c.boundary_data());
        const fem::Geometry g = c.geometry_at(e);
        double umax = 0;
        for (int k = -16; k <= 16; ++k) {
            const double x = R * k / 16.0;
            for (int j = -4; j <= 4; ++j) {
                const double y = j >= 0 ? g.top(x) * j / 4.0 : -g.bottom(x) * j / 4.0;
                const fem::Point u = s.field.value({x, y});
                umax = std::max(umax, std::hypot(u[0], u[1]));
            }
        }
        const double gc = fem::frobenius(s.field.gradient({0, 0}));
        const double rigid = fem::frobenius(P.solve_holes([](const fem::Point& p) { return fem::rigid_motion(3, p); }).field.gradient({0, 0}));
        return Row{gc, gc / umax, rigid};
    });
    const double lo = c.tol("holes_min_slope");
    r.series.push_back(detail::min_slope_series("grad_holes", c.eps, detail::column(rows, &Row::g), lo));
    r.series.push_back(detail::min_slope_series("grad_holes_over_sup_u", c.eps, detail::column(rows, &Row::normalized), lo));
    r.series.push_back(detail::slope_series("grad_rigid_control", c.eps, detail::column(rows, &Row::rigid), 0.0, c.tol("rigid_slope")));
    r.notes.push_back("sup |u| is taken over the neck sample grid |x| <= R");
    return r;
}

inline StudyReport run_study(const SweepConfig& c) {
    if (c.study == "rates") return run_blowup_study(c);
    if (c.study == "constants") return run_constant_study(c);
    if (c.study == "compare") return run_neck_comparison(c);
    if (c.study == "holes") return run_holes_study(c);
    if (c.study == "cancel") return run_symmetric_cancellation(c);
    throw ConfigError("unknown study id '" + c.study + "'");
}

} // namespace narrowgap
