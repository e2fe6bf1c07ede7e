#pragma once

#include <map>
#include <string>
#include <vector>

#include "narrowgap/aux/lame.hpp"

namespace narrowgap {

enum class Route { integral, recursion };

inline const char* route_name(Route r) { return r == Route::integral ? "integral" : "recursion"; }

/// Coefficient tables of the closed-form ansatz at one level, indexed 1..n (slot 0 is the zero scalar).
using LevelTables = std::map<std::string, std::vector<NeckScalar>>;

/// Auxiliary fields v^1..v^m for one rigid mode, with partial residuals f^l = sum_{j<=l} L v^j.
struct AuxFamily {
    int dim = 2;
    int alpha = 1;
    Route route = Route::integral;
    Order order = Order::tangential_first;
    // Tilted rotations: keep the O(1) tangential part of f^1 out of the level-2 source.
    bool split_level2 = false;
    std::vector<NeckField> v;
    std::vector<NeckField> f;
    std::vector<LevelTables> tables;

    int depth() const { return static_cast<int>(v.size()); }
    const NeckField& level(int l) const {
        if (l < 1 || l > depth()) throw InvalidArgument("level " + std::to_string(l) + " not built");
        return v[static_cast<size_t>(l - 1)];
    }
    NeckField sum(int m) const {
        NeckField s(dim);
        for (int l = 1; l <= m; ++l) s += level(l);
        return s;
    }
};

inline size_t default_depth_limit() { return 6; }

inline void append_level(AuxFamily& fam, NeckField vl) {
    NeckField fl = lame_apply(vl);
    if (!fam.f.empty()) fl += fam.f.back();
    fam.v.push_back(std::move(vl));
    fam.f.push_back(std::move(fl));
}

/// Recomputes every partial residual from the stored levels (after editing v by hand).
inline void recompute_residuals(AuxFamily& fam) {
    fam.f.clear();
    for (const auto& vl : fam.v) {
        NeckField fl = lame_apply(vl);
        if (!fam.f.empty()) fl += fam.f.back();
        fam.f.push_back(std::move(fl));
    }
}

/// Partial residual f^l; l = 0 gives the zero field.
inline const NeckField& residual(const AuxFamily& fam, int l) {
    static const NeckField zero2(2), zero3(3);
    if (l == 0) return fam.dim == 2 ? zero2 : zero3;
    if (l < 0 || l > fam.depth()) throw InvalidArgument("residual level " + std::to_string(l) + " exceeds depth");
    return fam.f[static_cast<size_t>(l - 1)];
}

/// Rotations whose level-1 field carries z in a tangential component: psi_3 in 2D, psi_5 and psi_6 in 3D.
inline bool is_tilted_rotation(int dim, int alpha) { return (dim == 2 && alpha == 3) || (dim == 3 && alpha >= 5); }

/// Purely tangential part of L applied to u, component i: mu Lap' u_i + (lambda+mu) d_i div' u'.
inline NeckScalar lame_tangential_part(const NeckField& u, int i) {
    const int d = u.dim();
    NeckScalar div(d);
    for (int j = 0; j + 1 < d; ++j) div += u[j].diff(tangential_axis(j));
    return lap_t(u[i]).scaled(mu()) + div.diff(tangential_axis(i)).scaled(lam() + mu());
}

/// Source driving tangential component i at level l.
///
/// For tilted rotations at level 2 the O(1) tangential part of f^1 is left in place;
/// absorbing it here would raise the z-degree of every later level by two.
inline NeckScalar tangential_source(const AuxFamily& fam, int l, int i) {
    NeckScalar s = residual(fam, l - 1)[i];
    if (l == 2 && fam.split_level2) s -= lame_tangential_part(fam.level(1), i);
    return s;
}

inline NeckScalar normal_source(const AuxFamily& fam, int l) { return residual(fam, l - 1).normal(); }

/// Level-1 field: profile times psi_alpha, plus the Green corrector for translations.
inline NeckField seed_level1(int dim, int alpha) {
    check_alpha(dim, alpha);
    const NeckScalar p = profile(dim);
    NeckField v(dim);
    if (!is_translation(dim, alpha)) {
        const NeckField psi = rigid_basis(dim, alpha);
        for (int i = 0; i < dim; ++i) v[i] = p * psi[i];
        return v;
    }
    const int t = alpha - 1;
    const RationalCoeff l = lam(), m = mu();
    v[t] = p;
    if (t < dim - 1) {
        v[dim - 1] = green_solve(diff(p, tangential_axis(t), Axis::z).scaled(-(l + m) / (l + 2 * m)));
    } else {
        for (int i = 0; i < dim - 1; ++i)
            v[i] = green_solve(diff(p, tangential_axis(i), Axis::z).scaled(-(l + m) / m));
    }
    return v;
}

inline AuxFamily start_family(int dim, int alpha, Route route) {
    AuxFamily fam;
    fam.dim = dim;
    fam.alpha = alpha;
    fam.route = route;
    fam.order = construction_order(dim, alpha);
    fam.split_level2 = is_tilted_rotation(dim, alpha);
    return fam;
}

/// Appends the next level through the two-point Green solves.
inline void extend_integral(AuxFamily& fam) {
    const int d = fam.dim;
    if (fam.depth() == 0) {
        append_level(fam, seed_level1(d, fam.alpha));
        return;
    }
    const int l = fam.depth() + 1;
    const RationalCoeff lm = lam() + mu(), l2m = lam() + 2 * mu(), m = mu();
    NeckField v(d);
    if (fam.order == Order::tangential_first) {
        NeckScalar coupling(d);
        for (int i = 0; i + 1 < d; ++i) {
            v[i] = green_solve(tangential_source(fam, l, i).scaled(-m.inverse()));
            coupling += diff(v[i], tangential_axis(i), Axis::z);
        }
        v[d - 1] = green_solve((normal_source(fam, l) + coupling.scaled(lm)).scaled(-l2m.inverse()));
    } else {
        v[d - 1] = green_solve(normal_source(fam, l).scaled(-l2m.inverse()));
        for (int i = 0; i + 1 < d; ++i) {
            const NeckScalar src = tangential_source(fam, l, i) + diff(v[d - 1], tangential_axis(i), Axis::z).scaled(lm);
            v[i] = green_solve(src.scaled(-m.inverse()));
        }
    }
    append_level(fam, std::move(v));
}

inline AuxFamily build_integral(int dim, int alpha, int depth) {
    check_alpha(dim, alpha);
    if (depth < 1) throw InvalidArgument("depth must be at least 1");
    AuxFamily fam = start_family(dim, alpha, Route::integral);
    for (int l = 1; l <= depth; ++l) extend_integral(fam);
    return fam;
}

/// The reading in which every 3D rotation is built normal-first with the plain f^{l-1} source.
/// Kept for comparison: for psi_5 and psi_6 it leaves f^{m,(3)} one half order short of m-2.
inline AuxFamily build_integral_normal_first(int dim, int alpha, int depth) {
    check_alpha(dim, alpha);
    AuxFamily fam = start_family(dim, alpha, Route::integral);
    fam.order = Order::normal_first;
    fam.split_level2 = false;
    for (int l = 1; l <= depth; ++l) extend_integral(fam);
    return fam;
}

/// Size telemetry: total stored terms and the largest coefficient integer in bits.
struct FamilyStats {
    size_t terms = 0;
    size_t max_bits = 0;
};

inline FamilyStats family_stats(const AuxFamily& fam) {
    FamilyStats st;
    for (const auto& lv : fam.v) {
        for (int i = 0; i < fam.dim; ++i) {
            st.terms += lv[i].size();
            for (const auto& [k, c] : lv[i].terms()) {
                for (const auto* p : {&c.num(), &c.den()})
                    for (const auto& [e, z] : p->terms()) st.max_bits = std::max(st.max_bits, mpz_sizeinbase(z.get_mpz_t(), 2));
            }
        }
    }
    return st;
}

} // namespace narrowgap
