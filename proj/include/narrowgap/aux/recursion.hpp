#pragma once

// Closed-form route for the symmetric neck: every level is an odd/even polynomial
// ansatz in z whose coefficient tables obey explicit recursions. Tables named P1, Q1
// carry the odd ansatz sum_{i<l} P_i z^{2l-2i-1} (z^2 - delta^2/4); P2, Q2 the even
// ansatz sum_{i<=l} P_i z^{2l-2i} (z^2 - delta^2/4).

#include <functional>
#include <string>

#include "narrowgap/aux/family.hpp"

namespace narrowgap {

namespace detail {

inline NeckScalar quarter_delta_sq(int d) { return NeckScalar::delta_pow(d, 2).scaled(RationalCoeff::frac(1, 4)); }

inline bool is_odd_table(const std::string& name) { return name == "P1" || name == "Q1"; }

struct TableSlot {
    std::string name;
    int comp;
};

/// Which component each table feeds, per (dim, alpha).
inline std::vector<TableSlot> table_layout(int dim, int alpha) {
    if (dim == 2) {
        if (alpha != 1 && alpha != 2) throw InvalidArgument("no closed-form recursion for the 2D rotation (alpha = 3)");
        return {{"P1", alpha - 1}, {"P2", 2 - alpha}};
    }
    if (alpha == 1 || alpha == 2) return {{"P1", alpha - 1}, {"Q1", 2 - alpha}, {"P2", 2}};
    if (alpha == 3) return {{"P1", 2}, {"P2", 0}, {"Q2", 1}};
    throw InvalidArgument("no closed-form recursion for 3D rotations (alpha = " + std::to_string(alpha) + ")");
}

/// Entry i of a table, zero outside its range.
inline NeckScalar table_entry(const AuxFamily& fam, int l, const std::string& name, int i) {
    if (l < 1 || l > static_cast<int>(fam.tables.size())) return NeckScalar(fam.dim);
    const auto& t = fam.tables[static_cast<size_t>(l - 1)];
    auto it = t.find(name);
    if (it == t.end() || i < 1 || i >= static_cast<int>(it->second.size())) return NeckScalar(fam.dim);
    return it->second[static_cast<size_t>(i)];
}

/// P~_i = P_i - (delta^2/4) P_{i-1}, the z^{...} coefficient of the ansatz.
/// Level 1 odd tables are the profile itself: P~_1 = 1/delta on the primary slot.
inline NeckScalar table_tilde(const AuxFamily& fam, int l, const std::string& name, int i) {
    const int d = fam.dim;
    if (l < 1) return NeckScalar(d);
    if (l == 1 && is_odd_table(name)) return (name == "P1" && i == 1) ? NeckScalar::delta_pow(d, -1) : NeckScalar(d);
    return table_entry(fam, l, name, i) - quarter_delta_sq(d) * table_entry(fam, l, name, i - 1);
}

inline NeckScalar ansatz(int d, int l, const std::vector<NeckScalar>& table, bool odd) {
    const NeckScalar zz = NeckScalar::z(d);
    const NeckScalar bump = zz * zz - quarter_delta_sq(d);
    NeckScalar out(d);
    for (size_t i = 1; i < table.size(); ++i) {
        const int power = odd ? 2 * l - 2 * static_cast<int>(i) - 1 : 2 * l - 2 * static_cast<int>(i);
        NeckScalar zp = NeckScalar::constant(d, 1);
        for (int k = 0; k < power; ++k) zp = zp * zz;
        out += table[i] * zp * bump;
    }
    return out;
}

} // namespace detail

/// Appends level l = depth+1 of a 2D translation family via the closed-form recursions.
inline void extend_recursion_2d(AuxFamily& fam, const FactorProfile& fp) {
    if (fam.dim != 2) throw InvalidArgument("extend_recursion_2d needs d = 2");
    detail::table_layout(2, fam.alpha);
    const int l = fam.depth() + 1;
    const NeckScalar q = detail::quarter_delta_sq(2);
    const Axis x = Axis::x1;
    auto T = [&](int lev, const char* n, int i) { return detail::table_tilde(fam, lev, n, i); };

    std::vector<NeckScalar> P1(static_cast<size_t>(l), NeckScalar(2));
    for (int i = 0; i <= l - 2; ++i) {
        const long A = 2 * (l - i) - 1;
        const NeckScalar br = T(l - 1, "P2", i + 1).diff(x).scaled(fp.c1 * RationalCoeff(A - 1)) +
                              diff(T(l - 1, "P1", i + 1), x, x).scaled(fp.c2);
        P1[static_cast<size_t>(i + 1)] = q * P1[static_cast<size_t>(i)] - br.scaled(RationalCoeff::frac(1, (A - 1) * A));
    }
    fam.tables.push_back({{"P1", P1}});

    std::vector<NeckScalar> P2(static_cast<size_t>(l + 1), NeckScalar(2));
    for (int i = 0; i <= l - 1; ++i) {
        const long A = 2 * (l - i) - 1;
        const NeckScalar br = T(l, "P1", i + 1).diff(x).scaled(fp.c3 * RationalCoeff(A)) +
                              diff(T(l - 1, "P2", i + 1), x, x).scaled(fp.c4);
        P2[static_cast<size_t>(i + 1)] = q * P2[static_cast<size_t>(i)] - br.scaled(RationalCoeff::frac(1, A * (A + 1)));
    }
    fam.tables.back()["P2"] = P2;

    NeckField v(2);
    const int odd_comp = fam.alpha - 1, even_comp = 2 - fam.alpha;
    v[odd_comp] = l == 1 ? profile(2) : detail::ansatz(2, l, P1, true);
    v[even_comp] = detail::ansatz(2, l, P2, false);
    append_level(fam, std::move(v));
}

/// Appends the next level of a 3D translation family (alpha = 1, 2, 3) via the closed-form recursions.
inline void extend_recursion_3d(AuxFamily& fam) {
    if (fam.dim != 3) throw InvalidArgument("extend_recursion_3d needs d = 3");
    detail::table_layout(3, fam.alpha);
    const int l = fam.depth() + 1;
    const NeckScalar q = detail::quarter_delta_sq(3);
    const RationalCoeff L = lam(), M = mu(), LM = lam() + mu(), L2M = lam() + 2 * mu();
    auto T = [&](int lev, const char* n, int i) { return detail::table_tilde(fam, lev, n, i); };
    auto sz = [](int n) { return static_cast<size_t>(n); };
    NeckField v(3);

    if (fam.alpha <= 2) {
        const Axis a = fam.alpha == 1 ? Axis::x1 : Axis::x2;
        const Axis b = fam.alpha == 1 ? Axis::x2 : Axis::x1;
        std::vector<NeckScalar> P1(sz(l), NeckScalar(3)), Q1(sz(l), NeckScalar(3));
        for (int i = 0; i <= l - 2; ++i) {
            const long A = 2 * (l - i) - 1;
            const NeckScalar p2 = T(l - 1, "P2", i + 1), p1 = T(l - 1, "P1", i + 1), q1 = T(l - 1, "Q1", i + 1);
            const RationalCoeff den = (RationalCoeff(A * (A - 1)) * M).inverse();
            const NeckScalar brP = p2.diff(a).scaled(LM * RationalCoeff(A - 1)) + diff(p1, b, b).scaled(M) +
                                   diff(p1, a, a).scaled(L2M) + diff(q1, a, b).scaled(LM);
            const NeckScalar brQ = p2.diff(b).scaled(LM * RationalCoeff(A - 1)) + diff(q1, a, a).scaled(M) +
                                   diff(q1, b, b).scaled(L2M) + diff(p1, a, b).scaled(LM);
            P1[sz(i + 1)] = q * P1[sz(i)] - brP.scaled(den);
            Q1[sz(i + 1)] = q * Q1[sz(i)] - brQ.scaled(den);
        }
        fam.tables.push_back({{"P1", P1}, {"Q1", Q1}});
        std::vector<NeckScalar> P2(sz(l + 1), NeckScalar(3));
        for (int i = 0; i <= l - 1; ++i) {
            const long A = 2 * (l - i) - 1;
            const NeckScalar br = (T(l, "P1", i + 1).diff(a) + T(l, "Q1", i + 1).diff(b)).scaled(LM * RationalCoeff(A)) +
                                  lap_t(T(l - 1, "P2", i + 1)).scaled(M);
            P2[sz(i + 1)] = q * P2[sz(i)] - br.scaled((RationalCoeff(A * (A + 1)) * L2M).inverse());
        }
        fam.tables.back()["P2"] = P2;
        const int ca = fam.alpha - 1, cb = 2 - fam.alpha;
        v[ca] = l == 1 ? profile(3) : detail::ansatz(3, l, P1, true);
        v[cb] = detail::ansatz(3, l, Q1, true);
        v[2] = detail::ansatz(3, l, P2, false);
    } else {
        const Axis x1 = Axis::x1, x2 = Axis::x2;
        std::vector<NeckScalar> P1(sz(l), NeckScalar(3));
        for (int i = 0; i <= l - 2; ++i) {
            const long A = 2 * (l - i) - 1;
            const NeckScalar br = (T(l - 1, "P2", i + 1).diff(x1) + T(l - 1, "Q2", i + 1).diff(x2)).scaled(LM * RationalCoeff(A - 1)) +
                                  lap_t(T(l - 1, "P1", i + 1)).scaled(M);
            P1[sz(i + 1)] = q * P1[sz(i)] - br.scaled((RationalCoeff(A * (A - 1)) * L2M).inverse());
        }
        fam.tables.push_back({{"P1", P1}});
        std::vector<NeckScalar> P2(sz(l + 1), NeckScalar(3)), Q2(sz(l + 1), NeckScalar(3));
        for (int i = 0; i <= l - 1; ++i) {
            const long A = 2 * (l - i) - 1;
            const NeckScalar p1 = T(l, "P1", i + 1), p2 = T(l - 1, "P2", i + 1), q2 = T(l - 1, "Q2", i + 1);
            const RationalCoeff den = (RationalCoeff(A * (A + 1)) * M).inverse();
            const NeckScalar brP = p1.diff(x1).scaled(LM * RationalCoeff(A)) + diff(p2, x1, x1).scaled(L2M) +
                                   diff(q2, x1, x2).scaled(LM) + diff(p2, x2, x2).scaled(M);
            const NeckScalar brQ = p1.diff(x2).scaled(LM * RationalCoeff(A)) + diff(q2, x2, x2).scaled(L2M) +
                                   diff(p2, x1, x2).scaled(LM) + diff(q2, x1, x1).scaled(M);
            P2[sz(i + 1)] = q * P2[sz(i)] - brP.scaled(den);
            Q2[sz(i + 1)] = q * Q2[sz(i)] - brQ.scaled(den);
        }
        fam.tables.back()["P2"] = P2;
        fam.tables.back()["Q2"] = Q2;
        v[2] = l == 1 ? profile(3) : detail::ansatz(3, l, P1, true);
        v[0] = detail::ansatz(3, l, P2, false);
        v[1] = detail::ansatz(3, l, Q2, false);
    }
    (void)L;
    append_level(fam, std::move(v));
}

inline AuxFamily build_recursion(int dim, int alpha, int depth) {
    check_alpha(dim, alpha);
    detail::table_layout(dim, alpha);
    if (depth < 1) throw InvalidArgument("depth must be at least 1");
    AuxFamily fam = start_family(dim, alpha, Route::recursion);
    for (int l = 1; l <= depth; ++l) {
        if (dim == 2) extend_recursion_2d(fam, FactorProfile::for_alpha(alpha));
        else extend_recursion_3d(fam);
    }
    return fam;
}

inline AuxFamily build_family(int dim, int alpha, int depth, Route route) {
    return route == Route::integral ? build_integral(dim, alpha, depth) : build_recursion(dim, alpha, depth);
}

/// Coefficient P_{l*,i} read off any family: from the stored tables of the recursion route,
/// otherwise recovered from the z-coefficients of v^l (P_i = P~_i + (delta^2/4) P_{i-1}).
inline NeckScalar ansatz_coefficient(const AuxFamily& fam, const std::string& name, int l, int i) {
    const auto layout = detail::table_layout(fam.dim, fam.alpha);
    int comp = -1;
    for (const auto& s : layout)
        if (s.name == name) comp = s.comp;
    if (comp < 0) throw InvalidArgument("no table " + name + " for this family");
    const bool odd = detail::is_odd_table(name);
    if (odd && l == 1) throw InvalidArgument("level 1 has no odd-ansatz table");
    const int top = odd ? l - 1 : l;
    if (i < 1 || i > top) return NeckScalar(fam.dim);
    if (fam.route == Route::recursion) return detail::table_entry(fam, l, name, i);
    const NeckScalar& vl = fam.level(l)[comp];
    NeckScalar P(fam.dim);
    for (int j = 1; j <= i; ++j) {
        const int power = odd ? 2 * l - 2 * j + 1 : 2 * l - 2 * j + 2;
        P = vl.z_coefficient(power) + detail::quarter_delta_sq(fam.dim) * P;
    }
    return P;
}

} // namespace narrowgap
