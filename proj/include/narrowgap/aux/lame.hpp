#pragma once

#include <string>

#include "narrowgap/neck/field.hpp"

namespace narrowgap {

inline RationalCoeff lam() { return RationalCoeff::lambda(); }
inline RationalCoeff mu() { return RationalCoeff::mu(); }

/// Axis carrying component j: tangential directions first, the normal last.
inline Axis axis_of(int dim, int j) { return j == dim - 1 ? Axis::z : tangential_axis(j); }

/// (L u)_i = mu * Lap u_i + (lambda + mu) * d_i div u.
inline NeckField lame_apply(const NeckField& u) {
    const int d = u.dim();
    NeckScalar div(d);
    for (int j = 0; j < d; ++j) div += u[j].diff(axis_of(d, j));
    const RationalCoeff lm = lam() + mu();
    NeckField out(d);
    for (int i = 0; i < d; ++i) {
        NeckScalar lap(d);
        for (int j = 0; j < d; ++j) lap += diff(u[i], axis_of(d, j), axis_of(d, j));
        out[i] = lap.scaled(mu()) + div.diff(axis_of(d, i)).scaled(lm);
    }
    return out;
}

/// Tangential Laplacian.
inline NeckScalar lap_t(const NeckScalar& a) {
    NeckScalar out(a.dim());
    for (int j = 0; j + 1 < a.dim(); ++j) out += diff(a, tangential_axis(j), tangential_axis(j));
    return out;
}

inline int rigid_count(int dim) { return dim == 2 ? 3 : 6; }

inline void check_alpha(int dim, int alpha) {
    if (dim != 2 && dim != 3) throw InvalidArgument("dimension must be 2 or 3");
    if (alpha < 1 || alpha > rigid_count(dim))
        throw InvalidArgument("alpha=" + std::to_string(alpha) + " is not a rigid-basis index for d=" +
                              std::to_string(dim));
}

inline bool is_translation(int dim, int alpha) { return alpha <= dim; }

/// psi_alpha written in neck variables (x1[, x2], z).
inline NeckField rigid_basis(int dim, int alpha) {
    check_alpha(dim, alpha);
    NeckField psi(dim);
    const NeckScalar one = NeckScalar::constant(dim, 1);
    const NeckScalar zz = NeckScalar::z(dim);
    if (is_translation(dim, alpha)) {
        psi[alpha - 1] = one;
        return psi;
    }
    const NeckScalar x1 = NeckScalar::x(dim, 0);
    if (dim == 2) {
        psi[0] = zz;
        psi[1] = -x1;
        return psi;
    }
    const NeckScalar x2 = NeckScalar::x(dim, 1);
    switch (alpha) {
    case 4:
        psi[0] = x2;
        psi[1] = -x1;
        break;
    case 5:
        psi[0] = zz;
        psi[2] = -x1;
        break;
    default:
        psi[1] = zz;
        psi[2] = -x2;
        break;
    }
    return psi;
}

/// Which block of components a level is solved for first.
enum class Order { tangential_first, normal_first };

inline Order construction_order(int dim, int alpha) {
    check_alpha(dim, alpha);
    if (dim == 2) return alpha == 2 ? Order::normal_first : Order::tangential_first;
    return (alpha == 3 || alpha == 4) ? Order::normal_first : Order::tangential_first;
}

/// The cut-off profile z/delta + 1/2: 0 on the bottom boundary, 1 on the top one.
inline NeckScalar profile(int dim) {
    return NeckScalar::z(dim) * NeckScalar::delta_pow(dim, -1) + NeckScalar::constant(dim, RationalCoeff::frac(1, 2));
}

/// Tangential-recursion factors (c1, c2) and normal-recursion factors (c3, c4) of the 2D closed forms.
struct FactorProfile {
    RationalCoeff c1, c2, c3, c4;

    static FactorProfile for_alpha(int alpha) {
        const RationalCoeff l = lam(), m = mu();
        FactorProfile f;
        if (alpha == 1) {
            f.c1 = (l + m) / m;
            f.c2 = (l + 2 * m) / m;
            f.c3 = (l + m) / (l + 2 * m);
            f.c4 = m / (l + 2 * m);
        } else if (alpha == 2) {
            f.c1 = (l + m) / (l + 2 * m);
            f.c2 = m / (l + 2 * m);
            f.c3 = (l + m) / m;
            f.c4 = (l + 2 * m) / m;
        } else {
            throw InvalidArgument("the 2D closed-form recursion covers alpha = 1, 2 only");
        }
        return f;
    }
};

} // namespace narrowgap
