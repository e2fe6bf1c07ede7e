#pragma once

// Functions on the neck: finite sums c * x'^p * z^q * eps^s * delta^(-r) with
// delta = eps + |x'|^2. The representation is not unique; equality goes through
// a polynomial normal form (see canonical()).

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "narrowgap/coeff/rational_coeff.hpp"
#include "narrowgap/error.hpp"

namespace narrowgap {

enum class Axis { x1, x2, z };

inline const char* axis_name(Axis a) {
    switch (a) {
    case Axis::x1: return "x1";
    case Axis::x2: return "x2";
    case Axis::z: return "z";
    }
    return "?";
}

/// Exponents of one term. r counts powers of 1/delta and may be negative.
struct TermKey {
    std::array<int, 2> p{0, 0};
    int q = 0;
    int s = 0;
    int r = 0;
    auto operator<=>(const TermKey&) const = default;
};

/// Monomial x1^a x2^b z^q eps^s, the variables of the normal form.
struct Mono {
    std::array<int, 2> p{0, 0};
    int q = 0;
    int s = 0;
    auto operator<=>(const Mono&) const = default;
};

/// A numerator polynomial over delta^R, scaled by a common nonzero parameter polynomial.
struct NormalForm {
    int R = 0;
    ParamPoly D{1};
    std::map<Mono, ParamPoly> poly;
};

template <class F>
struct NeckPoint {
    std::array<F, 2> x{0, 0};
    F z = 0;
    F eps = 0;
};

class NeckScalar {
public:
    using Map = std::map<TermKey, RationalCoeff>;

    explicit NeckScalar(int dim = 2) : dim_(dim) {
        if (dim != 2 && dim != 3) throw InvalidArgument("neck dimension must be 2 or 3");
    }

    static NeckScalar constant(int dim, const RationalCoeff& c) { return term(dim, c, {}); }
    static NeckScalar term(int dim, const RationalCoeff& c, TermKey k) {
        NeckScalar a(dim);
        a.add_term(k, c);
        return a;
    }
    static NeckScalar x(int dim, int i) {
        TermKey k;
        k.p[static_cast<size_t>(i)] = 1;
        return term(dim, 1, k);
    }
    static NeckScalar z(int dim) { return term(dim, 1, {{0, 0}, 1, 0, 0}); }
    static NeckScalar eps(int dim) { return term(dim, 1, {{0, 0}, 0, 1, 0}); }
    /// delta^k for any integer k.
    static NeckScalar delta_pow(int dim, int k) { return term(dim, 1, {{0, 0}, 0, 0, -k}); }

    int dim() const { return dim_; }
    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    size_t size() const { return t_.size(); }

    void add_term(TermKey k, const RationalCoeff& c) {
        if (dim_ == 2 && k.p[1] != 0) throw DimensionMismatch("x2 exponent in a 2D neck scalar");
        if (k.p[0] < 0 || k.p[1] < 0 || k.q < 0 || k.s < 0) throw InvalidArgument("negative monomial exponent");
        if (c.is_zero()) return;
        auto [it, inserted] = t_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) t_.erase(it);
        }
    }

    NeckScalar& operator+=(const NeckScalar& b) {
        check_dim(b);
        for (const auto& [k, c] : b.t_) add_term(k, c);
        return *this;
    }
    NeckScalar& operator-=(const NeckScalar& b) {
        check_dim(b);
        for (const auto& [k, c] : b.t_) add_term(k, -c);
        return *this;
    }
    friend NeckScalar operator+(NeckScalar a, const NeckScalar& b) { return a += b; }
    friend NeckScalar operator-(NeckScalar a, const NeckScalar& b) { return a -= b; }
    friend NeckScalar operator-(const NeckScalar& a) { return a.scaled(-1); }
    friend NeckScalar operator*(const NeckScalar& a, const NeckScalar& b) {
        a.check_dim(b);
        NeckScalar r(a.dim_);
        for (const auto& [ka, ca] : a.t_)
            for (const auto& [kb, cb] : b.t_)
                r.add_term({{ka.p[0] + kb.p[0], ka.p[1] + kb.p[1]}, ka.q + kb.q, ka.s + kb.s, ka.r + kb.r}, ca * cb);
        return r;
    }
    friend NeckScalar operator*(const RationalCoeff& c, const NeckScalar& a) { return a.scaled(c); }

    NeckScalar scaled(const RationalCoeff& c) const {
        NeckScalar r(dim_);
        if (c.is_zero()) return r;
        for (const auto& [k, v] : t_) r.t_.emplace(k, v * c);
        return r;
    }

    /// Exact partial derivative; d/dx_i delta = 2 x_i.
    NeckScalar diff(Axis axis) const {
        NeckScalar out(dim_);
        if (axis == Axis::z) {
            for (const auto& [k, c] : t_) {
                if (k.q == 0) continue;
                TermKey n = k;
                n.q -= 1;
                out.add_term(n, c * RationalCoeff(k.q));
            }
            return out;
        }
        const size_t i = axis == Axis::x1 ? 0 : 1;
        if (i + 1 >= static_cast<size_t>(dim_)) throw DimensionMismatch("no x2 axis in a 2D neck");
        for (const auto& [k, c] : t_) {
            if (k.p[i] > 0) {
                TermKey n = k;
                n.p[i] -= 1;
                out.add_term(n, c * RationalCoeff(k.p[i]));
            }
            if (k.r != 0) {
                TermKey n = k;
                n.p[i] += 1;
                n.r += 1;
                out.add_term(n, c * RationalCoeff(-2L * k.r));
            }
        }
        return out;
    }

    /// Substitutes z = side * delta / 2 (side = +1 or -1).
    NeckScalar subst_boundary(int side) const {
        NeckScalar out(dim_);
        for (const auto& [k, c] : t_) {
            TermKey n = k;
            n.q = 0;
            n.r = k.r - k.q;
            mpz_class den = 1;
            den <<= static_cast<mp_bitcnt_t>(k.q);
            RationalCoeff f(mpq_class((side < 0 && k.q % 2 == 1) ? -1 : 1, den));
            out.add_term(n, c * f);
        }
        return out;
    }

    /// Terms carrying z^k, with z removed.
    NeckScalar z_coefficient(int k) const {
        NeckScalar out(dim_);
        for (const auto& [key, c] : t_) {
            if (key.q != k) continue;
            TermKey n = key;
            n.q = 0;
            out.t_.emplace(n, c);
        }
        return out;
    }

    int z_degree() const {
        int d = -1;
        for (const auto& [k, c] : t_) d = std::max(d, k.q);
        return d;
    }

    /// Polynomial normal form: this = poly / (D * delta^R) for a nonzero parameter polynomial D.
    NormalForm canonical() const {
        NormalForm nf;
        if (t_.empty()) return nf;
        nf.R = t_.begin()->first.r;
        for (const auto& [k, c] : t_) nf.R = std::max(nf.R, k.r);
        ParamPoly& D = nf.D;
        for (const auto& [k, c] : t_) {
            if (c.den() == D) continue;
            ParamPoly g = poly_gcd(D, c.den());
            D = poly_exact_div(D, g) * c.den();
        }
        std::map<Mono, ParamPoly>& out = nf.poly;
        for (const auto& [k, c] : t_) {
            const ParamPoly scaled = c.num() * poly_exact_div(D, c.den());
            const int e = nf.R - k.r;
            // (eps + x1^2 + x2^2)^e expanded multinomially.
            mpz_class binom_a = 1;
            for (int a = 0; a <= e; ++a) {
                if (a > 0) binom_a = binom_a * (e - a + 1) / a;
                const int rest = e - a;
                mpz_class binom_b = 1;
                const int bmax = dim_ == 3 ? rest : 0;
                for (int b = 0; b <= bmax; ++b) {
                    if (b > 0) binom_b = binom_b * (rest - b + 1) / b;
                    const int x1 = dim_ == 3 ? rest - b : rest;
                    Mono m{{k.p[0] + 2 * x1, k.p[1] + 2 * b}, k.q, k.s + a};
                    auto [it, ins] = out.try_emplace(m);
                    it->second += scaled.scaled(binom_a * binom_b);
                    if (it->second.is_zero()) out.erase(it);
                }
            }
        }
        return nf;
    }

    /// Certified delta-order: min over the normal form of |p|/2 + q + s, minus R.
    mpq_class neck_order() const {
        const NormalForm nf = canonical();
        if (nf.poly.empty()) throw DomainError("neck order of the zero scalar is +infinity");
        int best = 0;
        bool first = true;
        for (const auto& [m, c] : nf.poly) {
            const int w2 = m.p[0] + m.p[1] + 2 * m.q + 2 * m.s;
            if (first || w2 < best) best = w2;
            first = false;
        }
        mpq_class o(best - 2 * nf.R, 2);
        o.canonicalize();
        return o;
    }

    /// The bookkeeping bound read directly off the stored terms.
    mpq_class stored_order() const {
        if (t_.empty()) throw DomainError("neck order of the zero scalar is +infinity");
        mpq_class best;
        bool first = true;
        for (const auto& [k, c] : t_) {
            mpq_class w(k.p[0] + k.p[1] + 2 * k.q + 2 * k.s - 2 * k.r, 2);
            w.canonicalize();
            if (first || w < best) best = w;
            first = false;
        }
        return best;
    }

    mpq_class eval(const std::vector<mpq_class>& xp, const mpq_class& zv, const mpq_class& ev, const mpq_class& l,
                   const mpq_class& m) const {
        if (xp.size() != static_cast<size_t>(dim_ - 1)) throw DimensionMismatch("wrong number of tangential coordinates");
        mpq_class delta = ev;
        for (const auto& v : xp) delta += v * v;
        mpq_class sum = 0;
        for (const auto& [k, c] : t_) {
            mpq_class v = c.eval(l, m);
            for (size_t i = 0; i < xp.size(); ++i)
                for (int j = 0; j < k.p[i]; ++j) v *= xp[i];
            for (int j = 0; j < k.q; ++j) v *= zv;
            for (int j = 0; j < k.s; ++j) v *= ev;
            if (k.r > 0) {
                if (sgn(delta) == 0) throw DomainError("evaluation at delta = 0");
                for (int j = 0; j < k.r; ++j) v /= delta;
            } else {
                for (int j = 0; j < -k.r; ++j) v *= delta;
            }
            sum += v;
        }
        sum.canonicalize();
        return sum;
    }

    template <class F>
    F eval_float(const NeckPoint<F>& pt, F l, F m) const {
        return compile<F>(l, m)(pt);
    }

    /// Coefficients frozen at fixed (lambda, mu) for repeated floating-point evaluation.
    template <class F>
    struct Compiled {
        struct T {
            int p0, p1, q, s, r;
            F c;
        };
        std::vector<T> terms;
        F operator()(const NeckPoint<F>& pt) const {
            const F delta = pt.eps + pt.x[0] * pt.x[0] + pt.x[1] * pt.x[1];
            F sum = 0;
            for (const auto& t : terms) {
                F v = t.c;
                v *= ipow(pt.x[0], t.p0) * ipow(pt.x[1], t.p1) * ipow(pt.z, t.q) * ipow(pt.eps, t.s);
                v *= t.r >= 0 ? F(1) / ipow(delta, t.r) : ipow(delta, -t.r);
                sum += v;
            }
            return sum;
        }
        F abs_sum(const NeckPoint<F>& pt) const {
            const F delta = pt.eps + pt.x[0] * pt.x[0] + pt.x[1] * pt.x[1];
            F sum = 0;
            for (const auto& t : terms) {
                F v = t.c * ipow(pt.x[0], t.p0) * ipow(pt.x[1], t.p1) * ipow(pt.z, t.q) * ipow(pt.eps, t.s);
                v *= t.r >= 0 ? F(1) / ipow(delta, t.r) : ipow(delta, -t.r);
                sum += v < 0 ? -v : v;
            }
            return sum;
        }
        static F ipow(F b, int e) {
            F r = 1;
            for (int i = 0; i < e; ++i) r *= b;
            return r;
        }
    };

    template <class F>
    Compiled<F> compile(F l, F m) const {
        Compiled<F> out;
        out.terms.reserve(t_.size());
        for (const auto& [k, c] : t_) out.terms.push_back({k.p[0], k.p[1], k.q, k.s, k.r, c.eval_float(l, m)});
        return out;
    }

    /// Terms sorted by key, joined by " + ", each "coeff * x1^a * x2^b * z^q * eps^s * delta^-r".
    std::string str() const {
        if (t_.empty()) return "0";
        std::string out;
        for (const auto& [k, c] : t_) {
            if (!out.empty()) out += " + ";
            out += term_str(k, c);
        }
        return out;
    }

    std::string term_str(const TermKey& k, const RationalCoeff& c) const {
        std::string s = c.str();
        auto fac = [&s](const char* v, int e) {
            if (e == 0) return;
            s += std::string(" * ") + v;
            if (e != 1) s += "^" + std::to_string(e);
        };
        fac("x1", k.p[0]);
        if (dim_ == 3) fac("x2", k.p[1]);
        fac("z", k.q);
        fac("eps", k.s);
        fac("delta", -k.r);
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [k, c] : t_) {
            nlohmann::json p = nlohmann::json::array();
            for (int i = 0; i + 1 < dim_; ++i) p.push_back(k.p[static_cast<size_t>(i)]);
            arr.push_back({{"p", p}, {"q", k.q}, {"s", k.s}, {"r", k.r}, {"coeff", c.str()}});
        }
        return arr;
    }

    static NeckScalar from_json(int dim, const nlohmann::json& arr) {
        NeckScalar a(dim);
        for (const auto& t : arr) {
            TermKey k;
            const auto& p = t.at("p");
            if (p.size() != static_cast<size_t>(dim - 1)) throw DimensionMismatch("term exponent length");
            for (size_t i = 0; i < p.size(); ++i) k.p[i] = p[i].get<int>();
            k.q = t.at("q").get<int>();
            k.s = t.at("s").get<int>();
            k.r = t.at("r").get<int>();
            a.add_term(k, RationalCoeff::parse(t.at("coeff").get<std::string>()));
        }
        return a;
    }

    void check_dim(const NeckScalar& b) const {
        if (b.dim_ != dim_) throw DimensionMismatch("neck scalars of different dimension");
    }

private:
    int dim_;
    Map t_;
};

/// Semantic equality through the polynomial normal form.
inline bool s_equal(const NeckScalar& a, const NeckScalar& b) { return (a - b).canonical().poly.empty(); }

inline bool is_semantic_zero(const NeckScalar& a) { return a.canonical().poly.empty(); }

/// w with d^2w/dz^2 = g and w(z = +-delta/2) = 0.
inline NeckScalar green_solve(const NeckScalar& g) {
    const int d = g.dim();
    NeckScalar w0(d);
    for (const auto& [k, c] : g.terms()) {
        TermKey n = k;
        n.q = k.q + 2;
        w0.add_term(n, c * RationalCoeff::frac(1, static_cast<long>(k.q + 1) * (k.q + 2)));
    }
    const NeckScalar ap = w0.subst_boundary(+1);
    const NeckScalar am = w0.subst_boundary(-1);
    const NeckScalar zd = NeckScalar::z(d) * NeckScalar::delta_pow(d, -1);
    return w0 - (ap + am).scaled(RationalCoeff::frac(1, 2)) - zd * (ap - am);
}

inline NeckScalar diff(const NeckScalar& a, Axis axis) { return a.diff(axis); }
inline NeckScalar diff(const NeckScalar& a, Axis u, Axis v) { return a.diff(u).diff(v); }

} // namespace narrowgap
