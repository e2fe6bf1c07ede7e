#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "narrowgap/coeff/upoly.hpp"
#include "narrowgap/error.hpp"

namespace narrowgap {

/// Integer polynomial in the Lame parameters. Keys are (deg_lambda, deg_mu).
class ParamPoly {
public:
    using Key = std::pair<int, int>;
    using Map = std::map<Key, mpz_class>;

    ParamPoly() = default;
    ParamPoly(long c) { add_term({0, 0}, mpz_class(c)); }
    ParamPoly(const mpz_class& c) { add_term({0, 0}, c); }

    static ParamPoly lambda() { return monomial(1, 0); }
    static ParamPoly mu() { return monomial(0, 1); }
    static ParamPoly monomial(int dl, int dm, const mpz_class& c = 1) {
        ParamPoly p;
        p.add_term({dl, dm}, c);
        return p;
    }

    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && t_.begin()->first == Key{0, 0}); }
    mpz_class constant_value() const {
        auto it = t_.find({0, 0});
        return it == t_.end() ? mpz_class(0) : it->second;
    }
    int total_degree() const {
        int d = -1;
        for (const auto& [k, c] : t_) d = std::max(d, k.first + k.second);
        return d;
    }

    // Leading term under graded lex with lambda > mu.
    std::pair<Key, mpz_class> leading() const {
        if (t_.empty()) return {{0, 0}, 0};
        auto best = t_.begin();
        for (auto it = t_.begin(); it != t_.end(); ++it) {
            const int db = best->first.first + best->first.second;
            const int di = it->first.first + it->first.second;
            if (di > db || (di == db && it->first.first > best->first.first)) best = it;
        }
        return *best;
    }

    void add_term(const Key& k, const mpz_class& c) {
        if (sgn(c) == 0) return;
        auto [it, inserted] = t_.try_emplace(k, c);
        if (!inserted) {
            it->second += c;
            if (sgn(it->second) == 0) t_.erase(it);
        }
    }

    friend bool operator==(const ParamPoly& a, const ParamPoly& b) { return a.t_ == b.t_; }
    friend bool operator!=(const ParamPoly& a, const ParamPoly& b) { return !(a == b); }

    ParamPoly& operator+=(const ParamPoly& b) {
        for (const auto& [k, c] : b.t_) add_term(k, c);
        return *this;
    }
    ParamPoly& operator-=(const ParamPoly& b) {
        for (const auto& [k, c] : b.t_) add_term(k, -c);
        return *this;
    }
    friend ParamPoly operator+(ParamPoly a, const ParamPoly& b) { return a += b; }
    friend ParamPoly operator-(ParamPoly a, const ParamPoly& b) { return a -= b; }
    friend ParamPoly operator-(const ParamPoly& a) {
        ParamPoly r;
        for (const auto& [k, c] : a.t_) r.t_.emplace(k, -c);
        return r;
    }
    friend ParamPoly operator*(const ParamPoly& a, const ParamPoly& b) {
        ParamPoly r;
        for (const auto& [ka, ca] : a.t_)
            for (const auto& [kb, cb] : b.t_)
                r.add_term({ka.first + kb.first, ka.second + kb.second}, ca * cb);
        return r;
    }
    ParamPoly scaled(const mpz_class& s) const {
        ParamPoly r;
        if (sgn(s) == 0) return r;
        for (const auto& [k, c] : t_) r.t_.emplace(k, c * s);
        return r;
    }
    ParamPoly divided_exact(const mpz_class& s) const {
        ParamPoly r;
        for (const auto& [k, c] : t_) r.t_.emplace(k, detail::exact_div(c, s));
        return r;
    }
    ParamPoly pow(int n) const {
        ParamPoly r(1);
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }

    mpz_class content() const {
        mpz_class g = 0;
        for (const auto& [k, c] : t_) {
            g = detail::ring_gcd(g, c);
            if (g == 1) break;
        }
        return g;
    }

    mpq_class eval(const mpq_class& l, const mpq_class& m) const {
        mpq_class s = 0;
        for (const auto& [k, c] : t_) {
            mpq_class v(c);
            for (int i = 0; i < k.first; ++i) v *= l;
            for (int i = 0; i < k.second; ++i) v *= m;
            s += v;
        }
        return s;
    }

    template <class F>
    F eval_float(F l, F m) const {
        F s = 0;
        for (const auto& [k, c] : t_) {
            F v = static_cast<F>(c.get_d());
            for (int i = 0; i < k.first; ++i) v *= l;
            for (int i = 0; i < k.second; ++i) v *= m;
            s += v;
        }
        return s;
    }

    // Polynomial in lambda whose coefficients are polynomials in mu.
    using Nested = detail::UPoly<detail::UPoly<mpz_class>>;

    Nested nested() const {
        int dl = -1;
        for (const auto& [k, c] : t_) dl = std::max(dl, k.first);
        std::vector<std::vector<mpz_class>> rows(static_cast<size_t>(dl + 1));
        for (const auto& [k, c] : t_) {
            auto& row = rows[static_cast<size_t>(k.first)];
            if (row.size() <= static_cast<size_t>(k.second)) row.resize(static_cast<size_t>(k.second) + 1);
            row[static_cast<size_t>(k.second)] = c;
        }
        std::vector<detail::UPoly<mpz_class>> outer;
        outer.reserve(rows.size());
        for (auto& r : rows) outer.emplace_back(std::move(r));
        return Nested(std::move(outer));
    }

    static ParamPoly from_nested(const Nested& n) {
        ParamPoly p;
        for (int i = 0; i <= n.degree(); ++i) {
            const auto& inner = n.coeffs()[static_cast<size_t>(i)];
            for (int j = 0; j <= inner.degree(); ++j) p.add_term({i, j}, inner.coeffs()[static_cast<size_t>(j)]);
        }
        return p;
    }

    /// Plain rendering, terms in decreasing graded-lex order, e.g. "l^2 - 3*l*m + 2".
    std::string str() const;

private:
    Map t_;
};

inline ParamPoly poly_gcd(const ParamPoly& a, const ParamPoly& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_constant() || b.is_constant()) return ParamPoly(detail::ring_gcd(a.content(), b.content()));
    return ParamPoly::from_nested(detail::ring_gcd(a.nested(), b.nested()));
}

inline ParamPoly poly_exact_div(const ParamPoly& a, const ParamPoly& b) {
    if (b.is_zero()) throw DomainError("polynomial division by zero");
    if (b.is_constant()) return a.divided_exact(b.constant_value());
    return ParamPoly::from_nested(detail::exact_div(a.nested(), b.nested()));
}

inline std::string ParamPoly::str() const {
    if (t_.empty()) return "0";
    std::vector<std::pair<Key, mpz_class>> order(t_.begin(), t_.end());
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        const int dx = x.first.first + x.first.second, dy = y.first.first + y.first.second;
        if (dx != dy) return dx > dy;
        return x.first.first > y.first.first;
    });
    std::string out;
    bool first = true;
    for (const auto& [k, c] : order) {
        mpz_class mag = abs(c);
        if (first) {
            if (sgn(c) < 0) out += "-";
        } else {
            out += sgn(c) < 0 ? " - " : " + ";
        }
        first = false;
        std::string mono;
        auto factor = [&mono](const char* v, int e) {
            if (e == 0) return;
            if (!mono.empty()) mono += "*";
            mono += v;
            if (e > 1) mono += "^" + std::to_string(e);
        };
        factor("l", k.first);
        factor("m", k.second);
        if (mono.empty()) out += mag.get_str();
        else if (mag == 1) out += mono;
        else out += mag.get_str() + "*" + mono;
    }
    return out;
}

} // namespace narrowgap
