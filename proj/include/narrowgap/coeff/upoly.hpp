#pragma once

// Dense univariate polynomials over a GCD domain. Nesting UPoly<UPoly<mpz_class>>
// gives the bivariate integer polynomials used for the Lame parameter field,
// with the gcd computed recursively by content / primitive-part splitting and
// the primitive pseudo-remainder sequence.

#include <gmpxx.h>

#include <algorithm>
#include <cassert>
#include <utility>
#include <vector>

#include "narrowgap/error.hpp"

namespace narrowgap::detail {

inline bool is_zero(const mpz_class& a) { return sgn(a) == 0; }
inline int lead_sign(const mpz_class& a) { return sgn(a); }
inline mpz_class ring_gcd(const mpz_class& a, const mpz_class& b) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}
inline mpz_class exact_div(const mpz_class& a, const mpz_class& b) {
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}
inline bool is_one(const mpz_class& a) { return a == 1; }

template <class R>
class UPoly {
public:
    UPoly() = default;
    explicit UPoly(R constant) {
        if (!is_zero(constant)) c_.push_back(std::move(constant));
    }
    explicit UPoly(std::vector<R> coeffs) : c_(std::move(coeffs)) { trim(); }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool zero() const { return c_.empty(); }
    const R& lead() const { return c_.back(); }
    const std::vector<R>& coeffs() const { return c_; }
    R coeff(int i) const { return (i >= 0 && i <= degree()) ? c_[static_cast<size_t>(i)] : R{}; }

    friend bool operator==(const UPoly& a, const UPoly& b) { return a.c_ == b.c_; }

    friend UPoly operator+(const UPoly& a, const UPoly& b) {
        std::vector<R> out(std::max(a.c_.size(), b.c_.size()));
        for (size_t i = 0; i < out.size(); ++i) {
            if (i < a.c_.size()) out[i] = a.c_[i];
            if (i < b.c_.size()) out[i] = out[i] + b.c_[i];
        }
        return UPoly(std::move(out));
    }
    friend UPoly operator-(const UPoly& a) {
        std::vector<R> out;
        out.reserve(a.c_.size());
        for (const auto& x : a.c_) out.push_back(R{} - x);
        return UPoly(std::move(out));
    }
    friend UPoly operator-(const UPoly& a, const UPoly& b) { return a + (-b); }
    friend UPoly operator*(const UPoly& a, const UPoly& b) {
        if (a.zero() || b.zero()) return {};
        std::vector<R> out(a.c_.size() + b.c_.size() - 1);
        for (size_t i = 0; i < a.c_.size(); ++i) {
            if (is_zero(a.c_[i])) continue;
            for (size_t j = 0; j < b.c_.size(); ++j) out[i + j] = out[i + j] + a.c_[i] * b.c_[j];
        }
        return UPoly(std::move(out));
    }
    UPoly scaled(const R& s) const {
        std::vector<R> out;
        out.reserve(c_.size());
        for (const auto& x : c_) out.push_back(x * s);
        return UPoly(std::move(out));
    }
    UPoly divided_exact(const R& s) const {
        std::vector<R> out;
        out.reserve(c_.size());
        for (const auto& x : c_) out.push_back(exact_div(x, s));
        return UPoly(std::move(out));
    }
    UPoly shifted(int k) const {
        if (zero()) return {};
        std::vector<R> out(static_cast<size_t>(k), R{});
        out.insert(out.end(), c_.begin(), c_.end());
        return UPoly(std::move(out));
    }

private:
    void trim() {
        while (!c_.empty() && is_zero(c_.back())) c_.pop_back();
    }
    std::vector<R> c_;
};

template <class R> bool is_zero(const UPoly<R>& a) { return a.zero(); }
template <class R> bool is_one(const UPoly<R>& a) { return a.degree() == 0 && is_one(a.lead()); }
template <class R> int lead_sign(const UPoly<R>& a) { return a.zero() ? 0 : lead_sign(a.lead()); }

template <class R>
UPoly<R> operator*(const UPoly<R>& a, int s) { return a.scaled(R(s)); }

template <class R>
R content(const UPoly<R>& a) {
    R g{};
    for (const auto& x : a.coeffs()) {
        g = ring_gcd(g, x);
        if (is_one(g)) break;
    }
    return g;
}

// Pseudo-remainder: lc(b)^(deg a - deg b + 1) * a mod b.
template <class R>
UPoly<R> prem(UPoly<R> a, const UPoly<R>& b) {
    assert(!b.zero());
    const int db = b.degree();
    int steps = a.degree() - db + 1;
    while (!a.zero() && a.degree() >= db) {
        const int shift = a.degree() - db;
        const R la = a.lead();
        a = a.scaled(b.lead()) - b.scaled(la).shifted(shift);
        --steps;
    }
    for (; steps > 0; --steps) a = a.scaled(b.lead());
    return a;
}

template <class R>
UPoly<R> primitive_part(const UPoly<R>& a) {
    if (a.zero()) return a;
    R c = content(a);
    if (lead_sign(a) * lead_sign(c) < 0) c = R{} - c;
    return is_one(c) ? a : a.divided_exact(c);
}

template <class R>
UPoly<R> ring_gcd(const UPoly<R>& a, const UPoly<R>& b) {
    if (a.zero() && b.zero()) return {};
    if (a.zero()) return primitive_part(b).scaled(content(b));
    if (b.zero()) return primitive_part(a).scaled(content(a));
    R c = ring_gcd(content(a), content(b));
    UPoly<R> p = primitive_part(a);
    UPoly<R> q = primitive_part(b);
    if (p.degree() < q.degree()) std::swap(p, q);
    while (!q.zero()) {
        UPoly<R> r = prem(p, q);
        p = std::move(q);
        q = r.zero() ? r : primitive_part(r);
    }
    UPoly<R> g = primitive_part(p);
    g = g.scaled(c);
    if (lead_sign(g) < 0) g = -g;
    return g;
}

// Exact polynomial division; the caller guarantees that b divides a.
template <class R>
UPoly<R> exact_div(UPoly<R> a, const UPoly<R>& b) {
    if (b.zero()) throw DomainError("polynomial division by zero");
    if (a.zero()) return a;
    std::vector<R> q(static_cast<size_t>(std::max(0, a.degree() - b.degree() + 1)));
    while (!a.zero()) {
        const int shift = a.degree() - b.degree();
        if (shift < 0) throw DomainError("inexact polynomial division");
        R t = exact_div(a.lead(), b.lead());
        a = a - b.scaled(t).shifted(shift);
        q[static_cast<size_t>(shift)] = std::move(t);
    }
    return UPoly<R>(std::move(q));
}

} // namespace narrowgap::detail
