#pragma once

#include <gmpxx.h>

#include <cctype>
#include <ostream>
#include <string>
#include <string_view>

#include "narrowgap/coeff/param_poly.hpp"
#include "narrowgap/error.hpp"

namespace narrowgap {

/// Element of Q(lambda, mu), kept reduced with a positive leading denominator.
class RationalCoeff {
public:
    RationalCoeff() : num_(), den_(1) {}
    RationalCoeff(long c) : num_(c), den_(1) {}
    RationalCoeff(const mpz_class& c) : num_(c), den_(1) {}
    RationalCoeff(const mpq_class& q) : num_(q.get_num()), den_(q.get_den()) {}
    RationalCoeff(ParamPoly num) : num_(std::move(num)), den_(1) {}
    RationalCoeff(ParamPoly num, ParamPoly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }

    static RationalCoeff lambda() { return RationalCoeff(ParamPoly::lambda()); }
    static RationalCoeff mu() { return RationalCoeff(ParamPoly::mu()); }
    static RationalCoeff frac(long n, long d) { return RationalCoeff(ParamPoly(n), ParamPoly(d)); }

    const ParamPoly& num() const { return num_; }
    const ParamPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_ == den_; }
    bool is_rational_constant() const { return num_.is_constant() && den_.is_constant(); }

    friend bool operator==(const RationalCoeff& a, const RationalCoeff& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const RationalCoeff& a, const RationalCoeff& b) { return !(a == b); }

    friend RationalCoeff operator+(const RationalCoeff& a, const RationalCoeff& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return RationalCoeff(a.num_ + b.num_, a.den_);
        return RationalCoeff(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalCoeff operator-(const RationalCoeff& a) {
        RationalCoeff r = a;
        r.num_ = -r.num_;
        return r;
    }
    friend RationalCoeff operator-(const RationalCoeff& a, const RationalCoeff& b) { return a + (-b); }
    friend RationalCoeff operator*(const RationalCoeff& a, const RationalCoeff& b) {
        if (a.is_zero() || b.is_zero()) return {};
        // Cross-cancel first so that the final gcd works on smaller inputs.
        ParamPoly g1 = poly_gcd(a.num_, b.den_);
        ParamPoly g2 = poly_gcd(b.num_, a.den_);
        ParamPoly n = poly_exact_div(a.num_, g1) * poly_exact_div(b.num_, g2);
        ParamPoly d = poly_exact_div(a.den_, g2) * poly_exact_div(b.den_, g1);
        RationalCoeff r;
        r.num_ = std::move(n);
        r.den_ = std::move(d);
        r.fix_sign();
        return r;
    }
    RationalCoeff inverse() const {
        if (is_zero()) throw DomainError("division by the zero coefficient");
        return RationalCoeff(den_, num_);
    }
    friend RationalCoeff operator/(const RationalCoeff& a, const RationalCoeff& b) { return a * b.inverse(); }

    RationalCoeff& operator+=(const RationalCoeff& b) { return *this = *this + b; }
    RationalCoeff& operator-=(const RationalCoeff& b) { return *this = *this - b; }
    RationalCoeff& operator*=(const RationalCoeff& b) { return *this = *this * b; }
    RationalCoeff& operator/=(const RationalCoeff& b) { return *this = *this / b; }

    mpq_class eval(const mpq_class& l, const mpq_class& m) const {
        mpq_class d = den_.eval(l, m);
        if (sgn(d) == 0) throw DomainError("coefficient " + str() + " has a pole at the requested (lambda, mu)");
        mpq_class r = num_.eval(l, m) / d;
        r.canonicalize();
        return r;
    }

    template <class F>
    F eval_float(F l, F m) const {
        F d = den_.eval_float(l, m);
        if (d == F(0)) throw DomainError("coefficient " + str() + " has a pole at the requested (lambda, mu)");
        return num_.eval_float(l, m) / d;
    }

    /// "(num) / (den)" with each side shown as content*(primitive part).
    std::string str() const {
        if (den_ == ParamPoly(1)) return "(" + factored(num_) + ")";
        return "(" + factored(num_) + ") / (" + factored(den_) + ")";
    }

    static RationalCoeff parse(std::string_view text);

private:
    void normalize() {
        if (den_.is_zero()) throw DomainError("zero denominator");
        if (num_.is_zero()) {
            den_ = ParamPoly(1);
            return;
        }
        if (!(den_ == ParamPoly(1))) {
            ParamPoly g = poly_gcd(num_, den_);
            if (!(g == ParamPoly(1)) && !(g == ParamPoly(-1))) {
                num_ = poly_exact_div(num_, g);
                den_ = poly_exact_div(den_, g);
            }
        }
        fix_sign();
    }
    void fix_sign() {
        if (sgn(den_.leading().second) < 0) {
            num_ = -num_;
            den_ = -den_;
        }
    }

    static std::string factored(const ParamPoly& p) {
        if (p.is_constant()) return p.constant_value().get_str();
        mpz_class c = p.content();
        if (sgn(p.leading().second) < 0) c = -c;
        const ParamPoly prim = p.divided_exact(c);
        if (c == 1) return "(" + prim.str() + ")";
        if (c == -1) return "-(" + prim.str() + ")";
        return c.get_str() + "*(" + prim.str() + ")";
    }

    ParamPoly num_;
    ParamPoly den_;
};

inline std::ostream& operator<<(std::ostream& os, const RationalCoeff& c) { return os << c.str(); }

namespace detail {

class CoeffParser {
public:
    explicit CoeffParser(std::string_view s) : s_(s) {}

    RationalCoeff run() {
        RationalCoeff v = expr();
        skip();
        if (pos_ != s_.size()) fail("trailing input");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("cannot parse coefficient '" + std::string(s_) + "' at offset " + std::to_string(pos_) +
                          ": " + what);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    RationalCoeff expr() {
        RationalCoeff v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }
    RationalCoeff term() {
        RationalCoeff v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }
    RationalCoeff unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        RationalCoeff base = primary();
        if (eat('^')) {
            skip();
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected exponent");
            int e = std::stoi(std::string(s_.substr(start, pos_ - start)));
            RationalCoeff r(1);
            for (int i = 0; i < e; ++i) r *= base;
            return r;
        }
        return base;
    }
    RationalCoeff primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            RationalCoeff v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (c == 'l') {
            ++pos_;
            return RationalCoeff::lambda();
        }
        if (c == 'm') {
            ++pos_;
            return RationalCoeff::mu();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return RationalCoeff(mpz_class(std::string(s_.substr(start, pos_ - start))));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    size_t pos_ = 0;
};

} // namespace detail

inline RationalCoeff RationalCoeff::parse(std::string_view text) { return detail::CoeffParser(text).run(); }

} // namespace narrowgap
