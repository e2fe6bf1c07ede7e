#include <gtest/gtest.h>

#include <random>

#include "narrowgap/coeff/rational_coeff.hpp"

using narrowgap::DomainError;
using narrowgap::ParamPoly;
using narrowgap::RationalCoeff;

namespace {

const RationalCoeff L = RationalCoeff::lambda();
const RationalCoeff M = RationalCoeff::mu();

ParamPoly random_poly(std::mt19937& rng, int max_deg) {
    std::uniform_int_distribution<int> deg(0, max_deg), coef(-4, 4);
    ParamPoly p;
    const int n = 1 + deg(rng);
    for (int i = 0; i < n; ++i) {
        const int a = deg(rng), b = deg(rng);
        if (a + b > max_deg) continue;
        p.add_term({a, b}, coef(rng));
    }
    return p;
}

RationalCoeff random_coeff(std::mt19937& rng) {
    ParamPoly n = random_poly(rng, 2);
    ParamPoly d = random_poly(rng, 2);
    if (d.is_zero()) d = ParamPoly(1);
    return RationalCoeff(n, d);
}

} // namespace

TEST(Coeff, ArithmeticExamples) {
    EXPECT_EQ((L + M) / (L + 2 * M) + M / (L + 2 * M), RationalCoeff(1));
    EXPECT_EQ(((L + M) / M) * (M / (L + M)), RationalCoeff(1));
    EXPECT_TRUE(((L + M) - L - M).is_zero());
    EXPECT_THROW(L / RationalCoeff(0), DomainError);
}

TEST(Coeff, EvalExamples) {
    const RationalCoeff a = (2 * L + 3 * M) / (3 * (L + 2 * M));
    EXPECT_EQ(a.eval(1, 1), mpq_class(5, 9));
    EXPECT_EQ(((L + M) / (L + 2 * M)).eval(0, 1), mpq_class(1, 2));
    EXPECT_THROW((RationalCoeff(1) / M).eval(1, 0), DomainError);
}

TEST(Coeff, IsZeroExamples) {
    EXPECT_TRUE(RationalCoeff(0).is_zero());
    EXPECT_TRUE(((L * M - M * L) / (L + 2 * M)).is_zero());
    EXPECT_FALSE(((L - M) / M).is_zero());
}

TEST(Coeff, RenderAndParse) {
    const RationalCoeff a = (2 * L + 3 * M) / (3 * (L + 2 * M));
    EXPECT_EQ(a.str(), "((2*l + 3*m)) / (3*(l + 2*m))");
    EXPECT_EQ(RationalCoeff::parse(a.str()), a);
    EXPECT_EQ(RationalCoeff(0).str(), "(0)");
    EXPECT_EQ(RationalCoeff::frac(-4, 6).str(), "(-2) / (3)");
    EXPECT_EQ((-(L + M) / M).str(), "(-(l + m)) / ((m))");
    EXPECT_EQ(RationalCoeff::parse("l^2 - m^2").str(), "((l^2 - m^2))");
    EXPECT_THROW(RationalCoeff::parse("l + "), narrowgap::ConfigError);
    EXPECT_THROW(RationalCoeff::parse("x"), narrowgap::ConfigError);
}

TEST(Coeff, GcdReduces) {
    const RationalCoeff a = RationalCoeff((L * L - M * M).num(), (L + M).num());
    EXPECT_EQ(a, L - M);
    const RationalCoeff b = RationalCoeff((6 * L * M + 4 * M * M).num(), (-2 * M * (L + M)).num());
    EXPECT_EQ(b.den(), (L + M).num());
    EXPECT_EQ(b.num(), (-3 * L - 2 * M).num());
}

TEST(Coeff, FieldAxiomsOnRandomInstances) {
    std::mt19937 rng(20240611);
    for (int it = 0; it < 200; ++it) {
        const RationalCoeff a = random_coeff(rng), b = random_coeff(rng), c = random_coeff(rng);
        EXPECT_EQ((a + b) + c, a + (b + c));
        EXPECT_EQ(a * (b + c), a * b + a * c);
        EXPECT_EQ(a * b, b * a);
        if (!a.is_zero()) {
            EXPECT_EQ(a * a.inverse(), RationalCoeff(1));
        }
        EXPECT_TRUE((a - a).is_zero());
    }
}

TEST(Coeff, EvalIsHomomorphism) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pt(-9, 9);
    int checked = 0;
    for (int it = 0; it < 300; ++it) {
        const RationalCoeff a = random_coeff(rng), b = random_coeff(rng);
        const mpq_class l(pt(rng), 3), m(pt(rng) + 20, 7);
        try {
            const mpq_class va = a.eval(l, m), vb = b.eval(l, m);
            EXPECT_EQ((a + b).eval(l, m), va + vb);
            EXPECT_EQ((a - b).eval(l, m), va - vb);
            EXPECT_EQ((a * b).eval(l, m), va * vb);
            if (sgn(vb) != 0) {
                mpq_class q = va / vb;
                q.canonicalize();
                EXPECT_EQ((a / b).eval(l, m), q);
            }
            ++checked;
        } catch (const DomainError&) {
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(Coeff, CanonicalAcrossArithmeticPaths) {
    std::mt19937 rng(99);
    for (int it = 0; it < 100; ++it) {
        const RationalCoeff a = random_coeff(rng), b = random_coeff(rng);
        if (b.is_zero()) continue;
        const RationalCoeff p1 = (a + b) * (a - b);
        const RationalCoeff p2 = a * a - b * b;
        EXPECT_EQ(p1.num(), p2.num());
        EXPECT_EQ(p1.den(), p2.den());
        EXPECT_EQ((a / b) * b, a);
        EXPECT_EQ(RationalCoeff::parse(p1.str()), p1);
    }
}

TEST(Coeff, LeadingDenominatorPositive) {
    const RationalCoeff a = RationalCoeff(1) / (RationalCoeff(0) - L - 2 * M);
    EXPECT_GT(sgn(a.den().leading().second), 0);
    EXPECT_EQ(a.str(), "(-1) / ((l + 2*m))");
}
