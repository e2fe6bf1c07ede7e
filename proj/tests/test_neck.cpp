#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "narrowgap/neck/field.hpp"

using namespace narrowgap;

namespace {

const RationalCoeff L = RationalCoeff::lambda();
const RationalCoeff M = RationalCoeff::mu();

NeckScalar X(int d = 2) { return NeckScalar::x(d, 0); }
NeckScalar Y() { return NeckScalar::x(3, 1); }
NeckScalar Z(int d = 2) { return NeckScalar::z(d); }
NeckScalar E(int d = 2) { return NeckScalar::eps(d); }
NeckScalar Dp(int k, int d = 2) { return NeckScalar::delta_pow(d, k); }
NeckScalar C(const RationalCoeff& c, int d = 2) { return NeckScalar::constant(d, c); }

NeckScalar random_scalar(std::mt19937& rng, int d, int max_q = 3) {
    std::uniform_int_distribution<int> e(0, 2), q(0, max_q), r(-1, 3), c(-5, 5), n(1, 4);
    NeckScalar a(d);
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
        TermKey k{{e(rng), d == 3 ? e(rng) : 0}, q(rng), e(rng) % 2, r(rng)};
        RationalCoeff coef = RationalCoeff(c(rng));
        if (i % 2 == 1) coef = coef * (L + M) / (L + 2 * M);
        a.add_term(k, coef);
    }
    return a;
}

mpq_class ev(const NeckScalar& a, mpq_class x, mpq_class z, mpq_class eps, mpq_class y = 0) {
    std::vector<mpq_class> xp{x};
    if (a.dim() == 3) xp.push_back(y);
    return a.eval(xp, z, eps, 2, 3);
}

} // namespace

TEST(Neck, AddMulScale) {
    EXPECT_TRUE(s_equal(Z() * Dp(-1) + Z() * Dp(-1), (Z() * Dp(-1)).scaled(2)));
    const NeckScalar xd = X() * Dp(-1);
    EXPECT_EQ((xd * xd).terms().begin()->first, (TermKey{{2, 0}, 0, 0, 2}));
    EXPECT_TRUE(Z().scaled(0).is_zero());
    EXPECT_THROW(X(2) + X(3), DimensionMismatch);
}

TEST(Neck, DiffExamples) {
    EXPECT_TRUE(s_equal(Dp(-1).diff(Axis::x1), (X() * Dp(-2)).scaled(-2)));
    EXPECT_TRUE(s_equal(diff(Z() * Dp(-1), Axis::x1, Axis::z), (X() * Dp(-2)).scaled(-2)));
    EXPECT_TRUE((X() * X() * E() * Dp(-3)).diff(Axis::z).is_zero());
    EXPECT_THROW(X().diff(Axis::x2), DimensionMismatch);
}

TEST(Neck, EvalExamples) {
    const NeckScalar p = Z() * Dp(-1) + C(RationalCoeff::frac(1, 2));
    EXPECT_EQ(ev(p, 0, mpq_class(1, 20), mpq_class(1, 10)), 1);
    EXPECT_EQ(ev(p, 0, mpq_class(-1, 20), mpq_class(1, 10)), 0);
    EXPECT_EQ(ev(X() * Dp(-2), 1, 7, 1), mpq_class(1, 4));
    EXPECT_THROW((C(RationalCoeff(1) / (L - 2))).eval({mpq_class(0)}, 0, 1, 2, 1), DomainError);
}

TEST(Neck, SemanticEquality) {
    EXPECT_TRUE(s_equal((E() + X() * X()) * Dp(-2), Dp(-1)));
    EXPECT_FALSE(s_equal(Z() * Dp(-1), Z() * E() * Dp(-2)));
    EXPECT_TRUE(s_equal(NeckScalar(2), NeckScalar(2)));
    EXPECT_TRUE(s_equal((E(3) + X(3) * X(3) + Y() * Y()) * Dp(-3, 3), Dp(-2, 3)));
    EXPECT_FALSE(s_equal((E(3) + X(3) * X(3)) * Dp(-3, 3), Dp(-2, 3)));
}

TEST(Neck, BoundarySubstitution) {
    const NeckScalar quad = Z() * Z() - Dp(2).scaled(RationalCoeff::frac(1, 4));
    EXPECT_TRUE(is_semantic_zero(quad.subst_boundary(+1)));
    const NeckScalar p = Z() * Dp(-1) + C(RationalCoeff::frac(1, 2));
    EXPECT_TRUE(s_equal(p.subst_boundary(+1), C(1)));
    EXPECT_TRUE(is_semantic_zero(p.subst_boundary(-1)));
    const NeckScalar cubic = (Z() * Z() * Z() * X()).subst_boundary(-1);
    for (const auto& [k, c] : cubic.terms()) EXPECT_EQ(k.q, 0);
}

TEST(Neck, GreenSolveExamples) {
    EXPECT_TRUE(s_equal(green_solve(C(2)), Z() * Z() - Dp(2).scaled(RationalCoeff::frac(1, 4))));
    EXPECT_TRUE(green_solve(NeckScalar(2)).is_zero());
    const RationalCoeff k = (L + M) / (L + 2 * M);
    const NeckScalar src = diff(Z() * Dp(-1), Axis::x1, Axis::z).scaled(-k);
    const NeckScalar expect =
        (X() * Dp(-2) * (Z() * Z() - Dp(2).scaled(RationalCoeff::frac(1, 4)))).scaled(k);
    EXPECT_TRUE(s_equal(green_solve(src), expect));
}

TEST(Neck, OrderExamples) {
    EXPECT_EQ(((X() * Z() * Dp(-2))).neck_order(), mpq_class(-1, 2));
    EXPECT_EQ((Z() * Dp(-1)).neck_order(), 0);
    EXPECT_EQ((E() * X() * X() * Dp(-3)).neck_order(), -1);
    EXPECT_THROW(NeckScalar(2).neck_order(), DomainError);
    // Cancellation is seen by the normal form but not by the stored terms.
    const NeckScalar s = (E() + X() * X()) * Dp(-3) - Dp(-2);
    EXPECT_THROW(s.neck_order(), DomainError);
}

TEST(Neck, ZDegree) {
    EXPECT_EQ((Z() * Dp(-1) + C(1)).z_degree(), 1);
    EXPECT_EQ((Z() * Z() - Dp(2).scaled(RationalCoeff::frac(1, 4))).z_degree(), 2);
    EXPECT_EQ(NeckScalar(2).z_degree(), -1);
}

TEST(Neck, RingAxiomsAndMixedPartials) {
    std::mt19937 rng(1234);
    for (int d : {2, 3}) {
        for (int it = 0; it < 40; ++it) {
            const NeckScalar a = random_scalar(rng, d), b = random_scalar(rng, d), c = random_scalar(rng, d);
            EXPECT_TRUE(s_equal(a * (b + c), a * b + a * c));
            EXPECT_TRUE(s_equal((a * b) * c, a * (b * c)));
            EXPECT_TRUE(s_equal(a + b, b + a));
            EXPECT_TRUE(s_equal(diff(a, Axis::x1, Axis::z), diff(a, Axis::z, Axis::x1)));
            if (d == 3) {
                EXPECT_TRUE(s_equal(diff(a, Axis::x1, Axis::x2), diff(a, Axis::x2, Axis::x1)));
            }
            // Leibniz rule ties diff to mul.
            EXPECT_TRUE(s_equal((a * b).diff(Axis::x1), a.diff(Axis::x1) * b + a * b.diff(Axis::x1)));
        }
    }
}

TEST(Neck, GreenSolveContract) {
    std::mt19937 rng(77);
    for (int d : {2, 3}) {
        for (int it = 0; it < 40; ++it) {
            const NeckScalar g = random_scalar(rng, d);
            const NeckScalar w = green_solve(g);
            EXPECT_TRUE(s_equal(diff(w, Axis::z, Axis::z), g));
            EXPECT_TRUE(is_semantic_zero(w.subst_boundary(+1)));
            EXPECT_TRUE(is_semantic_zero(w.subst_boundary(-1)));
        }
    }
}

TEST(Neck, EvalRespectsEquality) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> u(-20, 20);
    for (int it = 0; it < 40; ++it) {
        const NeckScalar a = random_scalar(rng, 3), b = random_scalar(rng, 3);
        // Two different representations of the same function.
        const NeckScalar lhs = (a + b) * (E(3) + X(3) * X(3) + Y() * Y()) * Dp(-1, 3);
        const NeckScalar rhs = a + b;
        ASSERT_TRUE(s_equal(lhs, rhs));
        const mpq_class x(u(rng), 13), y(u(rng), 17), z(u(rng), 50), e(1 + std::abs(u(rng)), 40);
        EXPECT_EQ(ev(lhs, x, z, e, y), ev(rhs, x, z, e, y));
    }
}

TEST(Neck, ExactDerivativeMatchesDifferenceQuotientLimit) {
    // Exact rational check: for a polynomial in x1, the symmetric quotient with step h
    // differs from the derivative by O(h^2); halving h shrinks the gap by ~4.
    std::mt19937 rng(11);
    for (int it = 0; it < 10; ++it) {
        const NeckScalar a = random_scalar(rng, 2);
        const NeckScalar da = a.diff(Axis::x1);
        const mpq_class x(3, 7), z(1, 50), e(1, 5);
        auto gap = [&](mpq_class h) -> mpq_class {
            mpq_class fd = (ev(a, x + h, z, e) - ev(a, x - h, z, e)) / (2 * h);
            return abs(fd - ev(da, x, z, e));
        };
        const mpq_class g1 = gap(mpq_class(1, 1000)), g2 = gap(mpq_class(1, 2000));
        if (sgn(g1) == 0) continue;
        EXPECT_NEAR(mpq_class(g1 / g2).get_d(), 4.0, 0.05);
    }
}

TEST(Neck, OrderBoundSoundness) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 60; ++it) {
        const NeckScalar a = random_scalar(rng, 3);
        if (is_semantic_zero(a)) continue;
        const double order = a.neck_order().get_d();
        const NormalForm nf = a.canonical();
        double K = 0;
        for (const auto& [m, c] : nf.poly) K += std::abs(c.eval_float<double>(2, 3));
        K = K / std::abs(nf.D.eval_float<double>(2, 3)) * (1 + 1e-9);
        const auto comp = a.compile<double>(2, 3);
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            for (int s = 0; s < 20; ++s) {
                NeckPoint<double> pt;
                pt.eps = eps;
                pt.x = {u(rng) * std::sqrt(eps) * 3, u(rng) * std::sqrt(eps) * 3};
                const double delta = eps + pt.x[0] * pt.x[0] + pt.x[1] * pt.x[1];
                pt.z = u(rng) * delta / 2;
                EXPECT_LE(std::abs(comp(pt)), K * std::pow(delta, order));
            }
        }
    }
}

TEST(Neck, RenderAndJson) {
    const NeckScalar a = (X() * Dp(-2)).scaled((L + M) / (L + 2 * M));
    EXPECT_EQ(a.str(), "((l + m)) / ((l + 2*m)) * x1 * delta^-2");
    const NeckScalar b = NeckScalar::from_json(2, a.to_json());
    EXPECT_EQ(b.terms(), a.terms());
    EXPECT_EQ(NeckScalar(2).str(), "0");
}
