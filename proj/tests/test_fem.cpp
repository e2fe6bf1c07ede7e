#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "narrowgap/fem/solve.hpp"

using namespace narrowgap;
using namespace narrowgap::fem;

namespace {

Geometry geom(double eps) {
    Geometry g;
    g.eps = eps;
    return g;
}

Point linear_field(const Point& p) { return {0.3 + 1.1 * p[0] - 0.4 * p[1], -0.2 + 0.7 * p[0] + 0.25 * p[1]}; }

// u = grad(e^x cos y): divergence-free and harmonic, so it solves the Lame system for any lambda, mu.
Point harmonic_field(const Point& p) { return {std::exp(p[0]) * std::cos(p[1]), -std::exp(p[0]) * std::sin(p[1])}; }
Gradient harmonic_grad(const Point& p) {
    const double c = std::exp(p[0]) * std::cos(p[1]), s = std::exp(p[0]) * std::sin(p[1]);
    return {{{c, -s}, {-s, -c}}};
}

Constraints all_boundary(const Mesh& m, const VectorFunction& f) {
    Constraints c(m.nodes.size());
    for (BoundaryTag t : {BoundaryTag::outer, BoundaryTag::incl1, BoundaryTag::incl2}) c.fix(m.boundary_nodes(t), m.nodes, f);
    return c;
}

} // namespace

TEST(Mesh, LayersAndQuality) {
    const Mesh m = generate_mesh(geom(0.1));
    EXPECT_GE(m.layers_at(0.0), 8);
    EXPECT_GT(m.min_quality(), 0.15);
    for (size_t e = 0; e < m.element_count(); ++e) ASSERT_GT(m.area(e), 0);
    EXPECT_EQ(m.count_region(Region::neck) + m.count_region(Region::bulk), m.element_count());
}

TEST(Mesh, ConformingAndClosedBoundary) {
    const Mesh m = generate_mesh(geom(0.05));
    std::map<std::pair<int, int>, int> uses;
    for (const auto& t : m.tris)
        for (int k = 0; k < 3; ++k) ++uses[std::minmax(t[k], t[(k + 1) % 3])];
    for (const auto& [e, n] : uses) ASSERT_LE(n, 2);
    // Every boundary vertex has exactly two boundary edges, and every node lies on its circle.
    std::map<int, int> degree;
    for (const auto& e : m.boundary) {
        ++degree[e.a];
        ++degree[e.b];
        for (int n : {e.a, e.b, e.mid}) {
            const Point& p = m.nodes[static_cast<size_t>(n)];
            const double r = e.tag == BoundaryTag::outer ? std::hypot(p[0], p[1])
                                                         : std::hypot(p[0] - m.geom.center(e.tag == BoundaryTag::incl1 ? 1 : 2)[0],
                                                                      p[1] - m.geom.center(e.tag == BoundaryTag::incl1 ? 1 : 2)[1]);
            EXPECT_NEAR(r, e.tag == BoundaryTag::outer ? 3.0 : 1.0, 1e-12);
        }
    }
    for (const auto& [v, d] : degree) ASSERT_EQ(d, 2);
}

TEST(Mesh, NeckCountGrowsSlowlyWithGap) {
    // Columns follow sqrt(delta): the count grows like log(1/eps), far below eps^-1/2.
    const size_t n1 = generate_mesh(geom(0.1)).count_region(Region::neck);
    const size_t n2 = generate_mesh(geom(0.05)).count_region(Region::neck);
    const size_t n3 = generate_mesh(geom(0.0125)).count_region(Region::neck);
    EXPECT_GT(n2, n1);
    EXPECT_GT(n3, n2);
    EXPECT_LT(static_cast<double>(n3) / n1, std::sqrt(8.0));
    EXPECT_EQ(generate_mesh(geom(0.0125)).layers_at(0.0), 8);
}

TEST(Mesh, Errors) {
    EXPECT_THROW(generate_mesh(geom(0.0)), DomainError);
    EXPECT_THROW(generate_mesh(geom(-0.1)), DomainError);
    EXPECT_THROW(generate_mesh(geom(1e-12)), DomainError);
    MeshParams odd;
    odd.nz = 7;
    EXPECT_THROW(generate_mesh(geom(0.1), odd), InvalidArgument);
    Geometry big = geom(0.1);
    big.R0 = 2.1;
    EXPECT_THROW(generate_mesh(big), DomainError);
}

TEST(Mesh, Deterministic) {
    const Mesh a = generate_mesh(geom(0.025)), b = generate_mesh(geom(0.025));
    EXPECT_EQ(a.nodes, b.nodes);
    EXPECT_EQ(a.tris, b.tris);
}

TEST(Mesh, ExportImportRoundTrip) {
    const Mesh m = generate_mesh(geom(0.1));
    std::stringstream ss;
    write_mesh(m, ss);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, std::to_string(m.node_count()) + " " + std::to_string(m.element_count()));
    ss.seekg(0);
    const Mesh r = read_mesh(ss, m.geom);
    EXPECT_EQ(r.nodes, m.nodes);
    EXPECT_EQ(r.tris, m.tris);
    EXPECT_EQ(r.region, m.region);
    EXPECT_EQ(r.boundary.size(), m.boundary.size());
    std::stringstream bad("3 1\n0 0 0\n1 1 0\n");
    EXPECT_THROW(read_mesh(bad, m.geom), IoError);
}

TEST(Mesh, FilledInclusions) {
    MeshParams p;
    p.fill_inclusions = true;
    const Mesh m = generate_mesh(geom(0.1), p);
    EXPECT_GT(m.count_region(Region::incl1), 0u);
    EXPECT_EQ(m.count_region(Region::incl1), m.count_region(Region::incl2));
    for (const auto& e : m.boundary) EXPECT_EQ(e.tag, BoundaryTag::outer);
    for (size_t e = 0; e < m.element_count(); ++e) ASSERT_GT(m.area(e), 0);
}

TEST(Assembly, SymmetricAndRigidKernel) {
    const auto m = make_mesh(geom(0.1));
    const SparseMatrix K = assemble(*m, Material{0.7, 1.3});
    EXPECT_LT((K - SparseMatrix(K.transpose())).norm(), 1e-12 * K.norm());
    for (int a = 1; a <= 3; ++a) {
        Eigen::VectorXd u(K.rows());
        for (size_t n = 0; n < m->nodes.size(); ++n) {
            const Point v = rigid_motion(a, m->nodes[n]);
            u[static_cast<Eigen::Index>(2 * n)] = v[0];
            u[static_cast<Eigen::Index>(2 * n + 1)] = v[1];
        }
        EXPECT_LT(std::fabs(u.dot(K * u)), 1e-10 * K.norm() * u.squaredNorm()) << a;
    }
}

TEST(Assembly, ParallelMatchesSequential) {
    const auto m = make_mesh(geom(0.05));
    const SparseMatrix a = assemble(*m, Material{}, AssemblyMode::sequential);
    const SparseMatrix b = assemble(*m, Material{}, AssemblyMode::parallel, 3);
    ASSERT_EQ(a.nonZeros(), b.nonZeros());
    EXPECT_EQ((a - b).norm(), 0.0);
}

TEST(Assembly, RejectsNonElliptic) {
    const auto m = make_mesh(geom(0.1));
    EXPECT_THROW(assemble(*m, Material{1.0, 0.0}), DomainError);
    EXPECT_THROW(assemble(*m, Material{-2.0, 1.0}), DomainError);
    EXPECT_NO_THROW(assemble(*m, Material{-1.0, 1.0}));
}

TEST(Solve, PatchTest) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{});
    const Solution s = P.solve(all_boundary(P.mesh(), linear_field));
    for (size_t n = 0; n < P.mesh().nodes.size(); ++n) {
        const Point exact = linear_field(P.mesh().nodes[n]);
        ASSERT_NEAR(s.field.node_value(n)[0], exact[0], 1e-10);
        ASSERT_NEAR(s.field.node_value(n)[1], exact[1], 1e-10);
    }
    const Gradient g = s.field.gradient({0.7, 1.9});
    EXPECT_NEAR(g[0][0], 1.1, 1e-9);
    EXPECT_NEAR(g[0][1], -0.4, 1e-9);
    EXPECT_NEAR(g[1][0], 0.7, 1e-9);
    EXPECT_NEAR(g[1][1], 0.25, 1e-9);
}

TEST(Solve, ManufacturedSolutionConvergesAtOrderTwo) {
    std::vector<double> err, h;
    for (auto [nz, grading] : std::vector<std::pair<int, double>>{{4, 0.3}, {8, 0.15}, {16, 0.075}}) {
        MeshParams p;
        p.nz = nz;
        p.grading = grading;
        const Material mat{1.0, 1.0};
        const ElasticProblem P(make_mesh(geom(0.1), p), mat);
        const Solution s = P.solve(all_boundary(P.mesh(), harmonic_field));
        err.push_back(energy_error(s.field, mat, harmonic_grad));
        h.push_back(grading);
    }
    for (size_t k = 1; k < err.size(); ++k) {
        const double rate = std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]);
        EXPECT_GT(rate, 1.8) << k;
        EXPECT_LT(rate, 2.5) << k;
    }
}

TEST(Solve, RigidDataGivesRigidSolution) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{});
    const auto psi3 = [](const Point& p) { return rigid_motion(3, p); };
    const Solution h = P.solve_hard_inclusion(psi3);
    EXPECT_LT(h.energy, 1e-18);
    EXPECT_NEAR(h.C(0, 2), 1.0, 1e-10);
    EXPECT_NEAR(h.C(1, 2), 1.0, 1e-10);
    EXPECT_NEAR(h.C(0, 0), 0.0, 1e-10);
    const Solution s = P.solve_holes(psi3);
    EXPECT_LT(s.energy, 1e-18);
    EXPECT_LT(frobenius(s.field.gradient({0, 0})) - std::sqrt(2.0), 1e-8);
}

TEST(Solve, ComponentSymmetry) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{});
    const Solution s = P.solve_component(1, 1);
    for (double x : {0.02, 0.1, 0.3}) {
        const Point a = s.field.value({x, 0.0}), b = s.field.value({-x, 0.0});
        EXPECT_NEAR(a[0], b[0], 1e-9);
        EXPECT_NEAR(a[1], -b[1], 1e-9);
    }
    // Leading neck behavior: d_z u1 = 1/delta at the gap center.
    EXPECT_NEAR(s.field.gradient({0, 0})[0][1] * 0.05, 1.0, 0.02);
    EXPECT_THROW(P.solve_component(3, 1), InvalidArgument);
    EXPECT_THROW(P.solve_component(1, 4), InvalidArgument);
}

TEST(Solve, ConstraintConsistency) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{});
    const Solution s = P.solve_hard_inclusion(default_phi);
    for (int i : {1, 2})
        for (int n : P.mesh().boundary_nodes(i == 1 ? BoundaryTag::incl1 : BoundaryTag::incl2)) {
            Point rigid{0, 0};
            for (int a = 1; a <= 3; ++a) {
                const Point psi = rigid_motion(a, P.mesh().nodes[static_cast<size_t>(n)]);
                rigid[0] += s.C(i - 1, a - 1) * psi[0];
                rigid[1] += s.C(i - 1, a - 1) * psi[1];
            }
            ASSERT_NEAR(s.field.node_value(static_cast<size_t>(n))[0], rigid[0], 1e-14);
            ASSERT_NEAR(s.field.node_value(static_cast<size_t>(n))[1], rigid[1], 1e-14);
        }
}

TEST(Solve, OddDataGivesEqualRotations) {
    const ElasticProblem P(make_mesh(geom(0.025)), Material{});
    const Solution s = P.solve_hard_inclusion(default_phi);
    EXPECT_LT(std::fabs(s.C(0, 2) - s.C(1, 2)), 1e-8 * s.C.norm());
    EXPECT_NEAR(s.C(0, 0), -s.C(1, 0), 1e-8 * s.C.norm());
    EXPECT_GT(std::fabs(s.C(0, 0) - s.C(1, 0)), 0.1);
}

TEST(Solve, EnergyBalanceAndReciprocity) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{0.5, 1.0});
    const Solution h = P.solve_holes(default_phi);
    EXPECT_NEAR(h.energy, h.boundary_work(BoundaryTag::outer), 1e-8 * h.energy);
    const Solution hard = P.solve_hard_inclusion(default_phi);
    EXPECT_NEAR(hard.energy, hard.boundary_work(BoundaryTag::outer), 1e-8 * hard.energy);
    for (int a = 1; a <= 3; ++a) {
        const Solution s = P.solve_component(1, a);
        EXPECT_NEAR(s.energy, s.boundary_work(BoundaryTag::incl1), 1e-8 * s.energy) << a;
    }
}

TEST(Solve, EnergyIsMinimal) {
    const ElasticProblem P(make_mesh(geom(0.05)), Material{});
    const Solution s = P.solve_holes(default_phi);
    const auto outer = P.mesh().boundary_nodes(BoundaryTag::outer);
    std::vector<char> fixed(P.mesh().nodes.size(), 0);
    for (int n : outer) fixed[static_cast<size_t>(n)] = 1;
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(s.field.coefficients().size());
        for (size_t n = 0; n < fixed.size(); ++n)
            if (!fixed[n]) {
                w[static_cast<Eigen::Index>(2 * n)] = nd(rng);
                w[static_cast<Eigen::Index>(2 * n + 1)] = nd(rng);
            }
        for (double t : {1e-3, -1e-3}) {
            const Eigen::VectorXd u = s.field.coefficients() + t * w;
            EXPECT_GE(0.5 * u.dot(P.stiffness() * u), s.energy);
        }
    }
}

TEST(Solve, DirectAndIterativeAgree) {
    const auto m = make_mesh(geom(0.1));
    SolverOptions cg;
    cg.kind = SolverKind::cg;
    const ElasticProblem direct(m, Material{}), iter(m, Material{}, cg);
    const Solution a = direct.solve_component(1, 1), b = iter.solve_component(1, 1);
    EXPECT_EQ(b.stats.method, "cg+ichol");
    EXPECT_LE(b.stats.relative_residual, 1e-10);
    for (Point p : {Point{0, 0}, Point{0.2, 0.01}, Point{1.5, 0.3}}) {
        const Gradient ga = a.field.gradient(p), gb = b.field.gradient(p);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(ga[i][j], gb[i][j], 1e-6 * (1 + std::fabs(ga[i][j])));
    }
}

TEST(Solve, LargeContrastApproachesHardInclusions) {
    MeshParams p;
    p.fill_inclusions = true;
    const Material mat;
    const Solution soft = ElasticProblem(make_mesh(geom(0.1), p), mat).solve_holes(default_phi);
    const Solution hard = ElasticProblem(make_mesh(geom(0.1)), mat).solve_hard_inclusion(default_phi);
    for (Point q : {Point{0, 0}, Point{1.2, 0.2}, Point{-0.3, 2.5}}) {
        const Gradient a = soft.field.gradient(q), b = hard.field.gradient(q);
        EXPECT_NEAR(frobenius(a), frobenius(b), 1e-3 * frobenius(b)) << q[0] << " " << q[1];
    }
    // Inclusion interiors move rigidly.
    const Gradient in = soft.field.gradient({0.0, 1.5});
    EXPECT_LT(std::fabs(in[0][0]) + std::fabs(in[1][1]) + std::fabs(in[0][1] + in[1][0]), 1e-4);
}

TEST(Sample, OwnerRuleAndOutside) {
    const ElasticProblem P(make_mesh(geom(0.1)), Material{});
    const Solution s = P.solve_component(1, 1);
    const auto hit = s.field.locator().locate({0.0, 0.0});
    // (0, 0) is a mesh vertex; the owner is the lowest-index element containing it.
    for (size_t e = 0; e < hit.element; ++e)
        for (int k = 0; k < 3; ++k) ASSERT_FALSE(P.mesh().nodes[static_cast<size_t>(P.mesh().tris[e][k])] == (Point{0.0, 0.0}));
    EXPECT_THROW(s.field.gradient({0.0, 1.0}), DomainError);
    EXPECT_THROW(s.field.value({3.5, 0.0}), DomainError);
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) EXPECT_NO_THROW(solve_component(geom(eps), Material{}, 1, 1).field.gradient({0, 0}));
}

TEST(Sample, FieldCsv) {
    const ElasticProblem P(make_mesh(geom(0.1)), Material{});
    const Solution s = P.solve(all_boundary(P.mesh(), linear_field));
    std::stringstream ss;
    s.field.write_csv(ss);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "x,y,u1,u2,g11,g12,g21,g22");
    std::getline(ss, line);
    std::vector<double> v;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) v.push_back(std::stod(c));
    ASSERT_EQ(v.size(), 8u);
    EXPECT_NEAR(v[4], 1.1, 1e-9);
    EXPECT_NEAR(v[7], 0.25, 1e-9);
}

TEST(Solve, GapCenterGradientIsMeshIndependent) {
    MeshParams fine;
    fine.nz = 16;
    fine.grading = 0.075;
    for (int a : {1, 3}) {
        const Gradient g0 = solve_component(geom(0.025), Material{}, 1, a).field.gradient({0, 0});
        const Gradient g1 = solve_component(geom(0.025), Material{}, 1, a, fine).field.gradient({0, 0});
        EXPECT_LT(std::fabs(frobenius(g1) - frobenius(g0)), 0.02 * frobenius(g1)) << a;
    }
}
