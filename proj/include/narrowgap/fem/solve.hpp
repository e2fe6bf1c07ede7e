#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <functional>
#include <sstream>

#include "narrowgap/fem/field.hpp"

namespace narrowgap::fem {

using VectorFunction = std::function<Point(const Point&)>;

/// psi_1 = (1, 0), psi_2 = (0, 1), psi_3 = (y, -x).
inline Point rigid_motion(int alpha, const Point& p) {
    switch (alpha) {
    case 1: return {1.0, 0.0};
    case 2: return {0.0, 1.0};
    case 3: return {p[1], -p[0]};
    default: throw InvalidArgument("rigid motion index must be 1, 2 or 3");
    }
}

/// The study boundary datum: phi(x) = (x2, x1 + x2) g(|x|) with g = 1, odd in x.
inline Point default_phi(const Point& p) { return {p[1], p[0] + p[1]}; }

enum class SolverKind { automatic, direct, cg };

struct SolverOptions {
    SolverKind kind = SolverKind::automatic;
    double tolerance = 1e-10;
    Eigen::Index direct_limit = 500000;
    AssemblyMode assembly = AssemblyMode::sequential;
    unsigned threads = 0;
};

/// Per-node constraint: free, prescribed, or carried rigidly by inclusion 1 or 2.
struct Constraints {
    enum Kind : int { free = 0, fixed = 1, rigid1 = 2, rigid2 = 3 };
    std::vector<Kind> kind;
    std::vector<Point> value;

    explicit Constraints(size_t n) : kind(n, free), value(n, Point{0, 0}) {}

    void fix(const std::vector<int>& nodes, const std::vector<Point>& nodes_xy, const VectorFunction& f) {
        for (int n : nodes) {
            kind[static_cast<size_t>(n)] = fixed;
            value[static_cast<size_t>(n)] = f(nodes_xy[static_cast<size_t>(n)]);
        }
    }
    void make_rigid(const std::vector<int>& nodes, int inclusion) {
        for (int n : nodes) kind[static_cast<size_t>(n)] = inclusion == 1 ? rigid1 : rigid2;
    }
    bool same_pattern(const Constraints& o) const { return kind == o.kind; }
};

struct SolveStats {
    std::string method;
    double relative_residual = 0;
    Eigen::Index unknowns = 0;
    int iterations = 0;
};

struct Solution {
    DisplacementField field;
    /// Rigid parameters C(i-1, alpha-1) of inclusions carried rigidly (zero otherwise).
    Eigen::Matrix<double, 2, 3> C = Eigen::Matrix<double, 2, 3>::Zero();
    double energy = 0;
    /// K u: nodal reactions (zero at free dofs up to the solver tolerance).
    Eigen::VectorXd reaction;
    SolveStats stats;

    /// Work of the reactions on the prescribed boundary nodes with the given tag.
    double boundary_work(BoundaryTag tag) const {
        double w = 0;
        for (int n : field.mesh().boundary_nodes(tag))
            for (int c = 0; c < 2; ++c) w += reaction[2 * n + c] * field.coefficients()[2 * n + c];
        return 0.5 * w;
    }
};

/// Mesh + assembled stiffness; solves any number of constrained problems on it. The reduced
/// factorization is cached per constraint pattern.
class ElasticProblem {
public:
    ElasticProblem(std::shared_ptr<const Mesh> mesh, const Material& mat, SolverOptions opt = {})
        : mesh_(std::move(mesh)), mat_(mat), opt_(opt), K_(assemble(*mesh_, mat, opt.assembly, opt.threads)) {}

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    const SparseMatrix& stiffness() const { return K_; }
    const Material& material() const { return mat_; }

    Solution solve(const Constraints& c) const {
        const size_t nn = mesh_->nodes.size();
        if (c.kind.size() != nn) throw DimensionMismatch("constraint set does not match the mesh");
        // Reduced unknowns: free node dofs, then three rigid parameters per carried inclusion.
        std::vector<Eigen::Index> col(2 * nn, -1);
        Eigen::Index nr = 0;
        for (size_t n = 0; n < nn; ++n)
            if (c.kind[n] == Constraints::free) {
                col[2 * n] = nr++;
                col[2 * n + 1] = nr++;
            }
        Eigen::Index rigid_col[2] = {-1, -1};
        for (int i : {0, 1})
            if (std::count(c.kind.begin(), c.kind.end(), i == 0 ? Constraints::rigid1 : Constraints::rigid2) > 0) {
                rigid_col[i] = nr;
                nr += 3;
            }
        const Eigen::Index n2 = static_cast<Eigen::Index>(2 * nn);
        std::vector<Eigen::Triplet<double>> pt;
        Eigen::VectorXd uD = Eigen::VectorXd::Zero(n2);
        for (size_t n = 0; n < nn; ++n) {
            const Eigen::Index r0 = static_cast<Eigen::Index>(2 * n);
            switch (c.kind[n]) {
            case Constraints::free:
                pt.emplace_back(r0, col[2 * n], 1.0);
                pt.emplace_back(r0 + 1, col[2 * n + 1], 1.0);
                break;
            case Constraints::fixed:
                uD[r0] = c.value[n][0];
                uD[r0 + 1] = c.value[n][1];
                break;
            default: {
                const Eigen::Index base = rigid_col[c.kind[n] == Constraints::rigid1 ? 0 : 1];
                const Point& x = mesh_->nodes[n];
                pt.emplace_back(r0, base, 1.0);
                pt.emplace_back(r0 + 1, base + 1, 1.0);
                pt.emplace_back(r0, base + 2, x[1]);
                pt.emplace_back(r0 + 1, base + 2, -x[0]);
            }
            }
        }
        SparseMatrix P(n2, nr);
        P.setFromTriplets(pt.begin(), pt.end());

        Solution s;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(nr);
        if (nr > 0) {
            if (!cache_ || !cache_->pattern.same_pattern(c)) build_cache(c, P);
            const Eigen::VectorXd b = -(P.transpose() * (K_ * uD));
            r = solve_reduced(b, s.stats);
        }
        Eigen::VectorXd u = P * r + uD;
        for (int i : {0, 1})
            if (rigid_col[i] >= 0)
                for (int a = 0; a < 3; ++a) s.C(i, a) = r[rigid_col[i] + a];
        s.reaction = K_ * u;
        s.energy = 0.5 * u.dot(s.reaction);
        s.stats.unknowns = nr;
        s.field = DisplacementField(mesh_, std::move(u));
        return s;
    }

    /// u = psi_alpha on the boundary of inclusion i, zero on the other inclusion and the outer circle.
    Solution solve_component(int i, int alpha) const {
        if (i != 1 && i != 2) throw InvalidArgument("inclusion index must be 1 or 2");
        rigid_motion(alpha, {0, 0});
        require_perforated();
        Constraints c(mesh_->nodes.size());
        const auto zero = [](const Point&) { return Point{0, 0}; };
        c.fix(mesh_->boundary_nodes(BoundaryTag::outer), mesh_->nodes, zero);
        c.fix(mesh_->boundary_nodes(i == 1 ? BoundaryTag::incl2 : BoundaryTag::incl1), mesh_->nodes, zero);
        c.fix(mesh_->boundary_nodes(i == 1 ? BoundaryTag::incl1 : BoundaryTag::incl2), mesh_->nodes,
              [alpha](const Point& p) { return rigid_motion(alpha, p); });
        return solve(c);
    }

    /// Both inclusions rigid (parameters in Solution::C), phi on the outer circle.
    Solution solve_hard_inclusion(const VectorFunction& phi) const {
        require_perforated();
        Constraints c(mesh_->nodes.size());
        c.fix(mesh_->boundary_nodes(BoundaryTag::outer), mesh_->nodes, phi);
        c.make_rigid(mesh_->boundary_nodes(BoundaryTag::incl1), 1);
        c.make_rigid(mesh_->boundary_nodes(BoundaryTag::incl2), 2);
        return solve(c);
    }

    /// Traction-free inclusion boundaries, phi on the outer circle. On a mesh with filled
    /// inclusions this is the finite-contrast problem with the inclusion moduli of the material.
    Solution solve_holes(const VectorFunction& phi) const {
        Constraints c(mesh_->nodes.size());
        c.fix(mesh_->boundary_nodes(BoundaryTag::outer), mesh_->nodes, phi);
        return solve(c);
    }

private:
    struct Cache {
        Constraints pattern;
        SparseMatrix Kr;
        std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt;
        std::shared_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>> cg;
    };

    void require_perforated() const {
        if (mesh_->count_region(Region::incl1) + mesh_->count_region(Region::incl2) > 0)
            throw InvalidArgument("rigid inclusion problems need a mesh without inclusion interiors");
    }

    bool use_direct(Eigen::Index n) const {
        return opt_.kind == SolverKind::direct || (opt_.kind == SolverKind::automatic && n < opt_.direct_limit);
    }

    void build_cache(const Constraints& c, const SparseMatrix& P) const {
        // The iterative solver keeps a reference to Kr, so the cache is built in place.
        auto k = std::make_shared<Cache>(Cache{c, SparseMatrix(P.transpose() * K_ * P), nullptr, nullptr});
        k->Kr.makeCompressed();
        if (use_direct(k->Kr.rows())) {
            k->ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(k->Kr);
            if (k->ldlt->info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed (matrix not positive definite?)");
        } else {
            k->cg = std::make_shared<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>>();
            k->cg->setTolerance(opt_.tolerance * 0.1);
            k->cg->setMaxIterations(std::max<Eigen::Index>(1000, 10 * k->Kr.rows()));
            k->cg->compute(k->Kr);
            if (k->cg->info() != Eigen::Success) throw SolverError("incomplete Cholesky preconditioner failed");
        }
        cache_ = std::move(k);
    }

    Eigen::VectorXd solve_reduced(const Eigen::VectorXd& b, SolveStats& st) const {
        const double bn = b.norm();
        if (bn == 0) {
            st.method = "trivial";
            return Eigen::VectorXd::Zero(b.size());
        }
        const Cache& k = *cache_;
        // Residuals are measured on the Jacobi-scaled system D^-1/2 K D^-1/2, which keeps stiff
        // inclusion rows from swamping the norm in the large-contrast mode.
        const Eigen::VectorXd w = k.Kr.diagonal().cwiseSqrt().cwiseInverse();
        const double bs = w.cwiseProduct(b).norm();
        auto scaled_residual = [&](const Eigen::VectorXd& x) { return w.cwiseProduct(b - k.Kr * x).norm() / bs; };
        Eigen::VectorXd x;
        if (k.ldlt) {
            st.method = "ldlt";
            x = k.ldlt->solve(b);
            // A few steps of iterative refinement absorb the conditioning of thin elements.
            for (int it = 0; it < 3 && scaled_residual(x) > 1e-2 * opt_.tolerance; ++it) {
                x += k.ldlt->solve(b - k.Kr * x);
                ++st.iterations;
            }
        } else {
            st.method = "cg+ichol";
            x = k.cg->solve(b);
            st.iterations = static_cast<int>(k.cg->iterations());
        }
        st.relative_residual = scaled_residual(x);
        if (!(st.relative_residual <= opt_.tolerance)) {
            std::ostringstream os;
            os << st.method << " did not reach relative residual " << opt_.tolerance << ": got " << st.relative_residual << " after "
               << st.iterations << " iterations on " << b.size() << " unknowns";
            throw SolverError(os.str());
        }
        return x;
    }

    std::shared_ptr<const Mesh> mesh_;
    Material mat_;
    SolverOptions opt_;
    SparseMatrix K_;
    mutable std::shared_ptr<Cache> cache_;
};

inline std::shared_ptr<const Mesh> make_mesh(const Geometry& g, const MeshParams& p = {}) { return std::make_shared<const Mesh>(generate_mesh(g, p)); }

inline Solution solve_component(const Geometry& g, const Material& mat, int i, int alpha, const MeshParams& p = {}, const SolverOptions& opt = {}) {
    return ElasticProblem(make_mesh(g, p), mat, opt).solve_component(i, alpha);
}

inline Solution solve_hard_inclusion(const Geometry& g, const Material& mat, const VectorFunction& phi, const MeshParams& p = {},
                                     const SolverOptions& opt = {}) {
    return ElasticProblem(make_mesh(g, p), mat, opt).solve_hard_inclusion(phi);
}

inline Solution solve_holes(const Geometry& g, const Material& mat, const VectorFunction& phi, const MeshParams& p = {}, const SolverOptions& opt = {}) {
    MeshParams q = p;
    q.fill_inclusions = false;
    return ElasticProblem(make_mesh(g, q), mat, opt).solve_holes(phi);
}

/// Energy-norm distance (sqrt of the strain energy of u_h - u) to an exact field given by its gradient.
inline double energy_error(const DisplacementField& uh, const Material& mat, const std::function<Gradient(const Point&)>& exact_grad) {
    const Mesh& m = uh.mesh();
    double acc = 0;
    for (size_t e = 0; e < m.tris.size(); ++e) {
        const double lam = mat.lam(m.region[e]), mu = mat.shear(m.region[e]);
        for (const auto& q : triangle_rule()) {
            const Locator::Hit h{e, q.xi, q.eta};
            const auto N = P2::N(q.xi, q.eta);
            Point x{0, 0};
            for (int k = 0; k < 6; ++k)
                for (int d = 0; d < 2; ++d) x[d] += N[k] * m.nodes[m.tris[e][k]][d];
            const Gradient gh = uh.gradient_at(h), g = exact_grad(x);
            const double e11 = gh[0][0] - g[0][0], e22 = gh[1][1] - g[1][1], e12 = 0.5 * (gh[0][1] - g[0][1] + gh[1][0] - g[1][0]);
            const double w = q.w * element_geometry(m, e, q.xi, q.eta).detJ;
            acc += w * (lam * (e11 + e22) * (e11 + e22) + 2 * mu * (e11 * e11 + e22 * e22 + 2 * e12 * e12));
        }
    }
    return std::sqrt(acc);
}

} // namespace narrowgap::fem
