// One PASS/FAIL line per acceptance criterion. Exit status 1 when any criterion fails.
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "narrowgap/experiments/studies.hpp"
#include "narrowgap/verify/checks.hpp"

using namespace narrowgap;

namespace {

// Pinned tolerances.
constexpr double probe_slope_tol = 0.05;
constexpr double fd_rel_tol = 1e-6;
constexpr int fd_triples = 100;
constexpr int suite_depth = 5;
constexpr int route_depth = 4;

const RationalCoeff L = RationalCoeff::lambda();
const RationalCoeff M = RationalCoeff::mu();

NeckScalar X(int d, int i = 0) { return NeckScalar::x(d, i); }
NeckScalar E(int d) { return NeckScalar::eps(d); }
NeckScalar Dp(int d, int k) { return NeckScalar::delta_pow(d, k); }

struct Outcome {
    bool pass = true;
    std::string summary;
};

int failures = 0;

void report(int n, const std::string& title, const Outcome& o, double seconds) {
    std::printf("criterion %2d: %s  %-34s %s  [%.1fs]\n", n, o.pass ? "PASS" : "FAIL", title.c_str(), o.summary.c_str(), seconds);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

template <class F>
void run(int n, const std::string& title, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = f();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(n, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

struct Printed {
    int dim, alpha;
    std::string table;
    int level, index;
    NeckScalar value;
};

std::vector<Printed> printed_coefficients() {
    std::vector<Printed> out;
    const NeckScalar x = X(2);
    out.push_back({2, 1, "P2", 1, 1, (x * Dp(2, -2)).scaled((L + M) / (L + 2 * M))});
    out.push_back({2, 1, "P1", 2, 1, ((E(2) - (x * x).scaled(3)) * Dp(2, -3)).scaled((2 * L + 3 * M) / (3 * (L + 2 * M)))});
    out.push_back({2, 2, "P2", 1, 1, (x * Dp(2, -2)).scaled((L + M) / M)});
    out.push_back({2, 2, "P1", 2, 1, (((x * x).scaled(3) - E(2)) * Dp(2, -3)).scaled(L / (3 * M))});
    const NeckScalar x1 = X(3, 0), x2 = X(3, 1), dl = Dp(3, 1);
    for (int a : {1, 2}) {
        const NeckScalar xa = a == 1 ? x1 : x2, xb = a == 1 ? x2 : x1;
        out.push_back({3, a, "P2", 1, 1, (xa * Dp(3, -2)).scaled((L + M) / (L + 2 * M))});
        out.push_back({3, a, "P1", 2, 1,
                       ((dl - (xa * xa).scaled(4)).scaled((2 * L + 3 * M) / (L + 2 * M)) + dl - (xb * xb).scaled(4)) *
                           Dp(3, -3).scaled(RationalCoeff::frac(1, 3))});
        out.push_back({3, a, "Q1", 2, 1, (x1 * x2 * Dp(3, -3)).scaled(-4 * (L + M) / (3 * (L + 2 * M)))});
    }
    out.push_back({3, 3, "P2", 1, 1, (x1 * Dp(3, -2)).scaled((L + M) / M)});
    out.push_back({3, 3, "Q2", 1, 1, (x2 * Dp(3, -2)).scaled((L + M) / M)});
    // printed without a 1/mu factor
    out.push_back({3, 3, "P1", 2, 1, ((E(3) - x1 * x1 - x2 * x2) * Dp(3, -3)).scaled(-2 * L / 3)});
    return out;
}

Outcome criterion_printed() {
    int ok = 0, total = 0;
    std::string failed;
    for (const auto& p : printed_coefficients()) {
        bool all = true;
        for (Route route : {Route::integral, Route::recursion}) {
            const AuxFamily fam = build_family(p.dim, p.alpha, 2, route);
            if (!s_equal(ansatz_coefficient(fam, p.table, p.level, p.index), p.value)) all = false;
        }
        ++total;
        if (all) ++ok;
        else failed += " d=" + std::to_string(p.dim) + ",alpha=" + std::to_string(p.alpha) + "," + p.table + "[" + std::to_string(p.level) + "," + std::to_string(p.index) + "]";
    }
    std::ostringstream s;
    s << ok << "/" << total << " coefficients equal on both routes";
    if (!failed.empty()) s << "; differ:" << failed;
    return {ok == total, s.str()};
}

std::map<std::pair<int, int>, AuxFamily>& deep_families() {
    static std::map<std::pair<int, int>, AuxFamily> fams;
    if (fams.empty())
        for (int d : {2, 3})
            for (int a = 1; a <= rigid_count(d); ++a) fams.emplace(std::make_pair(d, a), build_integral(d, a, suite_depth));
    return fams;
}

Outcome run_named(const std::vector<std::string>& names, std::string label) {
    int ok = 0, total = 0;
    std::string first;
    for (const auto& [key, fam] : deep_families())
        for (const auto& r : run_symbolic_suite(fam)) {
            if (std::find(names.begin(), names.end(), r.name) == names.end()) continue;
            ++total;
            if (r.pass) ++ok;
            else if (first.empty())
                first = "; first failure d=" + std::to_string(key.first) + " alpha=" + std::to_string(key.second) + " " + r.name + ": " + r.witness;
        }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " " + label + first};
}

Outcome criterion_routes() {
    int ok = 0, total = 0;
    std::string first;
    const std::vector<std::pair<int, int>> both{{2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}};
    for (const auto& [d, a] : both) {
        const CheckReport r = check_route_equivalence(build_integral(d, a, route_depth), build_recursion(d, a, route_depth));
        ++total;
        if (r.pass) ++ok;
        else if (first.empty()) first = "; witness d=" + std::to_string(d) + " alpha=" + std::to_string(a) + ": " + r.witness;
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " families equal through level " + std::to_string(route_depth) + first};
}

Outcome criterion_probe() {
    const AuxFamily fam = build_integral(2, 1, 1);
    const std::vector<mpq_class> grid{mpq_class(1, 100), mpq_class(1, 1000), mpq_class(1, 10000), mpq_class(1, 100000)};
    double worst = 0;
    bool pass = true;
    for (int m = 1; m <= 4; ++m)
        for (const mpq_class& r : {mpq_class(1, 10), mpq_class(1, 20)}) {
            const CheckReport rep = lower_bound_probe(fam, m, r, grid, probe_slope_tol);
            pass = pass && rep.pass;
            if (rep.details.contains("slope")) worst = std::max(worst, std::fabs(rep.details["slope"].get<double>() + (m + 1) / 2.0));
        }
    std::ostringstream s;
    s << "max |slope + (m+1)/2| = " << worst << " (tol " << probe_slope_tol << ")";
    return {pass, s.str()};
}

Outcome criterion_fd() {
    std::vector<AuxFamily> fams;
    for (int d : {2, 3})
        for (int a = 1; a <= rigid_count(d); ++a) fams.push_back(build_integral(d, a, 3));
    std::mt19937_64 rng(20240517);
    int ok = 0, deep = 0;
    double worst = 0;
    std::string first;
    for (int t = 0; t < fd_triples; ++t) {
        const AuxFamily& fam = fams[rng() % fams.size()];
        const int level = 1 + static_cast<int>(rng() % 3);
        const int comp = static_cast<int>(rng() % static_cast<unsigned>(fam.dim));
        std::vector<Axis> axes{Axis::x1, Axis::z};
        if (fam.dim == 3) axes.push_back(Axis::x2);
        const Axis ax = axes[rng() % axes.size()];
        const double eps = std::pow(10.0, -1.0 - 3.0 * std::uniform_real_distribution<double>(0, 1)(rng));
        const double lam = std::uniform_real_distribution<double>(0.2, 5.0)(rng), mu = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
        const CheckReport r = fd_oracle(fam.level(level)[comp], ax, 1, eps, lam, mu, static_cast<unsigned>(rng()), fd_rel_tol);
        worst = std::max(worst, r.details["max_rel_err"].get<double>());
        if (level == 3) ++deep;
        if (r.pass) ++ok;
        else if (first.empty()) first = "; " + r.witness;
    }
    std::ostringstream s;
    s << ok << "/" << fd_triples << " triples (" << deep << " at depth 3), max rel err " << worst << first;
    return {ok == fd_triples, s.str()};
}

SweepConfig study_config(const std::string& id) {
    SweepConfig c;
    c.study = id;
    c.deterministic = true;
    c.validate();
    return c;
}

Outcome summarize(const std::vector<StudyReport>& reps) {
    std::ostringstream s;
    s.precision(4);
    bool pass = true;
    const char* sep = "";
    for (const auto& r : reps) {
        pass = pass && r.pass();
        for (const auto& x : r.series) {
            if (x.informational || !x.fit) continue;
            s << sep << x.name << " " << x.fit->slope << (x.pass ? "" : " (FAIL)");
            sep = ", ";
        }
        for (const auto& x : r.checks) {
            s << sep << x.name << " " << x.value << (x.pass ? "" : " (FAIL)");
            sep = ", ";
        }
    }
    return {pass, s.str()};
}

} // namespace

int main() {
    run(1, "printed coefficients", criterion_printed);
    run(2, "identity suite (m <= 5)", [] { return run_named({"boundary", "cancel_identity", "residual_structure"}, "identity checks"); });
    run(3, "residual orders and z-degree", [] { return run_named({"residual_order", "z_degree"}, "order/degree certificates"); });
    run(4, "route equivalence", criterion_routes);
    run(5, "lower-bound exponent", criterion_probe);
    run(6, "finite differences vs symbolic", criterion_fd);
    run(7, "FEM blow-up rates", [] { return summarize({run_blowup_study(study_config("rates"))}); });
    run(8, "constant asymptotics", [] { return summarize({run_constant_study(study_config("constants"))}); });
    run(9, "neck comparison", [] { return summarize({run_neck_comparison(study_config("compare"))}); });
    run(10, "cancellation and holes", [] { return summarize({run_symmetric_cancellation(study_config("cancel")), run_holes_study(study_config("holes"))}); });
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
