#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "narrowgap/fem/solve.hpp"

namespace narrowgap {

using nlohmann::json;

inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t{
        {"translation_slope", 0.1},  // |slope + 1| for u11, u12 and the gradient controls
        {"rotation_slope", 0.1},     // |slope + 1/2| for u13
        {"full_slope", 0.15},        // |slope + 1/2| for the hard-inclusion solution
        {"constant_slope", 0.1},     // |slope - 1/2| for C1 - C2
        {"rotation_equal", 1e-8},    // |C1^3 - C2^3| / ||C||
        {"bstar_spread", 0.15},      // (max - min) / mean of the fitted b*_11
        {"near_zero", 1e-10},        // differences below this are excluded from fits
        {"neck_ratio", 3.0},         // max / min of the delta-normalized neck error
        {"boundary_trace", 1e-3},    // neck error on the walls
        {"sanity_fraction", 0.1},    // neck error / max |u| at the largest eps
        {"cancel_min_slope", -0.1},  // lower bound on the slope of |grad(u11 + u21)|
        {"rotation_sum", 0.05},      // |grad(u13 + u23)(0,0)|_2 <= 1 + this
        {"holes_min_slope", -0.6},   // lower bound on the holes slope
        {"rigid_slope", 0.05},       // |slope| of the rigid-data control
    };
    return t;
}

inline const std::vector<std::string>& study_ids() {
    static const std::vector<std::string> ids{"rates", "constants", "compare", "holes", "cancel"};
    return ids;
}

/// One epsilon sweep. Parsed from flat "key = value" lines; every key not listed here is an error.
struct SweepConfig {
    std::string study = "rates";
    fem::Geometry geometry;
    double lambda = 1.0;
    double mu = 1.0;
    std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    int nz = 8;
    double grading = 0.15;
    /// Outer boundary datum: default (x2, x1 + x2), or rigid1 / rigid2 / rigid3.
    std::string phi = "default";
    /// Depth of the symbolic family in the neck comparison.
    int depth = 2;
    std::map<std::string, double> tolerance = default_tolerances();
    bool deterministic = true;

    fem::MeshParams mesh_params() const { return {nz, grading, false}; }
    fem::Material material() const {
        fem::Material m;
        m.lambda = lambda;
        m.mu = mu;
        return m;
    }
    fem::Geometry geometry_at(double e) const {
        fem::Geometry g = geometry;
        g.eps = e;
        return g;
    }
    fem::VectorFunction boundary_data() const {
        if (phi == "default") return fem::default_phi;
        for (int a = 1; a <= 3; ++a)
            if (phi == "rigid" + std::to_string(a)) return [a](const fem::Point& p) { return fem::rigid_motion(a, p); };
        throw ConfigError("unknown boundary data '" + phi + "' (expected default, rigid1, rigid2, rigid3)");
    }
    double tol(const std::string& k) const {
        auto it = tolerance.find(k);
        if (it == tolerance.end()) throw ConfigError("no tolerance named " + k);
        return it->second;
    }

    void validate() const {
        if (std::find(study_ids().begin(), study_ids().end(), study) == study_ids().end()) throw ConfigError("unknown study id '" + study + "'");
        if (eps.empty()) throw ConfigError("sweep.eps is empty");
        for (size_t i = 0; i < eps.size(); ++i) {
            if (!(eps[i] > 0)) throw ConfigError("sweep.eps values must be positive");
            if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("sweep.eps must be strictly decreasing");
        }
        if (nz < 2 || nz % 2) throw ConfigError("mesh.nz must be an even integer >= 2");
        if (!(grading > 0 && grading <= 1)) throw ConfigError("mesh.grading must lie in (0, 1]");
        if (depth < 1 || depth > 5) throw ConfigError("study.depth must lie in 1..5");
        if (!(mu > 0 && lambda + mu >= 0)) throw ConfigError("material must satisfy mu > 0 and lambda + mu >= 0");
        boundary_data();
        try {
            geometry_at(eps.back()).validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("geometry: ") + e.what());
        }
    }

    json to_json() const {
        json t = json::object();
        for (const auto& [k, v] : tolerance) t[k] = v;
        return {{"study", study},
                {"geometry", {{"R0", geometry.R0}, {"rho1", geometry.rho1}, {"rho2", geometry.rho2}, {"neck_half_width", geometry.neck_half_width}, {"clearance", geometry.clearance}}},
                {"material", {{"lambda", lambda}, {"mu", mu}}},
                {"sweep", {{"eps", eps}}},
                {"mesh", {{"nz", nz}, {"grading", grading}}},
                {"phi", phi},
                {"depth", depth},
                {"tolerance", t},
                {"deterministic", deterministic}};
    }

    static SweepConfig from_json(const json& j) {
        SweepConfig c;
        c.study = j.at("study").get<std::string>();
        const json& g = j.at("geometry");
        c.geometry.R0 = g.at("R0");
        c.geometry.rho1 = g.at("rho1");
        c.geometry.rho2 = g.at("rho2");
        c.geometry.neck_half_width = g.at("neck_half_width");
        c.geometry.clearance = g.at("clearance");
        c.lambda = j.at("material").at("lambda");
        c.mu = j.at("material").at("mu");
        c.eps = j.at("sweep").at("eps").get<std::vector<double>>();
        c.nz = j.at("mesh").at("nz");
        c.grading = j.at("mesh").at("grading");
        c.phi = j.at("phi").get<std::string>();
        c.depth = j.at("depth");
        c.tolerance = j.at("tolerance").get<std::map<std::string, double>>();
        c.deterministic = j.at("deterministic");
        return c;
    }

    /// Flat key=value form of the resolved configuration (parseable by parse_config).
    std::string to_text() const {
        std::ostringstream os;
        os << std::setprecision(17);
        os << "study.id = " << study << "\n";
        os << "geometry.R0 = " << geometry.R0 << "\ngeometry.rho1 = " << geometry.rho1 << "\ngeometry.rho2 = " << geometry.rho2
           << "\ngeometry.neck_half_width = " << geometry.neck_half_width << "\ngeometry.clearance = " << geometry.clearance << "\n";
        os << "material.lambda = " << lambda << "\nmaterial.mu = " << mu << "\nsweep.eps = ";
        for (size_t i = 0; i < eps.size(); ++i) os << (i ? ", " : "") << eps[i];
        os << "\nmesh.nz = " << nz << "\nmesh.grading = " << grading << "\nstudy.phi = " << phi << "\nstudy.depth = " << depth << "\n";
        for (const auto& [k, v] : tolerance) os << "study.tolerance." << k << " = " << v << "\n";
        return os.str();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_number(const std::string& key, const std::string& v) {
    double out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("key " + key + ": '" + v + "' is not a number");
    return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError("key " + key + ": '" + v + "' is not an integer");
    return out;
}

} // namespace detail

/// Applies one key to a config. Unknown keys are errors.
inline void apply_config_key(SweepConfig& c, const std::string& key, const std::string& v) {
    using detail::parse_int;
    using detail::parse_number;
    if (key == "study.id") c.study = v;
    else if (key == "geometry.R0") c.geometry.R0 = parse_number(key, v);
    else if (key == "geometry.rho1") c.geometry.rho1 = parse_number(key, v);
    else if (key == "geometry.rho2") c.geometry.rho2 = parse_number(key, v);
    else if (key == "geometry.neck_half_width") c.geometry.neck_half_width = parse_number(key, v);
    else if (key == "geometry.clearance") c.geometry.clearance = parse_number(key, v);
    else if (key == "material.lambda") c.lambda = parse_number(key, v);
    else if (key == "material.mu") c.mu = parse_number(key, v);
    else if (key == "mesh.nz") c.nz = parse_int(key, v);
    else if (key == "mesh.grading") c.grading = parse_number(key, v);
    else if (key == "study.phi") c.phi = v;
    else if (key == "study.depth") c.depth = parse_int(key, v);
    else if (key == "sweep.eps") {
        c.eps.clear();
        std::stringstream ss(v);
        for (std::string item; std::getline(ss, item, ',');) c.eps.push_back(parse_number(key, detail::trim(item)));
    } else if (key.rfind("study.tolerance.", 0) == 0) {
        const std::string name = key.substr(16);
        if (!default_tolerances().count(name)) throw ConfigError("unknown tolerance key " + key);
        c.tolerance[name] = parse_number(key, v);
    } else {
        throw ConfigError("unknown config key " + key);
    }
}

inline SweepConfig parse_config(std::istream& is, SweepConfig c = {}) {
    std::set<std::string> seen;
    std::string line;
    for (int no = 1; std::getline(is, line); ++no) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(no) + ": empty key or value");
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(no) + ": duplicate key " + key);
        apply_config_key(c, key, value);
    }
    c.validate();
    return c;
}

inline SweepConfig parse_config_file(const std::string& path, SweepConfig c = {}) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path);
    return parse_config(f, std::move(c));
}

} // namespace narrowgap
