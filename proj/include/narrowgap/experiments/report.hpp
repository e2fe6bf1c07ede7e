#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "narrowgap/experiments/config.hpp"
#include "narrowgap/experiments/rate_fit.hpp"

namespace narrowgap {

inline constexpr int report_schema_version = 1;

/// A per-eps series, optionally fitted. Informational series never affect the verdict.
struct SeriesRecord {
    std::string name;
    std::vector<double> eps;
    std::vector<double> value;
    std::optional<RateFit> fit;
    std::string criterion;
    bool pass = true;
    bool informational = false;
};

/// A scalar check that is not a fitted series.
struct CheckRecord {
    std::string name;
    double value = 0;
    std::string criterion;
    bool pass = true;
};

struct StudyReport {
    int schema = report_schema_version;
    std::string study;
    json config;
    std::vector<SeriesRecord> series;
    std::vector<CheckRecord> checks;
    std::vector<std::string> notes;

    bool pass() const {
        for (const auto& s : series)
            if (!s.informational && !s.pass) return false;
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    const SeriesRecord& get_series(const std::string& n) const {
        for (const auto& s : series)
            if (s.name == n) return s;
        throw InvalidArgument("report has no series " + n);
    }
    const CheckRecord& get_check(const std::string& n) const {
        for (const auto& c : checks)
            if (c.name == n) return c;
        throw InvalidArgument("report has no check " + n);
    }

    json to_json() const {
        json js = json::array(), jc = json::array();
        for (const auto& s : series) {
            json j{{"name", s.name}, {"eps", s.eps}, {"value", s.value}, {"criterion", s.criterion}, {"pass", s.pass}, {"informational", s.informational}};
            if (s.fit)
                j["fit"] = {{"slope", s.fit->slope}, {"intercept", s.fit->intercept}, {"r2", s.fit->r2}, {"sign", s.fit->sign}, {"residuals", s.fit->residuals}};
            js.push_back(j);
        }
        for (const auto& c : checks) jc.push_back({{"name", c.name}, {"value", c.value}, {"criterion", c.criterion}, {"pass", c.pass}});
        return {{"schema", schema}, {"study", study}, {"config", config}, {"series", js}, {"checks", jc}, {"notes", notes}, {"pass", pass()}};
    }

    static StudyReport from_json(const json& j) {
        StudyReport r;
        r.schema = j.at("schema");
        if (r.schema != report_schema_version) throw ConfigError("unsupported report schema " + std::to_string(r.schema));
        r.study = j.at("study");
        r.config = j.at("config");
        for (const auto& s : j.at("series")) {
            SeriesRecord x;
            x.name = s.at("name");
            x.eps = s.at("eps").get<std::vector<double>>();
            x.value = s.at("value").get<std::vector<double>>();
            x.criterion = s.at("criterion");
            x.pass = s.at("pass");
            x.informational = s.at("informational");
            if (s.contains("fit")) {
                RateFit f;
                f.slope = s["fit"].at("slope");
                f.intercept = s["fit"].at("intercept");
                f.r2 = s["fit"].at("r2");
                f.sign = s["fit"].at("sign");
                f.residuals = s["fit"].at("residuals").get<std::vector<double>>();
                x.fit = f;
            }
            r.series.push_back(std::move(x));
        }
        for (const auto& c : j.at("checks")) r.checks.push_back({c.at("name"), c.at("value"), c.at("criterion"), c.at("pass")});
        r.notes = j.at("notes").get<std::vector<std::string>>();
        return r;
    }

    /// Columns: series,eps,value,fit_slope,fit_r2,pass. Scalar checks use an empty eps.
    void write_csv(std::ostream& os) const {
        os << "series,eps,value,fit_slope,fit_r2,pass\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
        for (const auto& s : series)
            for (size_t i = 0; i < s.eps.size(); ++i) {
                os << s.name << ',' << s.eps[i] << ',' << s.value[i] << ',';
                if (s.fit) os << s.fit->slope << ',' << s.fit->r2;
                else os << ',';
                os << ',' << (s.informational ? "info" : s.pass ? "true" : "false") << '\n';
            }
        for (const auto& c : checks) os << c.name << ",," << c.value << ",,," << (c.pass ? "true" : "false") << '\n';
    }
};

inline void emit_report(const StudyReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    if (csv) r.write_csv(f);
    else f << r.to_json().dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

inline StudyReport load_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    try {
        return StudyReport::from_json(json::parse(f));
    } catch (const json::exception& e) {
        throw ConfigError(path + ": not a study report (" + e.what() + ")");
    }
}

} // namespace narrowgap
