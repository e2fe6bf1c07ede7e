#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "narrowgap/error.hpp"

namespace narrowgap {

/// Least-squares fit of log|value| = intercept + slope * log(eps).
struct RateFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    /// Sign shared by all values; the fit uses magnitudes.
    int sign = 1;
    std::vector<double> residuals;
};

inline RateFit rate_fit(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 4) throw InvalidArgument("rate_fit needs at least 4 points, got " + std::to_string(series.size()));
    int sign = 0;
    std::vector<double> lx, ly;
    for (const auto& [e, v] : series) {
        if (!(e > 0)) throw DomainError("rate_fit: eps must be positive");
        if (v == 0 || !std::isfinite(v)) throw DomainError("rate_fit: values must be finite and nonzero");
        const int s = v > 0 ? 1 : -1;
        if (sign != 0 && s != sign) throw DomainError("rate_fit: values change sign; fit magnitudes of a one-signed series");
        sign = s;
        lx.push_back(std::log(e));
        ly.push_back(std::log(std::fabs(v)));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / n;
        my += ly[i] / n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0) throw DomainError("rate_fit: eps values must not all coincide");
    RateFit f;
    f.sign = sign;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        f.residuals.push_back(r);
        ss += r * r;
    }
    f.r2 = syy == 0 ? 1.0 : 1.0 - ss / syy;
    return f;
}

} // namespace narrowgap
