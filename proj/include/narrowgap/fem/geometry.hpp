#pragma once

#include <array>
#include <cmath>
#include <string>

#include "narrowgap/error.hpp"

namespace narrowgap::fem {

using Point = std::array<double, 2>;

/// Two disks D1 (upper) and D2 (lower) inside a disk of radius R0 centered at the origin.
/// The gap midline is y = 0; the centers are (0, rho1 + eps/2) and (0, -rho2 - eps/2).
struct Geometry {
    double R0 = 3.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
    double eps = 0.1;
    double neck_half_width = 0.5;
    double clearance = 0.25;

    Point center(int i) const { return i == 1 ? Point{0.0, rho1 + eps / 2} : Point{0.0, -(rho2 + eps / 2)}; }
    double radius(int i) const { return i == 1 ? rho1 : rho2; }

    /// Lower boundary of D1 over |x| <= rho1: eps/2 + rho1 - sqrt(rho1^2 - x^2).
    double top(double x) const { return eps / 2 + (rho1 - std::sqrt(rho1 * rho1 - x * x)); }
    double bottom(double x) const { return -(eps / 2 + (rho2 - std::sqrt(rho2 * rho2 - x * x))); }
    /// Local gap width.
    double gap(double x) const { return top(x) - bottom(x); }

    bool symmetric() const { return rho1 == rho2; }

    void validate() const {
        if (!(eps > 0)) throw DomainError("gap eps must be positive (got " + std::to_string(eps) + ")");
        if (!(rho1 > 0 && rho2 > 0 && R0 > 0)) throw DomainError("radii must be positive");
        if (!(neck_half_width > 0 && neck_half_width < 0.9 * std::min(rho1, rho2)))
            throw DomainError("neck half-width must lie in (0, 0.9 min(rho1, rho2))");
        if (!(clearance > 0)) throw DomainError("clearance must be positive");
        if (R0 - (2 * rho1 + eps / 2) < clearance || R0 - (2 * rho2 + eps / 2) < clearance)
            throw DomainError("inclusions must stay at distance >= clearance from the outer circle");
    }
};

} // namespace narrowgap::fem
