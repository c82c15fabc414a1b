// Radius function of a capacitated facility: the unique half-width R such
// that the clipped ball [max(y-R,0), min(y+R,1)] carries mass q, plus the
// coupled serving intervals of two facilities competing on the segment.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "flpsr/distribution.hpp"

namespace flpsr {

enum class ClipRegime { LeftClipped, Interior, RightClipped };

inline const char* to_string(ClipRegime r) {
    switch (r) {
        case ClipRegime::LeftClipped: return "LeftClipped";
        case ClipRegime::Interior: return "Interior";
        case ClipRegime::RightClipped: return "RightClipped";
    }
    return "?";
}

struct RadiusResult {
    double radius = 0.0;
    double left = 0.0;   // max(y - radius, 0)
    double right = 0.0;  // min(y + radius, 1)
    ClipRegime regime = ClipRegime::Interior;
};

struct DegenerateDensityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixedPointError : std::runtime_error {
    double residual1, residual2;
    FixedPointError(double r1, double r2)
        : std::runtime_error("two-facility serving intervals did not converge (residuals " +
                             std::to_string(r1) + ", " + std::to_string(r2) + ")"),
          residual1(r1),
          residual2(r2) {}
};

// Solves mu([max(y-h,0), min(y+h,1)]) = q by bisection on h. The mass map is
// non-decreasing in h, so the loop converges to the smallest root; with the
// smallest root at most one side of the ball can be clipped.
inline RadiusResult radius(const Distribution& d, double q, double y) {
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("radius: capacity must be in (0, 1]");
    auto ball_mass = [&](double h) {
        return d.cdf(std::min(y + h, 1.0)) - d.cdf(std::max(y - h, 0.0));
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ball_mass(mid) < q ? lo : hi) = mid;
    }
    RadiusResult res;
    res.radius = 0.5 * (lo + hi);
    res.left = std::max(y - res.radius, 0.0);
    res.right = std::min(y + res.radius, 1.0);
    res.regime = (y - res.radius < 0.0)   ? ClipRegime::LeftClipped
                 : (y + res.radius > 1.0) ? ClipRegime::RightClipped
                                          : ClipRegime::Interior;
    return res;
}

// dR/dy: -1 while the ball is pinned to the left edge, +1 on the right edge,
// otherwise the density-balance ratio of the two moving endpoints.
inline double radius_derivative(const Distribution& d, double q, double y) {
    const RadiusResult r = radius(d, q, y);
    if (r.regime == ClipRegime::LeftClipped) return -1.0;
    if (r.regime == ClipRegime::RightClipped) return 1.0;
    const double fl = d.density(y - r.radius);
    const double fr = d.density(y + r.radius);
    if (fl + fr < 1e-12) {
        throw DegenerateDensityError("radius_derivative: density vanishes at both ball endpoints");
    }
    return (fl - fr) / (fl + fr);
}

struct TwoFacilityServing {
    double r1 = 0.0, r2 = 0.0;
    double s1_lo = 0.0, s1_hi = 0.0;  // served interval of the left facility
    double s2_lo = 0.0, s2_hi = 0.0;  // served interval of the right facility
    bool touching = false;            // the two intervals share their inner endpoint
};

// Coupled serving intervals for facilities at y1 <= y2 with capacities
// (q1, q2). A facility extends past the midpoint only into territory the
// other facility's ball does not reach, and never beyond its own radius:
//   z1 = min(max((y1+y2)/2, y2-R2), y1+R1)
//   z2 = max(min((y1+y2)/2, y1+R1), y2-R2)
// with each Rj re-solved so that mu(sj) = qj. Damped fixed-point iteration;
// damping 0.5 avoids oscillation across the touching/separated switch.
inline TwoFacilityServing two_facility_serving(const Distribution& d, double q1, double q2,
                                               double y1, double y2) {
    if (!(q1 > 0.0) || !(q2 > 0.0) || !(q1 + q2 < 1.0)) {
        throw std::invalid_argument("two_facility_serving: capacities must be positive with q1+q2 < 1");
    }
    if (y1 > y2) throw std::invalid_argument("two_facility_serving: requires y1 <= y2");

    const double mid = 0.5 * (y1 + y2);
    double r1 = radius(d, q1, y1).radius;
    double r2 = radius(d, q2, y2).radius;

    auto z1_of = [&](double R1, double R2) {
        return std::min(std::max(mid, y2 - R2), y1 + R1);
    };
    auto z2_of = [&](double R1, double R2) {
        return std::max(std::min(mid, y1 + R1), y2 - R2);
    };
    auto mass1 = [&](double R1, double R2) {
        return d.cdf(z1_of(R1, R2)) - d.cdf(std::max(y1 - R1, 0.0));
    };
    auto mass2 = [&](double R1, double R2) {
        return d.cdf(std::min(y2 + R2, 1.0)) - d.cdf(z2_of(R1, R2));
    };
    auto solve = [&](const auto& mass, double target) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
            const double m = 0.5 * (lo + hi);
            (mass(m) < target ? lo : hi) = m;
        }
        return 0.5 * (lo + hi);
    };

    double res1 = 0.0, res2 = 0.0;
    double best_sum = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int iter = 0; iter < 200; ++iter) {
        res1 = std::abs(mass1(r1, r2) - q1);
        res2 = std::abs(mass2(r1, r2) - q2);
        // Infeasible placements (a facility that cannot gather its capacity on
        // its side) freeze the residual; bail out instead of spinning.
        if (res1 + res2 >= best_sum * 0.999) {
            if (++stalled >= 12) throw FixedPointError(res1, res2);
        } else {
            stalled = 0;
            best_sum = res1 + res2;
        }
        if (res1 <= 1e-8 && res2 <= 1e-8) {
            TwoFacilityServing out;
            out.r1 = r1;
            out.r2 = r2;
            out.s1_lo = std::max(y1 - r1, 0.0);
            out.s1_hi = z1_of(r1, r2);
            out.s2_lo = z2_of(r1, r2);
            out.s2_hi = std::min(y2 + r2, 1.0);
            out.touching = out.s2_lo - out.s1_hi <= 1e-9;
            return out;
        }
        const double next1 = solve([&](double h) { return mass1(h, r2); }, q1);
        const double next2 = solve([&](double h) { return mass2(r1, h); }, q2);
        r1 += 0.5 * (next1 - r1);
        r2 += 0.5 * (next2 - r2);
    }
    throw FixedPointError(res1, res2);
}

}  // namespace flpsr
