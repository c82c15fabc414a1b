// The limit welfare functional (transport cost of the served mass to the
// facility) for one and two facilities, its derivative, and the empirical
// per-agent social welfare of finite instances.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "flpsr/distribution.hpp"
#include "flpsr/quadrature.hpp"
#include "flpsr/radius.hpp"

namespace flpsr {

namespace detail {

// Integral of |x - y| over [a, b] against the density, split at the kink.
inline double transport_integral(const Distribution& d, double y, double a, double b,
                                 double tol = 1e-9) {
    double acc = 0.0;
    if (a < std::min(y, b)) {
        acc += adaptive_simpson([&](double x) { return (y - x) * d.density(x); }, a,
                                std::min(y, b), 0.5 * tol);
    }
    if (std::max(y, a) < b) {
        acc += adaptive_simpson([&](double x) { return (x - y) * d.density(x); }, std::max(y, a),
                                b, 0.5 * tol);
    }
    return acc;
}

}  // namespace detail

struct WelfareEval {
    double w_value = 0.0;   // transport cost of the served mass
    double limit_sw = 0.0;  // q - w_value
    RadiusResult ball;
};

inline WelfareEval w_one(const Distribution& d, double q, double y) {
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("w_one: capacity must be in (0, 1]");
    WelfareEval out;
    out.ball = radius(d, q, y);
    out.w_value = detail::transport_integral(d, y, out.ball.left, out.ball.right);
    out.limit_sw = q - out.w_value;
    return out;
}

// d/dy of the transport cost. The boundary fluxes of the moving ball cancel
// exactly (the mass identity forces equal in/out flow at distance R), so the
// derivative reduces to the served-mass imbalance around y:
//   W'(y) = mu([left, y]) - mu([y, right])
// which also covers the clipped regimes, where the pinned endpoint does not
// move and the free endpoint moves with zero speed.
inline double w_one_derivative(const Distribution& d, double q, double y) {
    const RadiusResult b = radius(d, q, y);
    return (d.cdf(y) - d.cdf(b.left)) - (d.cdf(b.right) - d.cdf(y));
}

struct TwoFacilityWelfareEval {
    double w_value = 0.0;
    double limit_sw = 0.0;  // q1 + q2 - w_value
    TwoFacilityServing serving;
};

inline TwoFacilityWelfareEval w_two(const Distribution& d, double q1, double q2, double y1,
                                    double y2) {
    if (!(q1 > 0.0) || !(q2 > 0.0) || !(q1 + q2 < 1.0)) {
        throw std::invalid_argument("w_two: capacities must be positive with q1+q2 < 1");
    }
    if (y1 > y2) throw std::invalid_argument("w_two: requires y1 <= y2");

    TwoFacilityWelfareEval out;
    if (d.cdf(y2) - d.cdf(y1) >= q1 + q2) {
        // Serving sets decompose into two independent balls.
        const RadiusResult b1 = radius(d, q1, y1);
        const RadiusResult b2 = radius(d, q2, y2);
        out.serving.r1 = b1.radius;
        out.serving.r2 = b2.radius;
        out.serving.s1_lo = b1.left;
        out.serving.s1_hi = b1.right;
        out.serving.s2_lo = b2.left;
        out.serving.s2_hi = b2.right;
        out.serving.touching = b2.left - b1.right <= 1e-9;
    } else {
        out.serving = two_facility_serving(d, q1, q2, y1, y2);
    }
    out.w_value = detail::transport_integral(d, y1, out.serving.s1_lo, out.serving.s1_hi) +
                  detail::transport_integral(d, y2, out.serving.s2_lo, out.serving.s2_hi);
    out.limit_sw = q1 + q2 - out.w_value;
    return out;
}

namespace detail {

// Sum of |x_i - y| over the k agents nearest to y; ties go to the smaller
// index (the left agent).
inline double k_nearest_distance_sum(const Instance& inst, double y, int k) {
    const auto& x = inst.positions;
    const int n = inst.n();
    if (k < 1 || k > n) throw std::invalid_argument("k_nearest: k out of range");
    int r = static_cast<int>(std::lower_bound(x.begin(), x.end(), y) - x.begin());
    int l = r - 1;
    double sum = 0.0;
    for (int taken = 0; taken < k; ++taken) {
        const double dl = l >= 0 ? y - x[static_cast<std::size_t>(l)]
                                 : std::numeric_limits<double>::infinity();
        const double dr = r < n ? x[static_cast<std::size_t>(r)] - y
                                : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            sum += dl;
            --l;
        } else {
            sum += dr;
            ++r;
        }
    }
    return sum;
}

}  // namespace detail

// Per-agent social welfare when one facility at y serves its floor(q*n)
// nearest agents.
inline double empirical_sw_one(const Instance& inst, double y, double q) {
    const int k = capacity_count(q, inst.n());
    if (k < 1) throw std::invalid_argument("empirical_sw_one: capacity count is zero");
    return (k - detail::k_nearest_distance_sum(inst, y, k)) / inst.n();
}

// Partial 1-D transport of k/n mass to a point target: filling by sorted
// distance is optimal, so the cost is the k nearest distances.
inline double wasserstein_to_dirac(const Instance& inst, double y, double q) {
    const int k = capacity_count(q, inst.n());
    if (k < 1) throw std::invalid_argument("wasserstein_to_dirac: capacity count is zero");
    return detail::k_nearest_distance_sum(inst, y, k) / inst.n();
}

struct TwoFacilityAssignment {
    std::vector<std::int8_t> facility_of;  // 0-based facility index, -1 if unserved
    double sw = 0.0;                       // per-agent social welfare
};

// Canonical Nash equilibrium of the FCFS game: repeatedly assign the globally
// minimum-distance (unassigned agent, facility with residual capacity) pair.
// Distance ties go to facility 1, then to the smaller agent index.
inline TwoFacilityAssignment greedy_ne_assignment(const Instance& inst, double y1, double y2,
                                                  int k1, int k2) {
    const auto& x = inst.positions;
    const int n = inst.n();
    if (k1 < 1 || k2 < 1 || k1 + k2 > n) {
        throw std::invalid_argument("greedy_ne_assignment: infeasible capacity counts");
    }
    TwoFacilityAssignment out;
    out.facility_of.assign(static_cast<std::size_t>(n), -1);

    struct Cursor {
        double y;
        int left, right, remaining;
    };
    Cursor cur[2];
    const double ys[2] = {y1, y2};
    const int caps[2] = {k1, k2};
    for (int j = 0; j < 2; ++j) {
        const int r = static_cast<int>(std::lower_bound(x.begin(), x.end(), ys[j]) - x.begin());
        cur[j] = Cursor{ys[j], r - 1, r, caps[j]};
    }

    auto best = [&](int j, int& idx) {
        auto& c = cur[j];
        while (c.left >= 0 && out.facility_of[static_cast<std::size_t>(c.left)] >= 0) --c.left;
        while (c.right < n && out.facility_of[static_cast<std::size_t>(c.right)] >= 0) ++c.right;
        const double dl = c.left >= 0 ? c.y - x[static_cast<std::size_t>(c.left)]
                                      : std::numeric_limits<double>::infinity();
        const double dr = c.right < n ? x[static_cast<std::size_t>(c.right)] - c.y
                                      : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            idx = c.left;
            return dl;
        }
        idx = c.right;
        return dr;
    };

    double total = 0.0;
    int assigned = 0;
    while ((cur[0].remaining > 0 || cur[1].remaining > 0) && assigned < n) {
        int idx1 = -1, idx2 = -1;
        const double d1 = cur[0].remaining > 0 ? best(0, idx1)
                                               : std::numeric_limits<double>::infinity();
        const double d2 = cur[1].remaining > 0 ? best(1, idx2)
                                               : std::numeric_limits<double>::infinity();
        if (!std::isfinite(d1) && !std::isfinite(d2)) break;
        const int j = d1 <= d2 ? 0 : 1;
        const int idx = j == 0 ? idx1 : idx2;
        out.facility_of[static_cast<std::size_t>(idx)] = static_cast<std::int8_t>(j);
        --cur[j].remaining;
        ++assigned;
        total += 1.0 - (j == 0 ? d1 : d2);
    }
    out.sw = total / n;
    return out;
}

inline double empirical_sw_two(const Instance& inst, double y1, double y2, double q1, double q2) {
    const int k1 = capacity_count(q1, inst.n());
    const int k2 = capacity_count(q2, inst.n());
    return greedy_ne_assignment(inst, y1, y2, k1, k2).sw;
}

}  // namespace flpsr
