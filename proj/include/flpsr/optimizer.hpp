// Optimal / best percentile mechanisms: closed-form class dispatch plus
// derivative root-finding for one facility, and the ES-constrained grid
// search (outer grid over the left position, inner grid over the right
// position past the capacity gap) for two facilities.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flpsr/distribution.hpp"
#include "flpsr/parallel.hpp"
#include "flpsr/welfare.hpp"

namespace flpsr {

enum class OneFacilityMethod {
    ClosedFormMonotone,
    ClosedFormSymmetricSP,
    ClosedFormSD,
    BisectionOnDerivative,
    GridFallback,
};

inline const char* to_string(OneFacilityMethod m) {
    switch (m) {
        case OneFacilityMethod::ClosedFormMonotone: return "ClosedFormMonotone";
        case OneFacilityMethod::ClosedFormSymmetricSP: return "ClosedFormSymmetricSP";
        case OneFacilityMethod::ClosedFormSD: return "ClosedFormSD";
        case OneFacilityMethod::BisectionOnDerivative: return "BisectionOnDerivative";
        case OneFacilityMethod::GridFallback: return "GridFallback";
    }
    return "?";
}

struct OneFacilitySolution {
    double percentile = 0.0;
    double position = 0.0;
    double w_min = 0.0;
    double limit_sw = 0.0;
    OneFacilityMethod method = OneFacilityMethod::GridFallback;
};

namespace detail {

inline std::vector<double> verification_grid_values(const Distribution& d, double q,
                                                    int points = 2001) {
    std::vector<double> w(static_cast<std::size_t>(points));
    parallel_for(points, [&](std::int64_t i) {
        const double y = static_cast<double>(i) / (points - 1);
        w[static_cast<std::size_t>(i)] = w_one(d, q, y).w_value;
    });
    return w;
}

struct NumericOneResult {
    double y;
    double w;
    bool from_root;
};

// Root-scan of the welfare derivative over the optimal-position interval
// [quantile(q/2), quantile(1-q/2)], followed by bisection on each bracket.
inline NumericOneResult numeric_one(const Distribution& d, double q, double tol) {
    const double a = d.quantile(0.5 * q);
    const double b = d.quantile(1.0 - 0.5 * q);
    if (b - a < 1e-12) return {a, w_one(d, q, a).w_value, false};

    constexpr int kScan = 512;
    std::vector<double> ys(kScan), gs(kScan);
    parallel_for(kScan, [&](std::int64_t i) {
        ys[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (kScan - 1);
        gs[static_cast<std::size_t>(i)] =
            w_one_derivative(d, q, ys[static_cast<std::size_t>(i)]);
    });

    std::vector<double> candidates = {a, b};
    bool any_root = false;
    for (int i = 0; i + 1 < kScan; ++i) {
        if (gs[i] == 0.0) {
            candidates.push_back(ys[i]);
            any_root = true;
            continue;
        }
        if (gs[i] * gs[i + 1] < 0.0) {
            double lo = ys[i], hi = ys[i + 1];
            double glo = gs[i];
            while (hi - lo > std::max(tol, 1e-14)) {
                const double mid = 0.5 * (lo + hi);
                const double gm = w_one_derivative(d, q, mid);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            candidates.push_back(0.5 * (lo + hi));
            any_root = true;
        }
    }
    if (gs[kScan - 1] == 0.0) {
        candidates.push_back(ys[kScan - 1]);
        any_root = true;
    }

    if (!any_root) {
        // Monotone derivative: fall back to the scan argmin.
        std::vector<double> w(kScan);
        parallel_for(kScan, [&](std::int64_t i) {
            w[static_cast<std::size_t>(i)] = w_one(d, q, ys[static_cast<std::size_t>(i)]).w_value;
        });
        std::size_t best = 0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i] < w[best]) best = i;
        }
        return {ys[best], w[best], false};
    }

    double best_y = candidates.front();
    double best_w = std::numeric_limits<double>::infinity();
    bool best_root = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double w = w_one(d, q, candidates[i]).w_value;
        if (w < best_w - 1e-15 || (std::abs(w - best_w) <= 1e-15 && candidates[i] < best_y)) {
            best_w = w;
            best_y = candidates[i];
            best_root = i >= 2;  // first two candidates are the interval endpoints
        }
    }
    return {best_y, best_w, best_root};
}

}  // namespace detail

// Forced numeric path (no class dispatch); also the fallback when a
// closed-form answer fails the verification grid.
inline OneFacilitySolution optimize_one_numeric(const Distribution& d, double q,
                                                double tol = 1e-8) {
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("optimize_one: capacity must be in (0, 1]");
    const auto num = detail::numeric_one(d, q, tol);
    OneFacilitySolution sol;
    sol.position = num.y;
    sol.percentile = d.cdf(num.y);
    sol.w_min = num.w;
    sol.limit_sw = q - num.w;
    sol.method = num.from_root ? OneFacilityMethod::BisectionOnDerivative
                               : OneFacilityMethod::GridFallback;
    return sol;
}

inline OneFacilitySolution optimize_one(const Distribution& d, double q, double tol = 1e-8) {
    if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("optimize_one: capacity must be in (0, 1]");

    std::optional<OneFacilitySolution> closed;
    switch (d.class_tag()) {
        case ClassTag::MonotoneNonIncreasing: {
            OneFacilitySolution s;
            s.percentile = 0.5 * q;
            s.position = d.quantile(s.percentile);
            s.method = OneFacilityMethod::ClosedFormMonotone;
            closed = s;
            break;
        }
        case ClassTag::MonotoneNonDecreasing: {
            OneFacilitySolution s;
            s.percentile = 1.0 - 0.5 * q;
            s.position = d.quantile(s.percentile);
            s.method = OneFacilityMethod::ClosedFormMonotone;
            closed = s;
            break;
        }
        case ClassTag::SinglePeaked:
            if (d.is_symmetric()) {
                OneFacilitySolution s;
                s.percentile = 0.5;
                s.position = d.quantile(0.5);
                s.method = OneFacilityMethod::ClosedFormSymmetricSP;
                closed = s;
            }
            break;
        case ClassTag::SingleDipped: {
            OneFacilitySolution s;
            const double p_left = 0.5 * q;
            const double p_right = 1.0 - 0.5 * q;
            const double y_left = d.quantile(p_left);
            const double y_right = d.quantile(p_right);
            const double w_left = w_one(d, q, y_left).w_value;
            const double w_right = w_one(d, q, y_right).w_value;
            if (w_left <= w_right) {
                s.percentile = p_left;
                s.position = y_left;
            } else {
                s.percentile = p_right;
                s.position = y_right;
            }
            s.method = OneFacilityMethod::ClosedFormSD;
            closed = s;
            break;
        }
        case ClassTag::General:
            break;
    }

    const auto grid = detail::verification_grid_values(d, q);
    const double grid_min = *std::min_element(grid.begin(), grid.end());

    if (closed) {
        closed->w_min = w_one(d, q, closed->position).w_value;
        closed->limit_sw = q - closed->w_min;
        if (closed->w_min <= grid_min + 1e-6) return *closed;
    }

    auto sol = optimize_one_numeric(d, q, tol);
    if (sol.w_min > grid_min + 1e-6) {
        // Adopt the verification-grid argmin, clamped into the
        // optimal-position interval.
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (grid[i] < grid[best]) best = i;
        }
        const double a = d.quantile(0.5 * q);
        const double b = d.quantile(1.0 - 0.5 * q);
        const double y = std::clamp(static_cast<double>(best) / (grid.size() - 1), a, b);
        sol.position = y;
        sol.percentile = d.cdf(y);
        sol.w_min = w_one(d, q, y).w_value;
        sol.limit_sw = q - sol.w_min;
        sol.method = OneFacilityMethod::GridFallback;
    }
    return sol;
}

// Largest interval around the optimum on which the welfare functional is flat
// (within tol); used to report flat minima like the uniform distribution.
inline std::pair<double, double> flat_minimum_interval(const Distribution& d, double q,
                                                       double w_min, double tol = 1e-9) {
    const auto grid = detail::verification_grid_values(d, q);
    const int n = static_cast<int>(grid.size());
    int lo = n, hi = -1;
    for (int i = 0; i < n; ++i) {
        if (grid[static_cast<std::size_t>(i)] <= w_min + tol) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    if (hi < 0) return {0.0, 0.0};
    return {static_cast<double>(lo) / (n - 1), static_cast<double>(hi) / (n - 1)};
}

struct TwoFacilityCandidate {
    double y1 = 0.0, y2 = 0.0;
    double w = 0.0;
};

struct UnconstrainedTwoResult {
    std::vector<TwoFacilityCandidate> minimizers;  // near-minimal pairs, sorted by (y1, y2)
    double w_min = 0.0;
    int skipped_cells = 0;  // serving-interval solves that failed to converge
};

// Grid evaluation of the coupled welfare over {y1 <= y2} followed by
// coordinate-descent refinement of the near-minimal band.
inline UnconstrainedTwoResult unconstrained_two_minimizers(const Distribution& d, double q1,
                                                           double q2, int grid_per_axis = 400) {
    if (!(q1 > 0.0) || !(q2 > 0.0) || !(q1 + q2 < 1.0)) {
        throw std::invalid_argument("unconstrained_two_minimizers: needs q1, q2 > 0, q1+q2 < 1");
    }
    if (grid_per_axis < 8) throw std::invalid_argument("grid_per_axis too small");

    const int g = grid_per_axis;
    auto coord = [g](int i) { return static_cast<double>(i) / (g - 1); };
    const std::int64_t cells = static_cast<std::int64_t>(g) * (g + 1) / 2;

    auto cell_to_pair = [g](std::int64_t c, int& i, int& j) {
        // row-major over the upper triangle i <= j
        i = 0;
        std::int64_t rem = c;
        std::int64_t row = g;
        while (rem >= row) {
            rem -= row;
            ++i;
            --row;
        }
        j = i + static_cast<int>(rem);
    };

    auto eval = [&](double y1, double y2) {
        try {
            return w_two(d, q1, q2, y1, y2).w_value;
        } catch (const FixedPointError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    std::vector<double> w(static_cast<std::size_t>(cells));
    parallel_for(cells, [&](std::int64_t c) {
        int i, j;
        cell_to_pair(c, i, j);
        w[static_cast<std::size_t>(c)] = eval(coord(i), coord(j));
    });

    double w_min = std::numeric_limits<double>::infinity();
    int skipped = 0;
    for (double v : w) {
        if (std::isnan(v)) {
            ++skipped;
        } else {
            w_min = std::min(w_min, v);
        }
    }
    if (!std::isfinite(w_min)) {
        throw FixedPointError(std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN());
    }

    std::vector<std::int64_t> band;
    for (std::int64_t c = 0; c < cells; ++c) {
        if (!std::isnan(w[static_cast<std::size_t>(c)]) &&
            w[static_cast<std::size_t>(c)] <= w_min + 1e-6) {
            band.push_back(c);
        }
    }

    // Refine a deterministic subsample of the band (flat landscapes can put
    // thousands of cells in it); unrefined members stay as candidates.
    const std::size_t refine_cap = 512;
    const std::size_t stride = std::max<std::size_t>(1, band.size() / refine_cap);

    auto descend = [&](double y1, double y2, double w0) {
        double step = 1.0 / (g - 1);
        double best = w0;
        int evals = 0;
        while (step > 1e-6 && evals < 2000) {
            bool moved = false;
            const double trial[4][2] = {
                {y1 - step, y2}, {y1 + step, y2}, {y1, y2 - step}, {y1, y2 + step}};
            for (const auto& t : trial) {
                double a = std::clamp(t[0], 0.0, 1.0);
                double b = std::clamp(t[1], 0.0, 1.0);
                if (a > b) continue;
                const double v = eval(a, b);
                ++evals;
                if (!std::isnan(v) && v < best - 1e-15) {
                    best = v;
                    y1 = a;
                    y2 = b;
                    moved = true;
                    break;
                }
            }
            if (!moved) step *= 0.5;
        }
        return TwoFacilityCandidate{y1, y2, best};
    };

    std::vector<TwoFacilityCandidate> cand;
    cand.reserve(band.size() + band.size() / stride + 1);
    std::vector<std::int64_t> refine_list;
    for (std::size_t k = 0; k < band.size(); k += stride) refine_list.push_back(band[k]);

    std::vector<TwoFacilityCandidate> refined(refine_list.size());
    parallel_for(static_cast<std::int64_t>(refine_list.size()), [&](std::int64_t k) {
        int i, j;
        cell_to_pair(refine_list[static_cast<std::size_t>(k)], i, j);
        const std::size_t c = static_cast<std::size_t>(refine_list[static_cast<std::size_t>(k)]);
        refined[static_cast<std::size_t>(k)] = descend(coord(i), coord(j), w[c]);
    }, 1);

    for (const auto& r : refined) cand.push_back(r);
    for (std::int64_t c : band) {
        int i, j;
        cell_to_pair(c, i, j);
        cand.push_back({coord(i), coord(j), w[static_cast<std::size_t>(c)]});
    }

    double w_best = std::numeric_limits<double>::infinity();
    for (const auto& c : cand) w_best = std::min(w_best, c.w);

    UnconstrainedTwoResult out;
    out.w_min = w_best;
    out.skipped_cells = skipped;
    for (const auto& c : cand) {
        if (c.w <= w_best + 1e-6) out.minimizers.push_back(c);
    }
    std::sort(out.minimizers.begin(), out.minimizers.end(), [](const auto& a, const auto& b) {
        return a.y1 != b.y1 ? a.y1 < b.y1 : a.y2 < b.y2;
    });
    out.minimizers.erase(std::unique(out.minimizers.begin(), out.minimizers.end(),
                                     [](const auto& a, const auto& b) {
                                         return a.y1 == b.y1 && a.y2 == b.y2;
                                     }),
                         out.minimizers.end());
    return out;
}

struct EsFeasibility {
    bool feasible = false;
    std::optional<std::pair<double, double>> witness;  // positions (y1, y2)
    std::string reason;
};

// Does an Equilibrium Stable percentile mechanism achieve the unconstrained
// optimum? Short verdicts for the known classes; otherwise search the
// unconstrained minimizers for one with cdf gap >= q1 + q2.
inline EsFeasibility es_optimal_feasible(const Distribution& d, double q1, double q2) {
    if (!(q1 > 0.0) || !(q2 > 0.0) || !(q1 + q2 < 1.0)) {
        throw std::invalid_argument("es_optimal_feasible: needs q1, q2 > 0, q1+q2 < 1");
    }
    const double Q = q1 + q2;
    EsFeasibility out;
    if (Q >= 2.0 / 3.0 - 1e-12) {
        out.feasible = false;
        out.reason = "total capacity >= 2/3";
        return out;
    }
    const ClassTag tag = d.class_tag();
    if (tag == ClassTag::MonotoneNonIncreasing || tag == ClassTag::MonotoneNonDecreasing ||
        tag == ClassTag::SinglePeaked) {
        out.feasible = false;
        out.reason = std::string("distribution class ") + to_string(tag) +
                     " admits no ES optimal percentile mechanism";
        return out;
    }
    if (tag == ClassTag::SingleDipped && d.is_symmetric()) {
        out.feasible = true;
        out.witness = {d.quantile(0.5 * q1), d.quantile(1.0 - 0.5 * q2)};
        out.reason = "symmetric single-dipped: endpoint quantiles are ES and optimal";
        return out;
    }
    const auto res = unconstrained_two_minimizers(d, q1, q2);
    for (const auto& c : res.minimizers) {
        if (d.cdf(c.y2) - d.cdf(c.y1) >= Q - 1e-9) {
            out.feasible = true;
            out.witness = {c.y1, c.y2};
            out.reason = "unconstrained minimizer satisfies the ES mass gap";
            return out;
        }
    }
    out.feasible = false;
    out.reason = "no unconstrained minimizer satisfies the ES mass gap";
    return out;
}

struct TwoFacilitySolution {
    double p1 = 0.0, p2 = 0.0;  // percentiles, ascending
    double y1 = 0.0, y2 = 0.0;  // positions, ascending
    double w_min = 0.0;
    double limit_sw = 0.0;
    bool es_optimal_feasible = false;
    bool orientation_swapped = false;  // capacity q2 placed left of q1
    double delta = 0.0;
};

namespace detail {

struct OrientationResult {
    double w = std::numeric_limits<double>::infinity();
    double t = 0.0, s = 0.0;
};

// One orientation of the constrained search: capacity q_left on the left
// grid, q_right on the right grid. Both grids have spacing <= delta with
// inclusive endpoints, so the returned welfare is within delta of the
// constrained minimum.
inline OrientationResult best_es_orientation(const Distribution& d, double q_left,
                                             double q_right, double delta) {
    const double Q = q_left + q_right;
    const double t_end = d.quantile(1.0 - Q);
    const double bound = d.quantile(1.0 - 0.5 * q_right);

    std::vector<double> ts;
    for (double t = 0.0; t < t_end; t += delta) ts.push_back(t);
    ts.push_back(t_end);

    std::vector<OrientationResult> per_t(ts.size());
    parallel_for(static_cast<std::int64_t>(ts.size()), [&](std::int64_t i) {
        const double t = ts[static_cast<std::size_t>(i)];
        const double w_left = w_one(d, q_left, t).w_value;
        const double M = d.quantile(std::min(d.cdf(t) + Q, 1.0));

        OrientationResult best;
        auto consider = [&](double s) {
            const double w = w_left + w_one(d, q_right, s).w_value;
            if (w < best.w) {
                best.w = w;
                best.t = t;
                best.s = s;
            }
        };
        if (M < bound) {
            for (double s = M; s < bound; s += delta) consider(s);
            consider(bound);
        } else {
            consider(M);
        }
        per_t[static_cast<std::size_t>(i)] = best;
    }, 1);

    OrientationResult best;
    for (const auto& r : per_t) {
        if (r.w < best.w) best = r;
    }
    return best;
}

}  // namespace detail

inline TwoFacilitySolution best_es_two(const Distribution& d, double q1, double q2,
                                       double delta = 0.001) {
    if (!(q1 > 0.0) || !(q2 > 0.0) || !(q1 + q2 < 1.0)) {
        throw std::invalid_argument("best_es_two: needs q1, q2 > 0, q1+q2 < 1");
    }
    if (!(delta > 0.0) || delta > 0.1) {
        throw std::invalid_argument("best_es_two: delta must be in (0, 0.1]");
    }

    const auto fwd = detail::best_es_orientation(d, q1, q2, delta);
    bool swapped = false;
    auto best = fwd;
    if (q1 != q2) {
        const auto rev = detail::best_es_orientation(d, q2, q1, delta);
        if (rev.w < fwd.w) {
            best = rev;
            swapped = true;
        }
    }

    TwoFacilitySolution sol;
    sol.y1 = best.t;
    sol.y2 = best.s;
    sol.p1 = d.cdf(sol.y1);
    sol.p2 = d.cdf(sol.y2);
    sol.w_min = best.w;
    sol.limit_sw = q1 + q2 - best.w;
    sol.orientation_swapped = swapped;
    sol.delta = delta;
    sol.es_optimal_feasible = es_optimal_feasible(d, q1, q2).feasible;
    return sol;
}

}  // namespace flpsr
