// Finite-n Monte Carlo engine: percentile mechanisms on sampled instances,
// exact instance-optimal oracles (consecutive served windows with the
// facility at the window median), and Bayesian approximation-ratio estimates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "flpsr/distribution.hpp"
#include "flpsr/parallel.hpp"
#include "flpsr/rng.hpp"
#include "flpsr/welfare.hpp"

namespace flpsr {

// 0-based sorted index of the facility placed by percentile p.
inline int percentile_index(double p, int n) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("percentile must be in [0, 1]");
    const int idx = static_cast<int>(std::floor(p * (n - 1) + 1e-9));
    return std::clamp(idx, 0, n - 1);
}

inline double run_mechanism(const Instance& inst, const std::vector<double>& percentiles,
                            const std::vector<double>& capacities) {
    const int n = inst.n();
    if (percentiles.empty() || percentiles.size() > 2 || percentiles.size() != capacities.size()) {
        throw std::invalid_argument("run_mechanism: supports m in {1, 2}");
    }
    if (percentiles.size() == 1) {
        const double y = inst.positions[static_cast<std::size_t>(percentile_index(percentiles[0], n))];
        return empirical_sw_one(inst, y, capacities[0]);
    }
    const double y1 = inst.positions[static_cast<std::size_t>(percentile_index(percentiles[0], n))];
    const double y2 = inst.positions[static_cast<std::size_t>(percentile_index(percentiles[1], n))];
    return empirical_sw_two(inst, y1, y2, capacities[0], capacities[1]);
}

namespace detail {

// SW of serving the window [i, i+k) with the facility at the window's lower
// median, via prefix sums: O(1) per window.
struct WindowSw {
    const std::vector<double>& x;
    std::vector<double> prefix;
    int n;

    explicit WindowSw(const Instance& inst) : x(inst.positions), n(inst.n()) {
        prefix.assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 0; i < n; ++i) prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] + x[static_cast<std::size_t>(i)];
    }

    double sw(int i, int k) const {
        const int med = i + (k - 1) / 2;
        const double xm = x[static_cast<std::size_t>(med)];
        const int cnt_l = med - i + 1;
        const int cnt_r = k - cnt_l;
        const double sum_l = prefix[static_cast<std::size_t>(med) + 1] - prefix[static_cast<std::size_t>(i)];
        const double sum_r = prefix[static_cast<std::size_t>(i + k)] - prefix[static_cast<std::size_t>(med) + 1];
        const double cost = (cnt_l * xm - sum_l) + (sum_r - cnt_r * xm);
        return (k - cost) / n;
    }
};

}  // namespace detail

// Exact optimum for one facility: an optimal served set is k consecutive
// agents with the facility at the window median; slide the window.
inline double instance_opt_one(const Instance& inst, double q) {
    const int n = inst.n();
    const int k = capacity_count(q, n);
    if (k < 1) throw std::invalid_argument("instance_opt_one: capacity count is zero");
    detail::WindowSw win(inst);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i + k <= n; ++i) best = std::max(best, win.sw(i, k));
    return best;
}

// Exact optimum for two facilities: two disjoint consecutive windows (both
// size orders), each with its facility at the window median.
inline double instance_opt_two(const Instance& inst, double q1, double q2) {
    const int n = inst.n();
    const int k1 = capacity_count(q1, n);
    const int k2 = capacity_count(q2, n);
    if (k1 < 1 || k2 < 1 || k1 + k2 > n) {
        throw std::invalid_argument("instance_opt_two: infeasible capacity counts");
    }
    detail::WindowSw win(inst);

    auto best_split = [&](int ka, int kb) {
        // suffix_best[s] = best size-kb window starting at >= s
        std::vector<double> suffix_best(static_cast<std::size_t>(n) + 1,
                                        -std::numeric_limits<double>::infinity());
        for (int s = n - kb; s >= 0; --s) {
            suffix_best[static_cast<std::size_t>(s)] =
                std::max(suffix_best[static_cast<std::size_t>(s) + 1], win.sw(s, kb));
        }
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i + ka + kb <= n; ++i) {
            best = std::max(best, win.sw(i, ka) + suffix_best[static_cast<std::size_t>(i + ka)]);
        }
        return best;
    };

    double best = best_split(k1, k2);
    if (k1 != k2) best = std::max(best, best_split(k2, k1));
    return best;
}

struct ExperimentConfig {
    Distribution dist;
    std::vector<double> capacities;   // size m in {1, 2}
    std::vector<double> percentiles;  // sorted ascending, aligned with capacities
    std::vector<int> n_values;
    int replications = 10000;
    std::uint64_t seed = 0;
};

struct RatioEstimate {
    int n = 0;
    double mean_sw_mech = 0.0;
    double mean_sw_opt = 0.0;
    double ratio = 0.0;         // mean_sw_opt / mean_sw_mech
    double ci_halfwidth = 0.0;  // 95% delta-method half-width of the ratio
    double abs_error = 0.0;     // |mean_sw_mech - limit_sw|
};

namespace detail {

inline void validate_config(const ExperimentConfig& cfg) {
    const std::size_t m = cfg.capacities.size();
    if (m < 1 || m > 2 || cfg.percentiles.size() != m) {
        throw std::invalid_argument("experiment config: m must be 1 or 2");
    }
    if (cfg.replications < 1) throw std::invalid_argument("experiment config: replications must be >= 1");
    if (cfg.n_values.empty()) throw std::invalid_argument("experiment config: empty n list");
    for (std::size_t j = 0; j + 1 < m; ++j) {
        if (cfg.percentiles[j] > cfg.percentiles[j + 1]) {
            throw std::invalid_argument("experiment config: percentiles must be sorted ascending");
        }
    }
    double total = 0.0;
    for (double q : cfg.capacities) {
        if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("experiment config: capacity out of range");
        total += q;
    }
    if (m == 2 && !(total < 1.0)) {
        throw std::invalid_argument("experiment config: total capacity must be < 1 for m = 2");
    }
    for (int n : cfg.n_values) {
        if (n < 1) throw std::invalid_argument("experiment config: n must be >= 1");
        for (std::size_t j = 0; j < m; ++j) {
            if (capacity_count(cfg.capacities[j], n) < 1) {
                throw std::invalid_argument("experiment config: capacity count is zero at n=" +
                                            std::to_string(n));
            }
        }
        if (m == 2) {
            // finite-n Equilibrium Stability of the percentile pair
            const auto fl = [](double v) { return std::floor(v + 1e-9); };
            const double lhs = fl(cfg.percentiles[1] * (n - 1)) - fl(cfg.percentiles[0] * (n - 1));
            const double rhs = fl((cfg.capacities[0] + cfg.capacities[1]) * (n - 1));
            if (lhs < rhs) {
                throw std::invalid_argument(
                    "experiment config: percentile pair is not Equilibrium Stable at n=" +
                    std::to_string(n));
            }
        }
    }
}

inline double limit_sw_of(const ExperimentConfig& cfg) {
    if (cfg.capacities.size() == 1) {
        return w_one(cfg.dist, cfg.capacities[0], cfg.dist.quantile(cfg.percentiles[0])).limit_sw;
    }
    // ES percentile pair: the limit decomposes into two independent balls.
    const double w = w_one(cfg.dist, cfg.capacities[0], cfg.dist.quantile(cfg.percentiles[0])).w_value +
                     w_one(cfg.dist, cfg.capacities[1], cfg.dist.quantile(cfg.percentiles[1])).w_value;
    return cfg.capacities[0] + cfg.capacities[1] - w;
}

}  // namespace detail

inline std::vector<RatioEstimate> estimate_ratio(const ExperimentConfig& cfg) {
    detail::validate_config(cfg);
    const double limit_sw = detail::limit_sw_of(cfg);
    const int reps = cfg.replications;
    const std::size_t m = cfg.capacities.size();

    std::vector<RatioEstimate> out;
    out.reserve(cfg.n_values.size());
    for (int n : cfg.n_values) {
        std::vector<double> mech(static_cast<std::size_t>(reps));
        std::vector<double> opt(static_cast<std::size_t>(reps));
        parallel_for(reps, [&](std::int64_t r) {
            const Instance inst =
                sample(cfg.dist, n, replication_seed(cfg.seed, static_cast<std::uint64_t>(n),
                                                     static_cast<std::uint64_t>(r)));
            mech[static_cast<std::size_t>(r)] = run_mechanism(inst, cfg.percentiles, cfg.capacities);
            opt[static_cast<std::size_t>(r)] =
                m == 1 ? instance_opt_one(inst, cfg.capacities[0])
                       : instance_opt_two(inst, cfg.capacities[0], cfg.capacities[1]);
        }, 8);

        const double mean_mech = pairwise_sum(mech) / reps;
        const double mean_opt = pairwise_sum(opt) / reps;
        if (!(mean_mech > 0.0)) {
            throw std::runtime_error("estimate_ratio: degenerate zero mechanism welfare at n=" +
                                     std::to_string(n));
        }

        // delta-method variance of the ratio of means
        std::vector<double> vm(static_cast<std::size_t>(reps)), vo(static_cast<std::size_t>(reps)),
            cov(static_cast<std::size_t>(reps));
        for (int r = 0; r < reps; ++r) {
            const double dm = mech[static_cast<std::size_t>(r)] - mean_mech;
            const double dopt = opt[static_cast<std::size_t>(r)] - mean_opt;
            vm[static_cast<std::size_t>(r)] = dm * dm;
            vo[static_cast<std::size_t>(r)] = dopt * dopt;
            cov[static_cast<std::size_t>(r)] = dm * dopt;
        }
        const double denom = reps > 1 ? (reps - 1.0) : 1.0;
        const double var_mech = pairwise_sum(vm) / denom;
        const double var_opt = pairwise_sum(vo) / denom;
        const double cov_mo = pairwise_sum(cov) / denom;
        const double ratio = mean_opt / mean_mech;
        const double var_ratio =
            (var_opt / (mean_mech * mean_mech) -
             2.0 * mean_opt * cov_mo / (mean_mech * mean_mech * mean_mech) +
             mean_opt * mean_opt * var_mech / (mean_mech * mean_mech * mean_mech * mean_mech)) /
            reps;

        RatioEstimate est;
        est.n = n;
        est.mean_sw_mech = mean_mech;
        est.mean_sw_opt = mean_opt;
        est.ratio = ratio;
        est.ci_halfwidth = 1.959963984540054 * std::sqrt(std::max(var_ratio, 0.0));
        est.abs_error = std::abs(mean_mech - limit_sw);
        out.push_back(est);
    }
    return out;
}

// Least-squares slope of log(err) against log(n).
inline double fit_loglog_slope(const std::vector<RatioEstimate>& estimates) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (const auto& e : estimates) {
        if (!(e.abs_error > 0.0)) continue;
        const double lx = std::log(static_cast<double>(e.n));
        const double ly = std::log(e.abs_error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 2) return std::numeric_limits<double>::quiet_NaN();
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

struct ConvergenceResult {
    std::vector<RatioEstimate> estimates;
    double loglog_slope = 0.0;
};

inline ConvergenceResult convergence_curve(const ExperimentConfig& cfg) {
    ConvergenceResult out;
    out.estimates = estimate_ratio(cfg);
    out.loglog_slope = fit_loglog_slope(out.estimates);
    return out;
}

}  // namespace flpsr
