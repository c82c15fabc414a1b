// Absolutely continuous probability measures on [0, 1] with evaluable
// density, cdf and quantile. Numeric distributions cache the cdf on a uniform
// grid (per-cell adaptive Simpson masses) and interpolate with a monotone
// cubic Hermite whose node derivatives are the exact density values, clamped
// per Fritsch-Carlson so the interpolant cannot overshoot.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flpsr/quadrature.hpp"
#include "flpsr/rng.hpp"

namespace flpsr {

enum class ClassTag {
    MonotoneNonIncreasing,
    MonotoneNonDecreasing,
    SinglePeaked,
    SingleDipped,
    General,
};

inline const char* to_string(ClassTag tag) {
    switch (tag) {
        case ClassTag::MonotoneNonIncreasing: return "MonotoneNonIncreasing";
        case ClassTag::MonotoneNonDecreasing: return "MonotoneNonDecreasing";
        case ClassTag::SinglePeaked: return "SinglePeaked";
        case ClassTag::SingleDipped: return "SingleDipped";
        case ClassTag::General: return "General";
    }
    return "?";
}

// Monotone cdf table on a uniform grid over [0, 1].
struct CdfGrid {
    int cells = 0;
    std::vector<double> cdf;    // node values, cdf[0] = 0, cdf[cells] = 1
    std::vector<double> slope;  // clamped Hermite derivatives at nodes

    double h() const { return 1.0 / cells; }

    double eval(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        const double step = h();
        int i = static_cast<int>(x * cells);
        if (i >= cells) i = cells - 1;
        const double t = (x - i * step) / step;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * cdf[i] + h10 * step * slope[i] + h01 * cdf[i + 1] + h11 * step * slope[i + 1];
    }

    // Bisection on the interpolant within the bracketing cell.
    double inverse(double p) const {
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 1.0;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), p);
        int i = static_cast<int>(it - cdf.begin()) - 1;
        i = std::clamp(i, 0, cells - 1);
        double lo = i * h();
        double hi = lo + h();
        for (int k = 0; k < 50; ++k) {
            const double mid = 0.5 * (lo + hi);
            (eval(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

class Distribution {
public:
    using Fn = std::function<double(double)>;

    Distribution(Fn density, Fn cdf, Fn quantile, ClassTag tag, bool symmetric,
                 std::shared_ptr<const CdfGrid> grid = nullptr)
        : density_(std::move(density)),
          cdf_(std::move(cdf)),
          quantile_(std::move(quantile)),
          tag_(tag),
          symmetric_(symmetric),
          grid_(std::move(grid)) {}

    double density(double x) const { return density_(x); }
    double cdf(double x) const { return cdf_(x); }
    double quantile(double p) const { return quantile_(p); }
    ClassTag class_tag() const { return tag_; }
    bool is_symmetric() const { return symmetric_; }
    const CdfGrid* grid() const { return grid_.get(); }

private:
    Fn density_;
    Fn cdf_;
    Fn quantile_;
    ClassTag tag_;
    bool symmetric_;
    std::shared_ptr<const CdfGrid> grid_;
};

namespace detail {

inline std::shared_ptr<CdfGrid> build_cdf_grid(
    const std::function<double(double)>& density, int cells,
    const std::function<double()>& first_cell_mass = nullptr,
    const std::function<double()>& last_cell_mass = nullptr) {
    if (cells < 16) throw std::invalid_argument("grid resolution too small");
    auto grid = std::make_shared<CdfGrid>();
    grid->cells = cells;
    grid->cdf.assign(cells + 1, 0.0);
    grid->slope.assign(cells + 1, 0.0);
    const double h = 1.0 / cells;

    std::vector<double> mass(cells, 0.0);
    for (int i = 0; i < cells; ++i) {
        const double a = i * h;
        const double b = (i + 1) * h;
        if (i == 0 && first_cell_mass) {
            mass[i] = first_cell_mass();
        } else if (i == cells - 1 && last_cell_mass) {
            mass[i] = last_cell_mass();
        } else {
            mass[i] = adaptive_simpson(density, a, b, 1e-13);
        }
        if (!(mass[i] >= -1e-12) || !std::isfinite(mass[i])) {
            throw std::invalid_argument("density not integrable on cell " + std::to_string(i));
        }
        mass[i] = std::max(mass[i], 0.0);
    }

    double total = 0.0;
    for (double m : mass) total += m;
    if (!(total > 0.0) || std::abs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("density mass " + std::to_string(total) +
                                    " differs from 1 beyond 1e-6");
    }

    // Interior flat spans longer than one grid cell break the strict cdf
    // increase that the radius equation needs.
    for (int i = 1; i + 2 < cells; ++i) {
        if (mass[i] <= 0.0 && mass[i + 1] <= 0.0) {
            throw std::invalid_argument("density vanishes on an interior span near x=" +
                                        std::to_string(i * h));
        }
    }

    for (int i = 0; i < cells; ++i) grid->cdf[i + 1] = grid->cdf[i] + mass[i] / total;
    grid->cdf[0] = 0.0;
    grid->cdf[cells] = 1.0;

    for (int i = 0; i <= cells; ++i) {
        double d = density(std::clamp(i * h, 0.0, 1.0)) / total;
        if (!std::isfinite(d) || d < 0.0) d = 0.0;
        double cap = std::numeric_limits<double>::infinity();
        if (i > 0) cap = std::min(cap, 3.0 * mass[i - 1] / (h * total));
        if (i < cells) cap = std::min(cap, 3.0 * mass[i] / (h * total));
        grid->slope[i] = std::min(d, cap);
    }
    return grid;
}

inline ClassTag infer_class_tag(const std::function<double(double)>& density, int n = 4096,
                                double tol = 1e-9) {
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = density(static_cast<double>(i) / n);

    bool non_increasing = true, non_decreasing = true;
    for (int i = 0; i < n; ++i) {
        if (f[i + 1] > f[i] + tol) non_increasing = false;
        if (f[i + 1] < f[i] - tol) non_decreasing = false;
    }
    if (non_increasing) return ClassTag::MonotoneNonIncreasing;
    if (non_decreasing) return ClassTag::MonotoneNonDecreasing;

    const auto peak = std::max_element(f.begin(), f.end()) - f.begin();
    bool single_peaked = true;
    for (long i = 0; i < peak; ++i)
        if (f[i + 1] < f[i] - tol) single_peaked = false;
    for (long i = peak; i < n; ++i)
        if (f[i + 1] > f[i] + tol) single_peaked = false;
    if (single_peaked) return ClassTag::SinglePeaked;

    const auto dip = std::min_element(f.begin(), f.end()) - f.begin();
    bool single_dipped = true;
    for (long i = 0; i < dip; ++i)
        if (f[i + 1] > f[i] + tol) single_dipped = false;
    for (long i = dip; i < n; ++i)
        if (f[i + 1] < f[i] - tol) single_dipped = false;
    if (single_dipped) return ClassTag::SingleDipped;

    return ClassTag::General;
}

inline bool infer_symmetric(const std::function<double(double)>& density, int n = 4096,
                            double tol = 1e-8) {
    for (int i = 0; i <= n / 2; ++i) {
        const double x = static_cast<double>(i) / n;
        if (std::abs(density(x) - density(1.0 - x)) > tol) return false;
    }
    return true;
}

}  // namespace detail

inline Distribution make_uniform() {
    auto density = [](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : 1.0; };
    auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    auto quantile = [](double p) { return std::clamp(p, 0.0, 1.0); };
    return Distribution(density, cdf, quantile, ClassTag::MonotoneNonIncreasing, true);
}

// Generic numeric builder for a bounded density with unit mass (within 1e-6).
inline Distribution make_from_density(std::function<double(double)> density,
                                      int grid_resolution = 4096,
                                      std::optional<ClassTag> tag_override = std::nullopt,
                                      std::optional<bool> symmetric_override = std::nullopt) {
    auto grid = detail::build_cdf_grid(density, grid_resolution);
    const ClassTag tag =
        tag_override ? *tag_override : detail::infer_class_tag(density, grid_resolution);
    const bool symmetric =
        symmetric_override ? *symmetric_override : detail::infer_symmetric(density, grid_resolution);
    auto cdf = [grid](double x) { return grid->eval(x); };
    auto quantile = [grid](double p) { return grid->inverse(p); };
    auto dens = [density](double x) { return (x < 0.0 || x > 1.0) ? 0.0 : density(x); };
    return Distribution(dens, cdf, quantile, tag, symmetric, grid);
}

inline Distribution make_beta(double alpha, double beta, int grid_resolution = 4096) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("beta distribution requires alpha > 0 and beta > 0");
    }
    const double log_norm = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
    auto density = [alpha, beta, log_norm](double x) {
        if (x < 0.0 || x > 1.0) return 0.0;
        if (x == 0.0) return alpha > 1.0 ? 0.0 : (alpha == 1.0 ? std::exp(-log_norm) : HUGE_VAL);
        if (x == 1.0) return beta > 1.0 ? 0.0 : (beta == 1.0 ? std::exp(-log_norm) : HUGE_VAL);
        return std::exp((alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log(1.0 - x) - log_norm);
    };

    // Boundary cells via the substitution u = x^alpha (resp. u = (1-x)^beta),
    // which keeps the integrand bounded for alpha < 1 or beta < 1.
    const double h = 1.0 / grid_resolution;
    auto first_cell = [alpha, beta, log_norm, h]() {
        auto g = [alpha, beta](double u) {
            return std::pow(1.0 - std::pow(u, 1.0 / alpha), beta - 1.0);
        };
        return std::exp(-log_norm) / alpha *
               adaptive_simpson(g, 0.0, std::pow(h, alpha), 1e-14);
    };
    auto last_cell = [alpha, beta, log_norm, h]() {
        auto g = [alpha, beta](double u) {
            return std::pow(1.0 - std::pow(u, 1.0 / beta), alpha - 1.0);
        };
        return std::exp(-log_norm) / beta *
               adaptive_simpson(g, 0.0, std::pow(h, beta), 1e-14);
    };

    auto grid = detail::build_cdf_grid(density, grid_resolution, first_cell, last_cell);

    ClassTag tag;
    if (alpha > 1.0 && beta > 1.0) {
        tag = ClassTag::SinglePeaked;
    } else if (alpha < 1.0 && beta < 1.0) {
        tag = ClassTag::SingleDipped;
    } else if (alpha <= 1.0 && beta <= 1.0) {
        tag = ClassTag::MonotoneNonIncreasing;  // Beta(1,1) is the uniform
    } else if (alpha <= 1.0) {
        tag = ClassTag::MonotoneNonIncreasing;
    } else {
        tag = ClassTag::MonotoneNonDecreasing;
    }
    const bool symmetric = alpha == beta;

    auto cdf = [grid](double x) { return grid->eval(x); };
    auto quantile = [grid](double p) { return grid->inverse(p); };
    return Distribution(density, cdf, quantile, tag, symmetric, grid);
}

inline Distribution make_piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw std::invalid_argument("piecewise linear density needs >= 2 knots");
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (!(knots[i + 1].first > knots[i].first)) {
            throw std::invalid_argument("piecewise linear knots must have strictly increasing x");
        }
    }
    if (std::abs(knots.front().first) > 1e-12 || std::abs(knots.back().first - 1.0) > 1e-12) {
        throw std::invalid_argument("piecewise linear knots must cover [0, 1]");
    }
    knots.front().first = 0.0;
    knots.back().first = 1.0;
    for (auto& [x, v] : knots) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw std::invalid_argument("piecewise linear density values must be finite and >= 0");
        }
    }
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        if (knots[i].second <= 0.0 && knots[i + 1].second <= 0.0) {
            throw std::invalid_argument("density vanishes on an interior span");
        }
    }

    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        mass += 0.5 * (knots[i].second + knots[i + 1].second) *
                (knots[i + 1].first - knots[i].first);
    }
    if (!(mass > 0.0)) throw std::invalid_argument("piecewise linear density has zero mass");
    for (auto& [x, v] : knots) v /= mass;

    struct Table {
        std::vector<double> x, f, F;
    };
    auto tab = std::make_shared<Table>();
    tab->x.reserve(knots.size());
    tab->f.reserve(knots.size());
    tab->F.assign(knots.size(), 0.0);
    for (auto& [x, v] : knots) {
        tab->x.push_back(x);
        tab->f.push_back(v);
    }
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        tab->F[i + 1] = tab->F[i] + 0.5 * (tab->f[i] + tab->f[i + 1]) * (tab->x[i + 1] - tab->x[i]);
    }
    tab->F.back() = 1.0;

    auto segment = [tab](double x) {
        const auto it = std::upper_bound(tab->x.begin(), tab->x.end(), x);
        return std::clamp<std::ptrdiff_t>(it - tab->x.begin() - 1, 0,
                                          static_cast<std::ptrdiff_t>(tab->x.size()) - 2);
    };
    auto density = [tab, segment](double x) {
        if (x < 0.0 || x > 1.0) return 0.0;
        const auto i = segment(x);
        const double t = (x - tab->x[i]) / (tab->x[i + 1] - tab->x[i]);
        return tab->f[i] + t * (tab->f[i + 1] - tab->f[i]);
    };
    auto cdf = [tab, segment](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        const auto i = segment(x);
        const double w = tab->x[i + 1] - tab->x[i];
        const double t = x - tab->x[i];
        const double slope = (tab->f[i + 1] - tab->f[i]) / w;
        return tab->F[i] + tab->f[i] * t + 0.5 * slope * t * t;
    };
    auto quantile = [cdf](double p) {
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return 1.0;
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    const ClassTag tag = detail::infer_class_tag(density);
    const bool symmetric = detail::infer_symmetric(density);
    return Distribution(density, cdf, quantile, tag, symmetric);
}

// Parameterized family for non-identically distributed agents: component
// densities f(x | theta) plus the theta interval on which f(x | .) is
// supported (so the fixed-order rule never straddles an indicator jump).
struct MixtureFamily {
    std::function<double(double /*theta*/, double /*x*/)> component_density;
    std::function<std::pair<double, double>(double /*x*/)> theta_support =
        [](double) { return std::pair<double, double>{0.0, 1.0}; };
};

inline MixtureFamily uniform_prefix_family() {
    MixtureFamily fam;
    fam.component_density = [](double theta, double x) {
        return (theta > 0.0 && x >= 0.0 && x <= theta) ? 1.0 / theta : 0.0;
    };
    fam.theta_support = [](double x) { return std::pair<double, double>{x, 1.0}; };
    return fam;
}

inline Distribution mix_family(const MixtureFamily& family,
                               const std::function<double(double)>& param_density,
                               int quad_order = 64, int grid_resolution = 4096) {
    const double eta_mass = adaptive_simpson(param_density, 0.0, 1.0, 1e-9);
    if (std::abs(eta_mass - 1.0) > 1e-6) {
        throw std::invalid_argument("param_density mass " + std::to_string(eta_mass) +
                                    " differs from 1 beyond 1e-6");
    }
    auto rule = std::make_shared<GaussLegendre>(quad_order);
    auto component = family.component_density;
    auto support = family.theta_support;
    auto density = [rule, component, support, param_density](double x) {
        if (x < 0.0 || x > 1.0) return 0.0;
        auto [lo, hi] = support(x);
        lo = std::clamp(lo, 0.0, 1.0);
        hi = std::clamp(hi, 0.0, 1.0);
        return rule->integrate(
            [&](double theta) { return component(theta, x) * param_density(theta); }, lo, hi);
    };
    return make_from_density(density, grid_resolution);
}

enum class DistKind { Uniform, Beta, PiecewiseLinearDensity, ParamMixture };

struct DistributionSpec {
    DistKind kind = DistKind::Uniform;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::pair<double, double>> knots;
    std::string family = "uniform_prefix";
    std::vector<double> param_density_poly;  // coefficients in theta, ascending degree
    int grid_resolution = 4096;
};

inline Distribution build(const DistributionSpec& spec) {
    switch (spec.kind) {
        case DistKind::Uniform:
            return make_uniform();
        case DistKind::Beta:
            return make_beta(spec.alpha, spec.beta, spec.grid_resolution);
        case DistKind::PiecewiseLinearDensity:
            return make_piecewise_linear(spec.knots);
        case DistKind::ParamMixture: {
            if (spec.family != "uniform_prefix") {
                throw std::invalid_argument("unknown mixture family: " + spec.family);
            }
            auto poly = spec.param_density_poly;
            if (poly.empty()) throw std::invalid_argument("param_density_poly must be non-empty");
            auto eta = [poly](double theta) {
                double acc = 0.0;
                for (std::size_t k = poly.size(); k-- > 0;) acc = acc * theta + poly[k];
                return acc;
            };
            return mix_family(uniform_prefix_family(), eta, 64, spec.grid_resolution);
        }
    }
    throw std::invalid_argument("invalid distribution spec");
}

// Sorted agent positions.
struct Instance {
    std::vector<double> positions;
    int n() const { return static_cast<int>(positions.size()); }
};

// floor(q * n), nudged so that decimal capacities are not off by one ulp.
inline int capacity_count(double q, int n) {
    return static_cast<int>(std::floor(q * n + 1e-9));
}

inline Instance sample(const Distribution& d, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    CounterRng rng{seed};
    Instance inst;
    inst.positions.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        inst.positions[static_cast<std::size_t>(i)] =
            d.quantile(rng.uniform(static_cast<std::uint64_t>(i)));
    }
    std::sort(inst.positions.begin(), inst.positions.end());
    return inst;
}

}  // namespace flpsr
