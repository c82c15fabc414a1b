// Adaptive Simpson quadrature and fixed-order Gauss-Legendre rules.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace flpsr {

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb)) {
        throw std::invalid_argument("adaptive_simpson: integrand not finite on [" +
                                    std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration
// on the Legendre recurrence (accurate to ~1e-15 for the orders used here).
class GaussLegendre {
public:
    explicit GaussLegendre(int order) : nodes_(order), weights_(order) {
        if (order < 1) throw std::invalid_argument("GaussLegendre: order must be positive");
        const int n = order;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            nodes_[i] = -x;
            nodes_[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights_[i] = w;
            weights_[n - 1 - i] = w;
        }
    }

    template <typename F>
    double integrate(const F& f, double a, double b) const {
        if (!(b > a)) return 0.0;
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            acc += weights_[i] * f(c + h * nodes_[i]);
        }
        return h * acc;
    }

    static const GaussLegendre& order64() {
        static const GaussLegendre rule(64);
        return rule;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

}  // namespace flpsr
