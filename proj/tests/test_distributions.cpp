#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "flpsr/distribution.hpp"
#include "flpsr/rng.hpp"

using namespace flpsr;

namespace {

// test-local composite Simpson, independent of the library quadrature
double simpson_mass(const Distribution& d, int panels = 20000) {
    double acc = d.density(0.0) + d.density(1.0);
    for (int i = 1; i < panels; ++i) {
        acc += d.density(static_cast<double>(i) / panels) * (i % 2 ? 4.0 : 2.0);
    }
    return acc / (3.0 * panels);
}

void check_distribution_invariants(const Distribution& d) {
    // density nonnegative, cdf monotone with pinned endpoints
    REQUIRE(d.cdf(0.0) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(d.cdf(1.0) == Catch::Approx(1.0).margin(1e-10));
    double prev = -1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = i / 2000.0;
        REQUIRE(d.density(x) >= 0.0);
        const double F = d.cdf(x);
        REQUIRE(F >= prev - 1e-12);
        prev = F;
    }
    // quantile round trip on a 1001-point grid
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        REQUIRE(std::abs(d.cdf(d.quantile(p)) - p) <= 1e-8);
    }
    // unit mass
    REQUIRE(simpson_mass(d) == Catch::Approx(1.0).margin(1e-8));
}

void check_class_tag_soundness(const Distribution& d) {
    const int n = 2048;
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = d.density(static_cast<double>(i) / n);
    switch (d.class_tag()) {
        case ClassTag::MonotoneNonIncreasing:
            for (int i = 0; i < n; ++i) REQUIRE(f[i] >= f[i + 1] - 1e-9);
            break;
        case ClassTag::MonotoneNonDecreasing:
            for (int i = 0; i < n; ++i) REQUIRE(f[i] <= f[i + 1] + 1e-9);
            break;
        case ClassTag::SinglePeaked: {
            const auto peak = std::max_element(f.begin(), f.end()) - f.begin();
            for (long i = 0; i < peak; ++i) REQUIRE(f[i] <= f[i + 1] + 1e-9);
            for (long i = peak; i < n; ++i) REQUIRE(f[i] >= f[i + 1] - 1e-9);
            break;
        }
        case ClassTag::SingleDipped: {
            const auto dip = std::min_element(f.begin(), f.end()) - f.begin();
            for (long i = 0; i < dip; ++i) REQUIRE(f[i] >= f[i + 1] - 1e-9);
            for (long i = dip; i < n; ++i) REQUIRE(f[i] <= f[i + 1] + 1e-9);
            break;
        }
        case ClassTag::General:
            break;
    }
    if (d.is_symmetric()) {
        for (int i = 0; i <= n; ++i) {
            REQUIRE(std::abs(d.density(static_cast<double>(i) / n) -
                             d.density(1.0 - static_cast<double>(i) / n)) <= 1e-8);
        }
    }
}

}  // namespace

TEST_CASE("uniform distribution closed forms") {
    const auto d = make_uniform();
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        REQUIRE(d.quantile(p) == Catch::Approx(p).margin(1e-15));
        REQUIRE(d.cdf(p) == Catch::Approx(p).margin(1e-15));
    }
    REQUIRE(d.class_tag() == ClassTag::MonotoneNonIncreasing);
    REQUIRE(d.is_symmetric());
    check_distribution_invariants(d);
}

TEST_CASE("beta(2,2) matches the closed-form cdf") {
    const auto d = make_beta(2, 2);
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        REQUIRE(d.cdf(x) == Catch::Approx(3 * x * x - 2 * x * x * x).margin(1e-10));
    }
    REQUIRE(d.cdf(0.5) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(d.class_tag() == ClassTag::SinglePeaked);
    REQUIRE(d.is_symmetric());
    check_distribution_invariants(d);
}

TEST_CASE("piecewise linear density 2(1-x)") {
    const auto d = make_piecewise_linear({{0.0, 2.0}, {1.0, 0.0}});
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        REQUIRE(d.density(x) == Catch::Approx(2 * (1 - x)).margin(1e-12));
        REQUIRE(d.cdf(x) == Catch::Approx(2 * x - x * x).margin(1e-12));
    }
    REQUIRE(d.quantile(0.5) == Catch::Approx(1.0 - 1.0 / std::sqrt(2.0)).margin(1e-10));
    REQUIRE(d.class_tag() == ClassTag::MonotoneNonIncreasing);
    check_distribution_invariants(d);
}

TEST_CASE("beta class tags and symmetry follow the parameter rule") {
    REQUIRE(make_beta(3, 1).class_tag() == ClassTag::MonotoneNonDecreasing);
    REQUIRE(make_beta(1, 3).class_tag() == ClassTag::MonotoneNonIncreasing);
    REQUIRE(make_beta(0.5, 0.5).class_tag() == ClassTag::SingleDipped);
    REQUIRE(make_beta(1, 1).class_tag() == ClassTag::MonotoneNonIncreasing);
    REQUIRE(make_beta(4, 6).class_tag() == ClassTag::SinglePeaked);
    REQUIRE(make_beta(3, 3).is_symmetric());
    REQUIRE_FALSE(make_beta(3, 4).is_symmetric());

    for (auto [a, b] : std::vector<std::pair<double, double>>{{2, 2}, {6, 2}, {3, 1}, {0.5, 0.5}}) {
        const auto d = make_beta(a, b);
        check_class_tag_soundness(d);
        check_distribution_invariants(d);
    }
}

TEST_CASE("builder rejects invalid specs") {
    REQUIRE_THROWS_AS(make_beta(0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_beta(2.0, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_piecewise_linear({{0.0, -1.0}, {1.0, 1.0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_piecewise_linear({{0.0, 1.0}, {0.5, 2.0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(make_piecewise_linear({{0.0, 0.0}, {0.5, 0.0}, {1.0, 4.0}}),
                      std::invalid_argument);
    // a density with mass far from 1 is not normalizable by the numeric builder
    REQUIRE_THROWS_AS(make_from_density([](double) { return 2.0; }), std::invalid_argument);
}

TEST_CASE("mixture of uniform prefixes with density 3 theta^2") {
    const auto d = mix_family(uniform_prefix_family(), [](double t) { return 3 * t * t; });
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        REQUIRE(d.density(x) == Catch::Approx(1.5 * (1 - x * x)).margin(1e-9));
    }
    REQUIRE(d.class_tag() == ClassTag::MonotoneNonIncreasing);
    REQUIRE(simpson_mass(d) == Catch::Approx(1.0).margin(1e-6));
    check_distribution_invariants(d);
}

TEST_CASE("mixture of uniform prefixes with density 2 theta") {
    // integral oracle: f(x) = int_x^1 (1/t) * 2t dt = 2(1-x)
    const auto d = mix_family(uniform_prefix_family(), [](double t) { return 2 * t; });
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        REQUIRE(d.density(x) == Catch::Approx(2 * (1 - x)).margin(1e-9));
    }
}

TEST_CASE("mixture of identical components reproduces the component") {
    MixtureFamily fam;
    fam.component_density = [](double, double x) { return 6 * x * (1 - x); };
    const auto d = mix_family(fam, [](double) { return 1.0; });
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        REQUIRE(d.density(x) == Catch::Approx(6 * x * (1 - x)).margin(1e-9));
    }
}

TEST_CASE("mixture rejects an unnormalized parameter density") {
    REQUIRE_THROWS_AS(mix_family(uniform_prefix_family(), [](double t) { return 4 * t; }),
                      std::invalid_argument);
}

TEST_CASE("distribution spec construction") {
    DistributionSpec beta_spec;
    beta_spec.kind = DistKind::Beta;
    beta_spec.alpha = 2;
    beta_spec.beta = 2;
    REQUIRE(build(beta_spec).cdf(0.5) == Catch::Approx(0.5).margin(1e-10));

    DistributionSpec mix_spec;
    mix_spec.kind = DistKind::ParamMixture;
    mix_spec.param_density_poly = {0, 0, 3};
    REQUIRE(build(mix_spec).density(0.0) == Catch::Approx(1.5).margin(1e-9));

    DistributionSpec bad;
    bad.kind = DistKind::ParamMixture;
    bad.family = "unknown";
    bad.param_density_poly = {1};
    REQUIRE_THROWS_AS(build(bad), std::invalid_argument);
}

TEST_CASE("sampling is deterministic and sorted") {
    const auto d = make_uniform();
    const auto a = sample(d, 3, 12345);
    const auto b = sample(d, 3, 12345);
    REQUIRE(a.positions == b.positions);
    REQUIRE(std::is_sorted(a.positions.begin(), a.positions.end()));
    const auto c = sample(d, 3, 54321);
    REQUIRE(a.positions != c.positions);
    REQUIRE_THROWS_AS(sample(d, 0, 1), std::invalid_argument);
}

TEST_CASE("sampling law: KS distance at n = 1e5") {
    // critical value at alpha = 0.01: sqrt(-ln(0.005)/2)/sqrt(n) ~ 0.00515
    for (const auto& d : {make_beta(6, 2), make_uniform()}) {
        const auto inst = sample(d, 100000, 2024);
        double ks = 0.0;
        for (int i = 0; i < inst.n(); ++i) {
            const double F = d.cdf(inst.positions[static_cast<std::size_t>(i)]);
            ks = std::max(ks, std::abs(F - (i + 1.0) / inst.n()));
            ks = std::max(ks, std::abs(F - static_cast<double>(i) / inst.n()));
        }
        REQUIRE(ks <= 0.01);
    }
}

TEST_CASE("beta(2,2) sample mean is near 1/2") {
    const auto inst = sample(make_beta(2, 2), 100000, 7);
    double mean = 0.0;
    for (double x : inst.positions) mean += x;
    mean /= inst.n();
    REQUIRE(mean == Catch::Approx(0.5).margin(0.005));
}

TEST_CASE("capacity counts") {
    REQUIRE(capacity_count(0.4, 5) == 2);
    REQUIRE(capacity_count(0.2, 5) == 1);
    REQUIRE(capacity_count(0.3, 10) == 3);
    REQUIRE(capacity_count(1.0, 7) == 7);
}
