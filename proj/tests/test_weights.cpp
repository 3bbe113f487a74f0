#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardycert/weights.hpp"

using namespace hardycert;
using namespace hardycert::weights;

namespace {

RadialWeightFamily power(double g, double b, double a, int n) { return {PowerType{g, b, a}, n}; }

// Independent oracle: trapezoid CDF on a dense log grid, bisection on the tabulated CDF.
double oracle_median(const std::function<double(double)>& dens, double r_lo, double r_hi, int n = 400000) {
    std::vector<double> r(n), c(n, 0.0);
    for (int i = 0; i < n; ++i) r[i] = r_lo * std::pow(r_hi / r_lo, double(i) / (n - 1));
    for (int i = 1; i < n; ++i) c[i] = c[i - 1] + 0.5 * (dens(r[i]) + dens(r[i - 1])) * (r[i] - r[i - 1]);
    const double target = 0.5 * c.back();
    auto it = std::lower_bound(c.begin(), c.end(), target);
    const int k = int(it - c.begin());
    const double t = (target - c[k - 1]) / (c[k] - c[k - 1]);
    return r[k - 1] + t * (r[k] - r[k - 1]);
}

}  // namespace

TEST(Weights, EvaluateExamples) {
    EXPECT_DOUBLE_EQ(evaluate(power(0, 2, -1, 3), 1.0).value, 0.5);
    EXPECT_DOUBLE_EQ(evaluate({Exponential{1.0}, 1}, 0.0).value, 1.0);
    EXPECT_NEAR(evaluate(power(-1, 1, -1, 3), 2.0).value, 1.0 / 6.0, 1e-15);
}

TEST(Weights, EvaluateSingularAndDomain) {
    auto s = evaluate(power(-1, 1, -1, 3), 0.0);
    EXPECT_TRUE(s.singular_at_zero);
    EXPECT_TRUE(std::isinf(s.value));
    EXPECT_THROW(evaluate(power(0, 2, -1, 3), -1.0), Error);
    try {
        evaluate(power(0, 2, -1, 3), -1.0);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainError);
    }
}

TEST(Weights, PowerTypeNoOverflowAtLargeRadius) {
    auto f = power(3, 4, -2, 3);
    EXPECT_NEAR(h(f, 1e30) / 1e-150, 1.0, 1e-10);
    EXPECT_GT(h_times_power(power(-4.8, 2, -1, 5), 1e-120, 4.0), 0.0);
}

TEST(Weights, MassExamples) {
    auto m1 = mass(power(0, 2, -2, 3));
    ASSERT_TRUE(m1.finite());
    EXPECT_NEAR(m1.value, std::numbers::pi * std::numbers::pi, 1e-8);
    auto m2 = mass(power(0, 2, -1, 3));
    EXPECT_EQ(m2.verdict, Finiteness::ProvenInfinite);
    auto m3 = mass({Exponential{1.0}, 1});
    EXPECT_NEAR(m3.value, 2.0, 1e-14);
}

TEST(Weights, MassOriginDivergence) {
    auto m = mass(power(-3, 2, -4, 3));
    EXPECT_EQ(m.verdict, Finiteness::ProvenInfinite);
}

TEST(Weights, SurfaceArea) {
    EXPECT_NEAR(surface_area(1), 2.0, 1e-15);
    EXPECT_NEAR(surface_area(2), 2 * std::numbers::pi, 1e-14);
    EXPECT_NEAR(surface_area(3), 4 * std::numbers::pi, 1e-14);
}

TEST(Weights, ExponentialMassMatchesQuadrature) {
    RadialWeightFamily f{Exponential{2.5}, 4};
    const double num = surface_area(4) * quad::integrate([&](double r) { return r * r * r * h(f, r); }, 0, kInf).value;
    EXPECT_NEAR(mass(f).value, num, 1e-8 * num);
}

TEST(Weights, MedianExponentialClosedForm) {
    auto m = median({Exponential{1.0}, 1});
    EXPECT_NEAR(m.median, std::log(2.0), 1e-10);
    EXPECT_LE(m.tolerance, 1e-10 * m.mass);
}

TEST(Weights, MedianPowerTypeMatchesOracle) {
    // atan(x) - x/(1+x^2) = pi/4, solved to 30 digits.
    const double frozen = 2.26443741589373440684640760109;
    auto m = median(power(0, 2, -2, 3));
    EXPECT_NEAR(m.median, frozen, 1e-9);
    const double oracle = oracle_median([](double r) { return r * r / ((1 + r * r) * (1 + r * r)); }, 1e-6, 1e7);
    EXPECT_NEAR(oracle, frozen, 1e-4);
}

TEST(Weights, MedianSecondPowerFamily) {
    // r (1+r)^{-3}: CDF solved to 30 digits is 1+sqrt(2)
    auto m = median(power(-1, 1, -3, 3));
    EXPECT_NEAR(m.median, 1.0 + std::sqrt(2.0), 1e-9);
}

TEST(Weights, MedianOfInfiniteMassThrows) {
    try {
        median(power(0, 2, -1, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MassInfinite);
    }
}

TEST(Weights, TabulatedMassAndMedian) {
    // h = 1 on [0,1] in N=1: mass 2, median 0.5
    RadialWeightFamily f{Tabulated{{{0.0, 1.0}, {1.0, 1.0}}}, 1};
    EXPECT_NEAR(mass(f).value, 2.0, 1e-12);
    EXPECT_NEAR(median(f).median, 0.5, 1e-10);
    EXPECT_EQ(h(f, 1.5), 0.0);
}

TEST(Weights, TabulatedValidation) {
    RadialWeightFamily f{Tabulated{{{1.0, 1.0}, {0.5, 1.0}}}, 1};
    EXPECT_THROW(validate(f), Error);
    RadialWeightFamily g{Tabulated{{{0.0, -1.0}, {0.5, 1.0}}}, 1};
    EXPECT_THROW(validate(g), Error);
}

TEST(Weights, MedianPlateauReturnsInfimum) {
    // two unit blocks on [0,1] and [2,3] in N=1: every point of [1,2] is a median
    RadialWeightFamily f{Tabulated{{{0.0, 1.0}, {1.0, 1.0}, {1.0 + 1e-12, 0.0}, {2.0 - 1e-12, 0.0}, {2.0, 1.0}, {3.0, 1.0}}}, 1};
    auto m = median(f);
    EXPECT_NEAR(m.median, 1.0, 1e-8);
}

TEST(Weights, BarenblattLinearizedValues) {
    BarenblattLinearized b{0.875, 1.8, LinearizedVariant::W1, 0.5};
    const double s = 0.875 + (1.8 - 2) / 0.8, k = (1 - s) * 0.8 / (1.8 * 0.875), beta = 1.8 / 0.8;
    EXPECT_NEAR(b.sigma(), 0.625, 1e-15);
    RadialWeightFamily w1{b, 3};
    const double r = 1.7;
    const double base = 1 + k * std::pow(r, beta);
    EXPECT_NEAR(h(w1, r), std::pow(base, (2 - s) / (s - 1)) / 0.875, 1e-14);
    b.variant = LinearizedVariant::W2;
    EXPECT_NEAR(h({b, 3}, r), std::pow(r, -0.25) * std::pow(base, 1 / (s - 1)), 1e-14);
    b.variant = LinearizedVariant::W2Eps;
    EXPECT_NEAR(h({b, 3}, r), std::pow(base, 1 / (s - 1)) * std::pow(0.5 + std::pow(r, 1.25), -0.2), 1e-14);
}

TEST(Weights, LineMedianSymmetric) {
    auto m = line_median(LineWeight::laplace());
    EXPECT_NEAR(m.median, 0.0, 1e-8);
    EXPECT_NEAR(m.mass, 2.0, 1e-10);
    EXPECT_NEAR(line_median(LineWeight::gaussian(2.0).shifted(3.0)).median, 3.0, 1e-8);
}

TEST(Weights, LineMedianAsymmetric) {
    // e^{-s} on s>=0: median ln 2
    auto m = line_median(LineWeight::laplace().restricted(Support::Positive));
    EXPECT_NEAR(m.median, std::log(2.0), 1e-9);
}

TEST(Weights, LineMassPowerTail) {
    EXPECT_EQ(line_mass(LineWeight::power_type(0, 2, -0.5)).verdict, Finiteness::ProvenInfinite);
    EXPECT_NEAR(line_mass(LineWeight::power_type(0, 2, -1)).value, std::numbers::pi, 1e-8);
}

TEST(Weights, LineReflection) {
    auto w = LineWeight::laplace(2.0).shifted(0.7).restricted(Support::Positive);
    auto r = w.reflected();
    for (double s : {-3.0, -0.71, -0.5, 0.0, 0.69, 0.71, 2.0}) EXPECT_DOUBLE_EQ(r(s), w(-s));
}

// Property: median scale covariance for PowerType through the scale parameter and
// for Tabulated by explicit node rescaling.
TEST(WeightsProperty, MedianScaleCovariance) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + int(4 * U(rng));
        const double g = -n + 0.2 + 2 * U(rng), b = 0.5 + 2 * U(rng);
        const double a = -(n + g + 0.2 + 2 * U(rng)) / b;
        const double s = std::exp(4 * U(rng) - 2);
        RadialWeightFamily f = power(g, b, a, n), fs = f;
        fs.scale = s;
        const double e1 = median(f).median, e2 = median(fs).median;
        EXPECT_NEAR(e2, s * e1, 2 * 2e-10 * s * e1 + 1e-12) << t;
    }
    std::vector<std::pair<double, double>> nodes, scaled;
    for (int i = 0; i <= 20; ++i) nodes.emplace_back(0.1 * i, 1.0 + std::sin(double(i)));
    for (auto [r, v] : nodes) scaled.emplace_back(3.0 * r, v);
    const double e1 = median({Tabulated{nodes}, 2}).median, e2 = median({Tabulated{scaled}, 2}).median;
    EXPECT_NEAR(e2, 3.0 * e1, 1e-8);
}

TEST(WeightsProperty, CdfMonotoneAndReachesMass) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const int n = 1 + int(3 * U(rng));
        const double g = -n + 0.3 + U(rng), b = 1 + U(rng), a = -(n + g + 0.5 + U(rng)) / b;
        auto f = power(g, b, a, n);
        std::vector<double> grid;
        for (int i = 0; i < 60; ++i) grid.push_back(std::pow(10.0, -4 + 0.2 * i));
        auto c = quad::cumulative([&](double r) { return surface_area(n) * std::pow(r, n - 1) * h(f, r); }, 0.0, grid);
        for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i], c[i - 1]);
        const double tail = quad::integrate([&](double r) { return surface_area(n) * std::pow(r, n - 1) * h(f, r); },
                                            grid.back(), kInf).value;
        EXPECT_NEAR(c.back() + tail, mass(f).value, 1e-7 * mass(f).value);
    }
}

TEST(WeightsProperty, PowerMedianBracket) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + int(5 * U(rng));
        const double g = -n + 0.1 + 3 * U(rng), b = 0.3 + 3 * U(rng);
        const double a = -(n + g + 0.1 + 3 * U(rng)) / b;
        auto f = power(g, b, a, n);
        auto m = median(f);
        auto br = power_median_bracket(PowerType{g, b, a}, n);
        ASSERT_TRUE(br);
        EXPECT_GE(m.median, br->first);
        EXPECT_LE(m.median, br->second);
    }
}
