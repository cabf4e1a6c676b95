#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "istn/quadrature.hpp"

using namespace istn;

TEST(Quadrature, PolynomialsAreExact)
{
    // 15-point Kronrod integrates degree 22 exactly on one interval.
    double const v = quad::integrate([](double x) { return std::pow(x, 10); }, 0, 2);
    EXPECT_NEAR(v, std::pow(2.0, 11) / 11, 1e-11);
}

TEST(Quadrature, GaussianNormalization)
{
    double const v = quad::integrate([](double x) { return std::exp(-0.5 * x * x); }, -12, 12,
                                     {1e-13, 1e-16, 4000});
    EXPECT_NEAR(v, std::sqrt(2 * std::numbers::pi), 1e-12);
}

TEST(Quadrature, KinkResolvedWithBreakpoint)
{
    std::vector<double> const knots{0.3};
    double const v = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0, 1,
                                     {1e-12, 1e-15, 100}, knots);
    EXPECT_NEAR(v, 0.5 * (0.09 + 0.49), 1e-14);
}

TEST(Quadrature, EmptyIntervalIsZero)
{
    EXPECT_EQ(quad::integrate([](double) { return 1.0; }, 1, 1), 0.0);
    EXPECT_EQ(quad::integrate([](double) { return 1.0; }, 2, 1), 0.0);
}

TEST(Quadrature, VectorIntegrandSharesIntervals)
{
    std::vector<double> const knots{0.0, 1.0};
    auto const v = quad::integrate_vector(
        [](double x, std::span<double> out) {
            out[0] = std::sin(x);
            out[1] = std::exp(x);
        },
        2, knots, {1e-12, 1e-15, 1000});
    EXPECT_NEAR(v[0], 1 - std::cos(1.0), 1e-13);
    EXPECT_NEAR(v[1], std::exp(1.0) - 1, 1e-13);
}

TEST(Quadrature, MakeKnotsDropsOutsidePoints)
{
    std::vector<double> const bp{5.0, -1.0, 0.5, 0.5, 0.25};
    auto const k = quad::make_knots(0, 1, bp);
    EXPECT_EQ(k, (std::vector<double>{0, 0.25, 0.5, 1}));
}

TEST(Quadrature, SingularEndpointConverges)
{
    // int_0^1 x^-1/2 = 2
    double const v = quad::integrate([](double x) { return 1 / std::sqrt(x); }, 0, 1,
                                     {1e-10, 1e-14, 4000});
    EXPECT_NEAR(v, 2.0, 1e-8);
}
