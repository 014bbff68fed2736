#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bele/stats.hpp"
#include "oracles.hpp"

using namespace bele;
using Vec = std::vector<double>;

namespace
{

Vec random_vec(std::mt19937& rng, std::size_t n, bool ties)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> k(0, 4);
    Vec v(n);
    for (double& x : v)
        x = ties ? k(rng) : u(rng);
    return v;
}

} // namespace

TEST(Rmse, Examples)
{
    EXPECT_EQ(stats::rmse(Vec{1, 2, 3}, Vec{1, 2, 3}), 0.0);
    EXPECT_NEAR(stats::rmse(Vec{0, 0}, Vec{3, 4}), std::sqrt(12.5), 1e-15);
    EXPECT_NEAR(stats::rmse(Vec{0, 0}, Vec{3, 4}), 3.53553, 1e-5);
    EXPECT_THROW(stats::rmse(Vec{1}, Vec{1, 2}), DimensionError);
}

TEST(Srocc, Examples)
{
    EXPECT_DOUBLE_EQ(stats::srocc(Vec{1, 2, 3}, Vec{1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(stats::srocc(Vec{1, 2, 3}, Vec{3, 2, 1}), -1.0);
    const Vec a{1, 1, 2, 3}, b{2, 1, 1, 3};
    EXPECT_NEAR(stats::srocc(a, b), oracle::pearson(oracle::ranks(a), oracle::ranks(b)), 1e-12);
    EXPECT_THROW(stats::srocc(Vec{1, 1, 1}, Vec{1, 2, 3}), DegenerateInputError);
}

TEST(Plcc, Examples)
{
    const Vec a{0.3, 1.7, 2.2, 5.0};
    Vec b(a.size()), c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        b[i] = 2.0 * a[i] + 1.0;
        c[i] = -a[i];
    }
    EXPECT_NEAR(stats::plcc(a, b), 1.0, 1e-15);
    EXPECT_NEAR(stats::plcc(a, c), -1.0, 1e-15);
    EXPECT_THROW(stats::plcc(Vec{1, 2}, Vec{1, 2}), DegenerateInputError);
    EXPECT_THROW(stats::plcc(Vec{2, 2, 2}, Vec{1, 2, 3}), DegenerateInputError);
}

TEST(MidRanks, MatchBruteForce)
{
    std::mt19937 rng(3);
    for (int t = 0; t < 50; ++t)
    {
        const Vec v = random_vec(rng, 3 + t % 18, t % 2 == 0);
        const Vec r = stats::mid_ranks(v);
        const Vec o = oracle::ranks(v);
        for (std::size_t i = 0; i < v.size(); ++i)
            EXPECT_EQ(r[i], o[i]);
    }
}

TEST(Metrics, MatchOraclesOnRandomVectors)
{
    std::mt19937 rng(11);
    for (int t = 0; t < 100; ++t)
    {
        const std::size_t n = 3 + static_cast<std::size_t>(t % 18);
        const bool ties = t % 3 == 0;
        const Vec a = random_vec(rng, n, ties), b = random_vec(rng, n, ties);
        if (oracle::ranks(a) == Vec(n, (n + 1) / 2.0) || oracle::ranks(b) == Vec(n, (n + 1) / 2.0))
            continue;
        EXPECT_NEAR(stats::rmse(a, b), oracle::rmse(a, b), 1e-12);
        EXPECT_NEAR(stats::plcc(a, b), oracle::pearson(a, b), 1e-12);
        EXPECT_NEAR(stats::srocc(a, b), oracle::pearson(oracle::ranks(a), oracle::ranks(b)), 1e-12);
    }
}

TEST(Metrics, Invariances)
{
    std::mt19937 rng(5);
    for (int t = 0; t < 30; ++t)
    {
        const Vec a = random_vec(rng, 20, false), b = random_vec(rng, 20, false);
        Vec ea(a.size()), cb(b.size()), aff(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            ea[i] = std::exp(a[i]);
            cb[i] = b[i] * b[i] * b[i];
            aff[i] = 3.5 * a[i] - 2.0;
        }
        const double s = stats::srocc(a, b);
        EXPECT_NEAR(stats::srocc(ea, cb), s, 1e-12);
        EXPECT_NEAR(stats::srocc(b, a), s, 1e-12);
        EXPECT_NEAR(stats::plcc(aff, b), stats::plcc(a, b), 1e-12);
        EXPECT_NEAR(stats::plcc(b, a), stats::plcc(a, b), 1e-12);
        EXPECT_LE(std::abs(s), 1.0);
    }
}

TEST(Descriptive, MeanMedianStddev)
{
    EXPECT_DOUBLE_EQ(stats::mean(Vec{1, 2, 6}), 3.0);
    EXPECT_DOUBLE_EQ(stats::median(Vec{5, 1, 3}), 3.0);
    EXPECT_DOUBLE_EQ(stats::median(Vec{4, 1, 3, 2}), 2.5);
    EXPECT_DOUBLE_EQ(stats::stddev(Vec{1, 3}), std::sqrt(2.0));
    EXPECT_THROW(stats::mean(Vec{}), DegenerateInputError);
}

TEST(Report, BundlesMetrics)
{
    const Vec p{1, 2, 3, 5}, t{1.5, 2, 2.5, 6};
    const stats::MetricReport r = stats::report(p, t);
    EXPECT_EQ(r.n, 4u);
    EXPECT_DOUBLE_EQ(r.rmse, stats::rmse(p, t));
    EXPECT_DOUBLE_EQ(r.srocc, 1.0);
    EXPECT_DOUBLE_EQ(r.plcc, stats::plcc(p, t));
}
