#include "mlsa/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using mlsa::Philox4x32;
using mlsa::RandomStream;

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out, (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                           {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out, (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
    const auto out = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out, (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, DeterministicAndStreamSeparated) {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs_c |= x != c.next_u64();
        differs_d |= x != d.next_u64();
    }
    EXPECT_TRUE(differs_c);
    EXPECT_TRUE(differs_d);
}

TEST(RandomStream, UniformMoments) {
    RandomStream s(1, 1);
    const int N = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < N; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / N;
    EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
    EXPECT_NEAR(sq / N - mean * mean, 1.0 / 12.0, 2e-3);
}

TEST(RandomStream, NormalMoments) {
    RandomStream s(3, 9);
    const int N = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < N; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / N, 0.0, 4.0 / std::sqrt(N));
    EXPECT_NEAR(sq / N, 1.0, 0.02);
}

TEST(SampleFromCdf, PicksFirstExceedingEntry) {
    const std::vector<double> cdf{0.2, 0.5, 1.0};
    EXPECT_EQ(mlsa::sample_from_cdf(cdf, 0.0), 0u);
    EXPECT_EQ(mlsa::sample_from_cdf(cdf, 0.2), 1u);
    EXPECT_EQ(mlsa::sample_from_cdf(cdf, 0.49), 1u);
    EXPECT_EQ(mlsa::sample_from_cdf(cdf, 0.9), 2u);
    const std::vector<double> short_cdf{0.3, 0.9999999999};
    EXPECT_EQ(mlsa::sample_from_cdf(short_cdf, 0.99999999999), 1u);
}
