#include <doctest.h>

#include <cmath>

#include "fascai/rng.hpp"

using namespace fascai;

TEST_CASE("same seed gives the same stream")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams differ by tag and index")
{
    Rng a = Rng::stream(1, StreamTag::Task, 0);
    Rng b = Rng::stream(1, StreamTag::Human, 0);
    Rng c = Rng::stream(1, StreamTag::Task, 1);
    const auto x = a.next_u64();
    CHECK(x != b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(Rng::stream(1, StreamTag::Task, 0).next_u64() == x);
}

TEST_CASE("uniform, index and normal moments")
{
    Rng rng(7);
    const int n = 200000;
    double sum = 0, sum_sq = 0, nsum = 0, nsq = 0;
    std::size_t counts[3] = {};
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
        ++counts[rng.index(3)];
        const double z = rng.normal();
        nsum += z;
        nsq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum_sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    for (auto c : counts)
        CHECK(static_cast<double>(c) / n == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    CHECK(std::abs(nsum / n) < 0.01);
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("index rejects zero")
{
    Rng rng(1);
    CHECK_THROWS(rng.index(0));
}
