#include <doctest.h>

#include "rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace idsynth;

TEST_CASE("same seed reproduces the sequence") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
    CHECK(same == 0);
}

TEST_CASE("below stays in range and covers small supports") {
    Rng r(7);
    std::set<uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const uint64_t v = r.below(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("uniform_int hits both endpoints") {
    Rng r(11);
    bool lo = false, hi = false;
    for (int i = 0; i < 5000; ++i) {
        const int64_t v = r.uniform_int(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        lo |= (v == -3);
        hi |= (v == 3);
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("uniform moments") {
    Rng r(99);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments") {
    Rng r(5);
    const int n = 200000;
    double sum = 0, sum2 = 0, sum3 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        sum += x;
        sum2 += x * x;
        sum3 += x * x * x;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1).scale(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(sum3 / n) < 0.05);
}

TEST_CASE("scaled normal") {
    Rng r(6);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal(10.0, 3.0);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(10.0).epsilon(0.01));
    CHECK(std::sqrt(sum2 / n - mean * mean) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("child streams are independent of each other") {
    Rng root(42);
    Rng a = root.child("metadata");
    Rng b = root.child("render");
    Rng a2 = Rng(42).child("metadata");
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == a2.next_u64());
    Rng a3 = Rng(42).child("metadata");
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (a3.next_u64() == b.next_u64());
    CHECK(same == 0);
}

TEST_CASE("derive_seed separates documents and purposes") {
    std::set<uint64_t> seeds;
    for (uint64_t doc = 0; doc < 100; ++doc) {
        seeds.insert(derive_seed(2024, doc));
        seeds.insert(derive_seed(2024, doc, "fraud"));
    }
    CHECK(seeds.size() == 200);
    CHECK(derive_seed(2024, 3, "fraud") == derive_seed(2024, 3, "fraud"));
}

TEST_CASE("sequences are frozen") {
    // Pinned outputs guard against accidental engine changes; generated once
    // from this implementation and treated as the reference afterwards.
    Rng r(1);
    CHECK(r.next_u64() == 0xcfc5d07f6f03c29bull);
    CHECK(r.next_u64() == 0xbf424132963fe08dull);
    CHECK(r.next_u64() == 0x19a37d5757aaf520ull);
    CHECK(r.next_u64() == 0xbf08119f05cd56d6ull);
    CHECK(Rng(7).child("x").next_u64() == 0xdf8ed9136457fbf3ull);
    CHECK(derive_seed(2024, 5, "doc") == 0x92ed30a91a04aac4ull);
}
