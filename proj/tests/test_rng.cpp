#include <doctest.h>

#include <cmath>

#include "qconv/rng.hpp"

using namespace qconv;

TEST_CASE("identical seeds replay identical streams") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.raw() == b.raw());
    Rng c(123), d(124);
    bool differ = false;
    for (int i = 0; i < 16; ++i) differ = differ || (c.raw() != d.raw());
    CHECK(differ);
}

TEST_CASE("substreams are decorrelated and deterministic") {
    CHECK(Rng::substream(9, 0).raw() != Rng::substream(9, 1).raw());
    CHECK(Rng::substream(9, 0).raw() == Rng::substream(9, 0).raw());
    CHECK(mix_seed(9, 0) != mix_seed(10, 0));
    CHECK(mix_seed(9, 3) == mix_seed(9, 3));
}

TEST_CASE("uniform_int stays in range and consumes nothing for n <= 1") {
    Rng rng(5);
    for (int i = 0; i < 10'000; ++i) {
        auto v = rng.uniform_int(7);
        CHECK(v < 7);
    }
    Rng x(77), y(77);
    CHECK(x.uniform_int(1) == 0);
    CHECK(x.raw() == y.raw()); // no word consumed by the n == 1 call
}

TEST_CASE("normal moments match a Monte-Carlo confidence interval") {
    Rng rng(2024);
    const int n = 1'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("exponential and gamma means") {
    Rng rng(31);
    const int n = 200'000;
    double se = 0.0, sg = 0.0;
    for (int i = 0; i < n; ++i) {
        se += rng.exponential(2.0);
        sg += rng.gamma(2.5);
    }
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(sg / n == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("student t variance matches dof/(dof-2)") {
    Rng rng(8);
    const int n = 400'000;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = rng.student_t(5.0);
        sum_sq += t * t;
    }
    CHECK(sum_sq / n == doctest::Approx(5.0 / 3.0).epsilon(0.05));
}

TEST_CASE("categorical frequencies sit within three standard errors") {
    Rng rng(14);
    const double probs[2] = {0.25, 0.75};
    const int n = 100'000;
    int count0 = 0;
    for (int i = 0; i < n; ++i)
        if (rng.categorical(std::span<const double>(probs, 2)) == 0) ++count0;
    double p_hat = static_cast<double>(count0) / n;
    double se = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::fabs(p_hat - 0.25) <= 3.0 * se);
}
