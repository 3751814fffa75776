#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "finaug/hash.hpp"
#include "finaug/rng.hpp"
#include "oracles.hpp"

using namespace finaug;

TEST_CASE("identical seed and keys reproduce every draw") {
    const noise_source a(42), b(42);
    substream sa = a.stream(3, 7);
    substream sb = b.stream(3, 7);
    for (int i = 0; i < 64; ++i) CHECK(sa.next_u64() == sb.next_u64());

    substream na = a.stream("phase", 5);
    substream nb = b.stream("phase", 5);
    for (int i = 0; i < 64; ++i) CHECK(na.next() == nb.next());
}

TEST_CASE("streams with different keys do not collide") {
    const noise_source src(1);
    substream s0 = src.stream(0, 0);
    substream s1 = src.stream(1, 0);
    substream s2 = src.stream(0, 1);
    const std::uint64_t a = s0.next_u64();
    CHECK(a != s1.next_u64());
    CHECK(a != s2.next_u64());

    substream m = src.stream("alpha", 0);
    substream n = src.stream("beta", 0);
    CHECK(m.next_u64() != n.next_u64());
}

TEST_CASE("stream draws are independent of consumption order") {
    const noise_source src(9);
    // Consume one stream heavily, then check another is unaffected.
    substream burn = src.stream(0);
    for (int i = 0; i < 1000; ++i) burn.next_u64();
    substream fresh_after = src.stream(1);
    const noise_source clean(9);
    substream fresh_clean = clean.stream(1);
    for (int i = 0; i < 16; ++i)
        CHECK(fresh_after.next_u64() == fresh_clean.next_u64());
}

TEST_CASE("copying a substream forks its state") {
    const noise_source src(5);
    substream a = src.stream(2);
    substream b = a;  // fork
    const double x = a.next();
    const double y = b.next();
    CHECK(x == y);
}

TEST_CASE("unit draws live in (0, 1]") {
    const noise_source src(11);
    substream s = src.stream(0);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.next_unit();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("normal draws have standard moments") {
    const noise_source src(17);
    substream s = src.stream("moments");
    const std::size_t n = 200000;
    std::vector<double> draws = s.draw(n);
    const double m = oracles::mean(draws);
    const double sd = oracles::population_sd(draws);
    // SE of the mean is 1/sqrt(n) ~ 2.2e-3; allow 4 SE.
    CHECK(std::abs(m) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sd == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("every normal draw consumes exactly two words") {
    const noise_source src(23);
    substream a = src.stream(4);
    substream b = src.stream(4);
    a.next_standard_normal();           // two words
    b.next_u64();
    b.next_u64();
    CHECK(a.next_u64() == b.next_u64());  // streams aligned again
}

TEST_CASE("standardized distributions share mean zero variance one") {
    for (const noise_dist dist :
         {noise_dist::normal, noise_dist::uniform, noise_dist::rademacher}) {
        const noise_source src(31, dist);
        substream s = src.stream(0);
        std::vector<double> draws = s.draw(100000);
        CHECK(std::abs(oracles::mean(draws)) < 0.02);
        CHECK(oracles::population_sd(draws) == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("uniform draws stay inside their bounded support") {
    const noise_source src(37, noise_dist::uniform);
    substream s = src.stream(0);
    const double bound = std::sqrt(3.0) + 1e-12;
    for (int i = 0; i < 10000; ++i) CHECK(std::abs(s.next()) <= bound);
}

TEST_CASE("rademacher draws are exactly plus or minus one") {
    const noise_source src(41, noise_dist::rademacher);
    substream s = src.stream(0);
    int plus = 0;
    for (int i = 0; i < 10000; ++i) {
        const double v = s.next();
        CHECK((v == 1.0 || v == -1.0));
        if (v == 1.0) ++plus;
    }
    CHECK(plus > 4700);
    CHECK(plus < 5300);
}

TEST_CASE("named streams reduce to hashed integer keys") {
    const noise_source src(13);
    substream named = src.stream("batch", 7);
    substream keyed = src.stream(fnv1a64("batch"), 7, 0x5eedf00d);
    for (int i = 0; i < 8; ++i) CHECK(named.next_u64() == keyed.next_u64());
}

TEST_CASE("text hash matches the published reference values") {
    // FNV-1a 64-bit test vectors.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
