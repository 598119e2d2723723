#include "doctest.h"

#include <cmath>
#include <set>

#include "tracerlab/band.hpp"
#include "tracerlab/rng.hpp"
#include "tracerlab/sum.hpp"
#include "tracerlab/vec.hpp"

using namespace trl;

TEST_CASE("vec algebra") {
    Vec2 a{3.0, -4.0}, b{1.0, 2.0};
    CHECK(a.dot(b) == doctest::Approx(-5.0));
    CHECK(a.norm() == doctest::Approx(5.0));
    CHECK(a.norm2() == doctest::Approx(25.0));
    Vec2 s = a + b * 2.0 - 0.5 * a;
    CHECK(s.x == doctest::Approx(3.5));
    CHECK(s.y == doctest::Approx(-0.0).epsilon(1e-15));

    // rot90 is a quarter turn: orthogonal, norm-preserving, J^2 = -1.
    Vec2 ja = rot90(a);
    CHECK(ja.dot(a) == 0.0);
    CHECK(ja.norm2() == a.norm2());
    Vec2 jja = rot90(ja);
    CHECK(jja.x == -a.x);
    CHECK(jja.y == -a.y);
}

TEST_CASE("sym2 apply and frobenius") {
    Sym2 h{2.0, -1.0, 3.0};
    Vec2 v{1.0, 2.0};
    Vec2 hv = h.apply(v);
    CHECK(hv.x == doctest::Approx(0.0));
    CHECK(hv.y == doctest::Approx(5.0));
    CHECK(h.frob2() == doctest::Approx(4.0 + 2.0 + 9.0));
    CHECK(h.trace() == doctest::Approx(5.0));
}

TEST_CASE("ksum compensates magnitude mismatch") {
    Ksum k;
    k.add(1e16);
    for (int i = 0; i < 10000; ++i) k.add(1.0);
    k.add(-1e16);
    CHECK(k.value() == doctest::Approx(10000.0));

    // Naive summation loses all of the small terms here.
    double naive = 1e16;
    for (int i = 0; i < 10000; ++i) naive += 1.0;
    naive -= 1e16;
    CHECK(naive != doctest::Approx(10000.0).epsilon(1e-4));
}

TEST_CASE("running stats match closed forms") {
    RunningStats s;
    for (int i = 1; i <= 5; ++i) s.add(static_cast<double>(i));
    CHECK(s.count() == 5);
    CHECK(s.mean() == doctest::Approx(3.0));
    CHECK(s.variance() == doctest::Approx(2.5)); // unbiased
    CHECK(s.stderr_mean() == doctest::Approx(std::sqrt(2.5 / 5.0)));
}

TEST_CASE("spectral band validation and derived quantities") {
    SpectralBand b = SpectralBand::from_L(8.0);
    CHECK(b.k_min == doctest::Approx(0.125));
    CHECK(b.k_max == doctest::Approx(1.0));
    CHECK(b.L() == doctest::Approx(8.0));
    CHECK(b.log_width() == doctest::Approx(std::log(8.0)));

    SpectralBand inc = SpectralBand::increment(2.0, 4.0); // [1/8, 1/2]
    CHECK(inc.k_min == doctest::Approx(0.125));
    CHECK(inc.k_max == doctest::Approx(0.5));

    CHECK_THROWS_AS(SpectralBand(0.5, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(SpectralBand(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SpectralBand(0.5, 1.5), std::invalid_argument);
}

namespace {

// Independent Philox4x32-10 straight from the definition, as the oracle for
// the library block function.
std::array<std::uint32_t, 4> philox_reference(std::array<std::uint32_t, 4> x,
                                              std::array<std::uint32_t, 2> k) {
    auto mulhilo = [](std::uint32_t a, std::uint32_t b, std::uint32_t& hi) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        return static_cast<std::uint32_t>(p);
    };
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, hi1;
        std::uint32_t lo0 = mulhilo(0xD2511F53u, x[0], hi0);
        std::uint32_t lo1 = mulhilo(0xCD9E8D57u, x[2], hi1);
        x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
    }
    return x;
}

} // namespace

TEST_CASE("philox block matches an independent implementation") {
    Rng probe(0x0123456789ABCDEFull, 42);
    (void)probe;
    std::array<std::uint32_t, 4> ctrs[] = {
        {0u, 0u, 0u, 0u},
        {1u, 0u, 0u, 0u},
        {0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu},
        {0xDEADBEEFu, 0x12345678u, 0x9ABCDEF0u, 0x0F1E2D3Cu},
    };
    std::array<std::uint32_t, 2> keys[] = {
        {0u, 0u}, {1u, 2u}, {0xCAFEBABEu, 0xF00DF00Du}};
    for (const auto& c : ctrs)
        for (const auto& k : keys) {
            auto got = philox4x32(c, k);
            auto want = philox_reference(c, k);
            CHECK(got == want);
        }
}

TEST_CASE("rng streams are deterministic and disjoint") {
    Rng a(7, stream_path(StreamTag::path_noise, 3, 11));
    Rng b(7, stream_path(StreamTag::path_noise, 3, 11));
    for (int i = 0; i < 16; ++i) CHECK(a.raw64() == b.raw64());

    // Distinct ids give distinct leading blocks across a small grid of
    // tags, fields, and indices.
    std::set<std::uint64_t> first;
    int n = 0;
    for (std::uint32_t f = 0; f < 4; ++f)
        for (std::uint64_t p = 0; p < 4; ++p)
            for (auto tag : {StreamTag::path_noise, StreamTag::init_pos, StreamTag::mc_sample}) {
                Rng r(7, stream_path(tag, f, p));
                first.insert(r.raw64());
                ++n;
            }
    for (std::uint32_t f = 0; f < 4; ++f)
        for (std::uint32_t oct = 0; oct < 3; ++oct)
            for (std::uint32_t cell = 0; cell < 3; ++cell) {
                Rng r(7, stream_field_cell(f, oct, cell));
                first.insert(r.raw64());
                ++n;
            }
    for (std::uint32_t re = 0; re < 3; ++re)
        for (std::uint32_t lv = 0; lv < 3; ++lv) {
            Rng r(7, stream_increment_cell(re, lv, 5));
            first.insert(r.raw64());
            ++n;
        }
    CHECK(static_cast<int>(first.size()) == n);

    // Different seeds decouple the same stream.
    Rng s1(1, stream_index(StreamTag::scratch, 9));
    Rng s2(2, stream_index(StreamTag::scratch, 9));
    CHECK(s1.raw64() != s2.raw64());
}

TEST_CASE("rng moments are sane") {
    Rng r(123, stream_index(StreamTag::mc_sample, 0));
    RunningStats u, g, ray2;
    for (int i = 0; i < 40000; ++i) u.add(r.u01());
    for (int i = 0; i < 40000; ++i) g.add(r.gaussian());
    for (int i = 0; i < 40000; ++i) {
        double x = r.rayleigh();
        ray2.add(x * x);
    }
    // 3 sigma on each estimator.
    CHECK(std::abs(u.mean() - 0.5) < 3.0 * u.stderr_mean());
    CHECK(std::abs(g.mean() - 0.0) < 3.0 * g.stderr_mean());
    CHECK(g.variance() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(ray2.mean() - 2.0) < 3.0 * ray2.stderr_mean());

    // u01_pos never returns zero (log-safe).
    Rng rp(5, stream_index(StreamTag::mc_sample, 1));
    for (int i = 0; i < 1000; ++i) CHECK(rp.u01_pos() > 0.0);
}
