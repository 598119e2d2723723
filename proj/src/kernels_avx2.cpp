#include "tracerlab/kernels.hpp"

#ifdef TRACERLAB_HAVE_AVX2

#include <cassert>
#include <immintrin.h>

namespace trl::kernels {

namespace {

// 4-wide sincos. Argument reduction: n = round(x * 2/pi), r = x - n*pi/2 via
// a two-stage Cody-Waite split evaluated with FMA (single rounding per
// stage), accurate to ~2 ulp for |x| up to ~1e9; callers keep |arg| far
// below that (positions are aborted beyond 1e8 and |k| <= 1). Polynomials
// are the classic Cephes minimax fits on |r| <= pi/4.

const __m256d kTwoOverPi = _mm256_set1_pd(0x1.45f306dc9c883p-1);
const __m256d kPio2Hi = _mm256_set1_pd(1.57079632673412561417e+00);
const __m256d kPio2Lo = _mm256_set1_pd(6.07710050650619224932e-11);
const __m256d kPio2Lo2 = _mm256_set1_pd(2.02226624879595063154e-21);

const __m256d kS1 = _mm256_set1_pd(-1.66666666666666307295e-1);
const __m256d kS2 = _mm256_set1_pd(8.33333333332211858878e-3);
const __m256d kS3 = _mm256_set1_pd(-1.98412698295895385996e-4);
const __m256d kS4 = _mm256_set1_pd(2.75573136213857245213e-6);
const __m256d kS5 = _mm256_set1_pd(-2.50507477628578072866e-8);
const __m256d kS6 = _mm256_set1_pd(1.58962301576546568060e-10);

const __m256d kC1 = _mm256_set1_pd(4.16666666666665929218e-2);
const __m256d kC2 = _mm256_set1_pd(-1.38888888888730564116e-3);
const __m256d kC3 = _mm256_set1_pd(2.48015872888517179954e-5);
const __m256d kC4 = _mm256_set1_pd(-2.75573141792967388112e-7);
const __m256d kC5 = _mm256_set1_pd(2.08757008419747316778e-9);
const __m256d kC6 = _mm256_set1_pd(-1.13585365213876817300e-11);

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
    __m256d dn = _mm256_round_pd(_mm256_mul_pd(x, kTwoOverPi),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(dn, kPio2Hi, x);
    r = _mm256_fnmadd_pd(dn, kPio2Lo, r);
    r = _mm256_fnmadd_pd(dn, kPio2Lo2, r);

    __m256d r2 = _mm256_mul_pd(r, r);

    // sin(r) = r + r^3 * P(r^2)
    __m256d ps = kS6;
    ps = _mm256_fmadd_pd(ps, r2, kS5);
    ps = _mm256_fmadd_pd(ps, r2, kS4);
    ps = _mm256_fmadd_pd(ps, r2, kS3);
    ps = _mm256_fmadd_pd(ps, r2, kS2);
    ps = _mm256_fmadd_pd(ps, r2, kS1);
    __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(ps, r2), r, r);

    // cos(r) = 1 - r^2/2 + r^4 * Q(r^2)
    __m256d pc = kC6;
    pc = _mm256_fmadd_pd(pc, r2, kC5);
    pc = _mm256_fmadd_pd(pc, r2, kC4);
    pc = _mm256_fmadd_pd(pc, r2, kC3);
    pc = _mm256_fmadd_pd(pc, r2, kC2);
    pc = _mm256_fmadd_pd(pc, r2, kC1);
    __m256d cr = _mm256_mul_pd(_mm256_mul_pd(pc, r2), r2);
    cr = _mm256_add_pd(_mm256_fnmadd_pd(r2, _mm256_set1_pd(0.5), _mm256_set1_pd(1.0)), cr);

    // Quadrant fixup from q = n mod 4:
    //   sin(x) = (q&1 ? cr : sr) with sign flip when q&2
    //   cos(x) = (q&1 ? sr : cr) with sign flip when (q+1)&2
    __m128i n32 = _mm256_cvtpd_epi32(dn);
    __m256i q = _mm256_cvtepi32_epi64(n32);
    __m256i one = _mm256_set1_epi64x(1);
    __m256i two = _mm256_set1_epi64x(2);
    __m256i qa1 = _mm256_and_si256(q, one);
    __m256i qa2 = _mm256_and_si256(q, two);
    __m256i qp2 = _mm256_and_si256(_mm256_add_epi64(q, one), two);
    __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(qa1, one));
    __m256d sign_s = _mm256_castsi256_pd(_mm256_slli_epi64(qa2, 62)); // bit 63 if q&2
    __m256d sign_c = _mm256_castsi256_pd(_mm256_slli_epi64(qp2, 62));

    __m256d s = _mm256_blendv_pd(sr, cr, swap);
    __m256d c = _mm256_blendv_pd(cr, sr, swap);
    s_out = _mm256_xor_pd(s, sign_s);
    c_out = _mm256_xor_pd(c, sign_c);
}

inline double hsum_fixed_order(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return ((lane[0] + lane[1]) + lane[2]) + lane[3];
}

void drift_avx2(std::size_t n, const double* kx, const double* ky, const double* theta,
                const double* akx, const double* aky, double x, double y, double* bx,
                double* by) {
    assert(n % 4 == 0);
    __m256d vx = _mm256_set1_pd(x);
    __m256d vy = _mm256_set1_pd(y);
    __m256d ax = _mm256_setzero_pd();
    __m256d ay = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n; j += 4) {
        __m256d arg = _mm256_fmadd_pd(_mm256_loadu_pd(kx + j), vx,
                                      _mm256_fmadd_pd(_mm256_loadu_pd(ky + j), vy,
                                                      _mm256_loadu_pd(theta + j)));
        __m256d s, c;
        sincos4(arg, s, c);
        ax = _mm256_fmadd_pd(_mm256_loadu_pd(aky + j), s, ax);
        ay = _mm256_fnmadd_pd(_mm256_loadu_pd(akx + j), s, ay);
    }
    *bx = hsum_fixed_order(ax);
    *by = hsum_fixed_order(ay);
}

void weighted_avx2(std::size_t n, const double* kx, const double* ky, const double* theta,
                   double x, double y, const double* const* sin_cols, std::size_t n_sin,
                   const double* const* cos_cols, std::size_t n_cos, double* sin_out,
                   double* cos_out) {
    assert(n % 4 == 0);
    assert(n_sin + n_cos <= kMaxColumns);
    __m256d vx = _mm256_set1_pd(x);
    __m256d vy = _mm256_set1_pd(y);
    __m256d acc[kMaxColumns];
    for (std::size_t m = 0; m < n_sin + n_cos; ++m) acc[m] = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n; j += 4) {
        __m256d arg = _mm256_fmadd_pd(_mm256_loadu_pd(kx + j), vx,
                                      _mm256_fmadd_pd(_mm256_loadu_pd(ky + j), vy,
                                                      _mm256_loadu_pd(theta + j)));
        __m256d s, c;
        sincos4(arg, s, c);
        for (std::size_t m = 0; m < n_sin; ++m)
            acc[m] = _mm256_fmadd_pd(_mm256_loadu_pd(sin_cols[m] + j), s, acc[m]);
        for (std::size_t m = 0; m < n_cos; ++m)
            acc[n_sin + m] = _mm256_fmadd_pd(_mm256_loadu_pd(cos_cols[m] + j), c, acc[n_sin + m]);
    }
    for (std::size_t m = 0; m < n_sin; ++m) sin_out[m] = hsum_fixed_order(acc[m]);
    for (std::size_t m = 0; m < n_cos; ++m) cos_out[m] = hsum_fixed_order(acc[n_sin + m]);
}

} // namespace

const Backend* avx2_backend() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    static const Backend b{"avx2", drift_avx2, weighted_avx2};
    return &b;
}

} // namespace trl::kernels

#endif // TRACERLAB_HAVE_AVX2
