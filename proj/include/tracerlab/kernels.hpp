#pragma once

#include <cstddef>
#include <vector>

namespace trl::kernels {

// Mode-sum kernels. All field/corrector evaluations reduce to
//   S_m = sum_j c_m[j] * sin(kx[j]*x + ky[j]*y + theta[j])
//   C_m = sum_j c_m[j] * cos(kx[j]*x + ky[j]*y + theta[j])
// over shared wavevector/phase arrays with per-consumer coefficient columns.
// Arrays must be padded to a multiple of 4 entries; padded entries carry
// zero coefficients so they contribute nothing to any sum.
//
// Two implementations: a scalar reference (libm sin/cos, sequential
// accumulation) and an AVX2 variant (4-wide vectorized sincos, per-lane
// accumulators combined in fixed lane order). Selection at runtime; the
// variants are equivalence-tested against each other.

constexpr std::size_t kMaxColumns = 32;

struct Backend {
    const char* name;

    // bx = sum aky[j]*sin(arg_j), by = -sum akx[j]*sin(arg_j).
    // (akx, aky) = amplitude * wavevector; this is the SDE hot path.
    void (*drift)(std::size_t n, const double* kx, const double* ky, const double* theta,
                  const double* akx, const double* aky, double x, double y, double* bx,
                  double* by);

    // General weighted trig sums; n_sin + n_cos <= kMaxColumns.
    void (*weighted)(std::size_t n, const double* kx, const double* ky, const double* theta,
                     double x, double y, const double* const* sin_cols, std::size_t n_sin,
                     const double* const* cos_cols, std::size_t n_cos, double* sin_out,
                     double* cos_out);
};

const Backend& scalar_backend();
// nullptr when the CPU (or build) lacks AVX2+FMA.
const Backend* avx2_backend();

// Active backend: best available, unless overridden by set_backend() or the
// TRACERLAB_KERNEL environment variable ("scalar" / "avx2").
const Backend& backend();
void set_backend(const Backend* b); // nullptr restores automatic choice

// Pad a coefficient/wavevector array to a multiple of 4 with `fill`.
inline void pad4(std::vector<double>& v, double fill = 0.0) {
    while (v.size() % 4 != 0) v.push_back(fill);
}

} // namespace trl::kernels
