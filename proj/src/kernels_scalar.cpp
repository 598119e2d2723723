#include "tracerlab/kernels.hpp"

#include <cassert>
#include <cmath>

namespace trl::kernels {

namespace {

void drift_scalar(std::size_t n, const double* kx, const double* ky, const double* theta,
                  const double* akx, const double* aky, double x, double y, double* bx,
                  double* by) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = std::sin(kx[j] * x + ky[j] * y + theta[j]);
        sx += aky[j] * s;
        sy -= akx[j] * s;
    }
    *bx = sx;
    *by = sy;
}

void weighted_scalar(std::size_t n, const double* kx, const double* ky, const double* theta,
                     double x, double y, const double* const* sin_cols, std::size_t n_sin,
                     const double* const* cos_cols, std::size_t n_cos, double* sin_out,
                     double* cos_out) {
    assert(n_sin + n_cos <= kMaxColumns);
    double acc[kMaxColumns] = {};
    for (std::size_t j = 0; j < n; ++j) {
        double arg = kx[j] * x + ky[j] * y + theta[j];
        double s = std::sin(arg);
        double c = std::cos(arg);
        for (std::size_t m = 0; m < n_sin; ++m) acc[m] += sin_cols[m][j] * s;
        for (std::size_t m = 0; m < n_cos; ++m) acc[n_sin + m] += cos_cols[m][j] * c;
    }
    for (std::size_t m = 0; m < n_sin; ++m) sin_out[m] = acc[m];
    for (std::size_t m = 0; m < n_cos; ++m) cos_out[m] = acc[n_sin + m];
}

} // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar", drift_scalar, weighted_scalar};
    return b;
}

} // namespace trl::kernels
