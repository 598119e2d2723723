#pragma once

#include "tracerlab/band.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// Oracle for all band integrals: integral over {k_min <= |k| <= k_max} of
// f(k) dk/(2*pi), evaluated in (log r, theta) coordinates where the
// power-law spectrum is tame. Angular rule is the periodic midpoint rule
// (spectrally accurate); radial rule is midpoint or Gauss-Legendre.
enum class QuadRule { midpoint, gauss };

struct SpectralQuadrature {
    int radial_nodes = 512;
    int angular_nodes = 256;
    QuadRule rule = QuadRule::midpoint;
};

enum class Integrand {
    variance_psi,              // |k|^-2                    -> ln L (full band)
    variance_b,                // tr(Id - k(x)k/|k|^2) |k|^-2 |k|^2 -> area/(2*pi)
    variance_grad_psi,         // |k|^2 |k|^-2              -> (k_max^2 - k_min^2)/2
    corrector_variance,        // (k.J xi)^2 / (lt^2 |k|^6) -> (L+^2 - L^2)/(4 lt^2)
    corrector_grad_variance,   // (k.J xi)^2 / (lt^2 |k|^4) -> ln M / (2 lt^2)
    corrector_hessian_variance,// (k.J xi)^2 / (lt^2 |k|^2) -> (1/L^2 - 1/L+^2)/(4 lt^2)
    covariance_psi,            // cos(k.x) |k|^-2           -> c_L(x)
};

struct IntegrandParams {
    Vec2 xi{1.0, 0.0};         // unit direction for corrector integrands
    double lambda_tilde = 1.0; // scalar in the corrector equation
    Vec2 x{0.0, 0.0};          // offset for covariance_psi
};

double spectral_integral(const SpectralBand& band, Integrand which, const IntegrandParams& params,
                         const SpectralQuadrature& quad);

inline double spectral_integral(const SpectralBand& band, Integrand which,
                                const SpectralQuadrature& quad = {}) {
    return spectral_integral(band, which, IntegrandParams{}, quad);
}

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, double* nodes, double* weights);

} // namespace trl
