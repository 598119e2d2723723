#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tracerlab/band.hpp"
#include "tracerlab/field.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// Band-limited field periodized onto a square torus: every wavevector sits
// on the box's dual lattice (2 pi / box) * (m1, m2), so psi and b = J grad
// psi are exactly periodic, and spectral derivatives of the node values are
// exact. b is divergence-free under the same spectral divergence: bhat_x =
// -i q2 psihat, bhat_y = i q1 psihat cancel identically.
struct PeriodicFieldSlice {
    double L = 1.0;    // IR scale, k_min = 1/L
    double box = 0.0;  // side length, a multiple of 2 pi L
    int grid_n = 0;    // N (grid is N x N, row-major, x fastest)
    SpectralBand band; // [1/L, 1]
    FieldRealization field; // the exact mode set (dual-lattice wavevectors)
    std::vector<double> psi, bx, by; // node values
    double expected_mass = 0.0; // sum of lattice cell masses (-> ln L as box grows)

    double spacing() const { return box / grid_n; }
    std::size_t cells() const { return static_cast<std::size_t>(grid_n) * grid_n; }

    // Every lattice point of the annulus [1/L, 1] gets one mode with
    // amplitude sqrt(cell mass) * Rayleigh and a uniform phase: the
    // periodized ensemble is exactly Gaussian with the lattice-sampled
    // covariance. box = box_mult * 2 pi L.
    static PeriodicFieldSlice sample(double L, double box_mult, int grid_n, std::uint64_t seed,
                                     std::uint32_t field_index = 0);

    // Explicit modes (oracles). Wavevectors must lie on the dual lattice.
    static PeriodicFieldSlice from_modes(double L, double box, int grid_n,
                                         const std::vector<double>& kx,
                                         const std::vector<double>& ky,
                                         const std::vector<double>& a,
                                         const std::vector<double>& theta);

    nlohmann::json manifest() const;

  private:
    void synthesize_grids();
};

// Drift sampler for particles on the slice: the node values are upsampled
// spectrally (zero-padded FFT, exact for a band-limited field) to a finer
// grid, then interpolated bilinearly. With refine = 4 the interpolation
// error is O((h k_max / 4)^2) ~ 1e-3 relative, far below the statistical
// tolerances it feeds.
class SliceDriftSampler {
  public:
    SliceDriftSampler(const PeriodicFieldSlice& slice, int refine = 4);

    Vec2 b(Vec2 x) const; // periodic in both directions

  private:
    double box_;
    int n_;
    std::vector<double> bx_, by_;
};

} // namespace trl
